#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcost/source.hpp"

namespace qcost {

// Position-dependent comparison charges: value(i, s, s') is the charge for
// comparing symbols s, s' at 1-based position i. Positions beyond the listed
// depth (and pairs not listed) fall back to tail_default.
struct PositionalTable {
  std::map<std::tuple<std::uint32_t, Symbol, Symbol>, double> entries;
  double tail_default = 1.0;
  std::uint32_t depth = 0;  // largest listed position

  void set(std::uint32_t i, Symbol s, Symbol t, double value);
  double value(std::uint32_t i, Symbol s, Symbol t) const;
  double max_entry() const;
};

// Cost charged when two distinct keys are compared. The key model charges 1;
// the symbol model charges one unit per symbol comparison (shared prefix
// length + 1); the indicator model charges only at one position; the
// positional model charges per-position values from a table.
class CostModel {
 public:
  enum class Variant { key, symbol, position_indicator, positional };

  static CostModel key();
  static CostModel symbol();
  static CostModel position_indicator(std::uint32_t i0);  // i0 >= 1
  static CostModel positional(PositionalTable table);

  Variant variant() const { return variant_; }
  std::uint32_t indicator_position() const { return i0_; }
  const PositionalTable& table() const { return table_; }

  double beta(KeyStream& x, KeyStream& y) const;
  double beta(const SourceModel& src, double u, double t) const;

  // Like beta, but when the seeds agree beyond deterministic resolution it
  // charges only the known part of the cost and sets `truncated` instead of
  // throwing. Simulation runs use this and flag the record.
  double beta_floor(KeyStream& x, KeyStream& y, bool& truncated) const;

  // Pointwise bound beta <= c (t-u)^-epsilon for this cost under the given
  // source. Key and indicator costs are bounded by 1; symbol-counting costs
  // inherit the source's parameters (scaled by the largest table charge).
  TameParams tame_params(const SourceModel& src,
                         std::optional<double> epsilon_request = {}) const;

  std::string describe() const;

 private:
  Variant variant_ = Variant::key;
  std::uint32_t i0_ = 1;
  PositionalTable table_;
};

struct TameViolation {
  double u, t, beta, bound;
};

struct TameReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::vector<TameViolation> samples;  // first few violations
};

// Empirical check of beta(u,t) <= c (t-u)^-epsilon on random pairs plus a
// near-diagonal grid.
TameReport tame_check(const CostModel& cost, const SourceModel& src, const TameParams& params,
                      std::size_t random_pairs, RngStream& rng);

}  // namespace qcost
