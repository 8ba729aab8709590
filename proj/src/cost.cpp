#include "qcost/cost.hpp"

#include <algorithm>
#include <cmath>

namespace qcost {

void PositionalTable::set(std::uint32_t i, Symbol s, Symbol t, double v) {
  if (i == 0) throw std::invalid_argument("positional table: positions are 1-based");
  if (v < 0.0) throw std::invalid_argument("positional table: charges must be nonnegative");
  auto sym_lo = std::min(s, t), sym_hi = std::max(s, t);
  auto key = std::make_tuple(i, sym_lo, sym_hi);
  auto it = entries.find(key);
  if (it != entries.end() && it->second != v)
    throw std::invalid_argument("positional table: conflicting values for a symbol pair");
  entries[key] = v;
  depth = std::max(depth, i);
}

double PositionalTable::value(std::uint32_t i, Symbol s, Symbol t) const {
  if (i > depth) return tail_default;
  auto it = entries.find(std::make_tuple(i, std::min(s, t), std::max(s, t)));
  return it == entries.end() ? tail_default : it->second;
}

double PositionalTable::max_entry() const {
  double m = tail_default;
  for (const auto& [k, v] : entries) m = std::max(m, v);
  return m;
}

CostModel CostModel::key() {
  CostModel c;
  c.variant_ = Variant::key;
  return c;
}

CostModel CostModel::symbol() {
  CostModel c;
  c.variant_ = Variant::symbol;
  return c;
}

CostModel CostModel::position_indicator(std::uint32_t i0) {
  if (i0 == 0) throw std::invalid_argument("position indicator: positions are 1-based");
  CostModel c;
  c.variant_ = Variant::position_indicator;
  c.i0_ = i0;
  return c;
}

CostModel CostModel::positional(PositionalTable table) {
  if (table.tail_default < 0.0)
    throw std::invalid_argument("positional table: tail default must be nonnegative");
  CostModel c;
  c.variant_ = Variant::positional;
  c.table_ = std::move(table);
  return c;
}

double CostModel::beta(KeyStream& x, KeyStream& y) const {
  if (variant_ == Variant::key) {
    if (x.seed() == y.seed())
      throw std::invalid_argument("cost of comparing a key with itself is undefined");
    return 1.0;
  }
  std::size_t k = lcp_depth(x, y);
  switch (variant_) {
    case Variant::symbol:
      return double(k) + 1.0;
    case Variant::position_indicator:
      return (i0_ <= k + 1) ? 1.0 : 0.0;
    case Variant::positional: {
      // Shared symbols at positions 1..k, then one comparison of the first
      // differing pair at position k+1.
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        Symbol s = *x.deterministic_symbol(i);
        total += table_.value(std::uint32_t(i) + 1, s, s);
      }
      total += table_.value(std::uint32_t(k) + 1, *x.deterministic_symbol(k),
                            *y.deterministic_symbol(k));
      return total;
    }
    default:
      return 1.0;
  }
}

double CostModel::beta_floor(KeyStream& x, KeyStream& y, bool& truncated) const {
  if (variant_ == Variant::key) {
    if (x.seed() == y.seed())
      throw std::invalid_argument("cost of comparing a key with itself is undefined");
    return 1.0;
  }
  LcpProbe p = lcp_probe(x, y);
  if (!p.exact) truncated = true;
  std::size_t k = p.depth;
  switch (variant_) {
    case Variant::symbol:
      return double(k) + 1.0;
    case Variant::position_indicator:
      return (i0_ <= k + 1) ? 1.0 : 0.0;
    case Variant::positional: {
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        Symbol s = *x.deterministic_symbol(i);
        total += table_.value(std::uint32_t(i) + 1, s, s);
      }
      if (p.exact)
        total += table_.value(std::uint32_t(k) + 1, *x.deterministic_symbol(k),
                              *y.deterministic_symbol(k));
      return total;
    }
    default:
      return 1.0;
  }
}

double CostModel::beta(const SourceModel& src, double u, double t) const {
  u = clamp_seed_interior(u);
  t = clamp_seed_interior(t);
  if (variant_ == Variant::key) {
    if (u == t) throw std::invalid_argument("cost of comparing a key with itself is undefined");
    return 1.0;
  }
  KeyStream a(src, u, 0), b(src, t, 0);
  return beta(a, b);
}

TameParams CostModel::tame_params(const SourceModel& src,
                                  std::optional<double> epsilon_request) const {
  switch (variant_) {
    case Variant::key:
    case Variant::position_indicator: {
      TameParams t;
      t.epsilon = 0.0;
      t.c = 1.0;
      return t;
    }
    case Variant::symbol:
      return src.symb_tame_params(epsilon_request);
    case Variant::positional: {
      // beta_table <= max_charge * (lcp+1) = max_charge * beta_symbol.
      TameParams t = src.symb_tame_params(epsilon_request);
      t.c *= table_.max_entry();
      return t;
    }
  }
  return TameParams{};
}

std::string CostModel::describe() const {
  switch (variant_) {
    case Variant::key:
      return "key";
    case Variant::symbol:
      return "symbol";
    case Variant::position_indicator:
      return "pos:" + std::to_string(i0_);
    case Variant::positional:
      return "table[depth=" + std::to_string(table_.depth) +
             ",tail=" + std::to_string(table_.tail_default) + "]";
  }
  return "?";
}

TameReport tame_check(const CostModel& cost, const SourceModel& src, const TameParams& params,
                      std::size_t random_pairs, RngStream& rng) {
  TameReport report;
  auto check = [&](double u, double t) {
    if (u > t) std::swap(u, t);
    if (u == t) return;
    double b;
    try {
      b = cost.beta(src, u, t);
    } catch (const truncation_error&) {
      return;  // pair below seed resolution; not evidence either way
    }
    double bound = params.c * std::pow(t - u, -params.epsilon);
    ++report.checked;
    if (b > bound) {
      ++report.violations;
      if (report.samples.size() < 16) report.samples.push_back({u, t, b, bound});
    }
  };
  for (std::size_t i = 0; i < random_pairs; ++i) check(rng.uniform01(), rng.uniform01());
  // Near-diagonal grid: gaps shrinking toward the resolution limit at several
  // base positions.
  for (double gap = 1e-1; gap >= 1e-12; gap *= 0.1)
    for (int j = 1; j <= 9; ++j) {
      double u = j / 10.0;
      if (u + gap < 1.0) check(u, u + gap);
    }
  return report;
}

}  // namespace qcost
