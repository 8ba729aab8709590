#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcost/cost.hpp"
#include "qcost/rng.hpp"
#include "qcost/source.hpp"

namespace qcost {

// First n draws of an i.i.d. uniform seed sequence, redrawing any value that
// collides with an earlier one so all entries are distinct.
std::vector<double> draw_seed_array(RngStream& rng, std::size_t n);

// Target rank for quantile alpha among n keys.
std::size_t quantile_rank(double alpha, std::size_t n);

struct RunRecord {
  std::string algorithm;
  std::size_t n = 0;
  double alpha = 0.0;            // quickval only
  std::size_t m = 0;             // quickquant / qs-random only
  double total_cost = 0.0;
  std::vector<double> per_pivot;  // cost charged to each pivot, in order
  std::size_t pivots = 0;
  std::uint64_t comparisons = 0;
  bool truncated = false;
};

// One run's comparison evaluator: memoizes each key's symbol stream so a
// key's symbols are derived once regardless of how many comparisons touch it.
class RunContext {
 public:
  RunContext(const SourceModel& src, const CostModel& cost, std::span<const double> seeds,
             std::uint64_t stream_seed);

  // beta(seeds[i], seeds[j]) with floor-on-truncation semantics.
  double charge(std::size_t i, std::size_t j);
  bool truncated() const { return truncated_; }

 private:
  const CostModel* cost_;
  std::vector<KeyStream> streams_;
  bool truncated_ = false;
  bool key_only_ = false;
};

RunRecord run_quickval(const SourceModel& src, const CostModel& cost,
                       std::span<const double> seeds, double alpha,
                       std::uint64_t stream_seed = 0);

RunRecord run_quickquant(const SourceModel& src, const CostModel& cost,
                         std::span<const double> seeds, std::size_t m,
                         std::uint64_t stream_seed = 0);

// Classical QuickSelect with a uniformly random pivot per sublist; used as a
// distributional cross-check against run_quickquant.
RunRecord run_quickselect_random_pivot(const SourceModel& src, const CostModel& cost,
                                       std::span<const double> seeds, std::size_t m,
                                       RngStream& rng, std::uint64_t stream_seed = 0);

}  // namespace qcost
