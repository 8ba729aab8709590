#include "qcost/algo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace qcost {

std::vector<double> draw_seed_array(RngStream& rng, std::size_t n) {
  std::vector<double> seeds;
  seeds.reserve(n);
  std::unordered_set<double> seen;
  seen.reserve(2 * n);
  while (seeds.size() < n) {
    double u = rng.uniform01();
    if (seen.insert(u).second) seeds.push_back(u);
  }
  return seeds;
}

std::size_t quantile_rank(double alpha, std::size_t n) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  if (n == 0) throw std::invalid_argument("rank undefined for an empty array");
  auto m = std::size_t(std::floor(alpha * double(n))) + 1;
  return std::clamp<std::size_t>(m, 1, n);
}

namespace {

void require_distinct(std::span<const double> seeds) {
  std::unordered_set<double> seen;
  seen.reserve(2 * seeds.size());
  for (double u : seeds) {
    if (!(u > 0.0) || !(u < 1.0))
      throw std::invalid_argument("seeds must lie strictly inside (0,1)");
    if (!seen.insert(u).second) throw std::invalid_argument("seed collision in input array");
  }
}

}  // namespace

RunContext::RunContext(const SourceModel& src, const CostModel& cost,
                       std::span<const double> seeds, std::uint64_t stream_seed)
    : cost_(&cost), key_only_(cost.variant() == CostModel::Variant::key) {
  if (!key_only_) {
    streams_.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i)
      streams_.emplace_back(src, seeds[i], splitmix64(stream_seed ^ (i + 1)));
  }
}

double RunContext::charge(std::size_t i, std::size_t j) {
  if (key_only_) return 1.0;
  return cost_->beta_floor(streams_[i], streams_[j], truncated_);
}

RunRecord run_quickval(const SourceModel& src, const CostModel& cost,
                       std::span<const double> seeds, double alpha, std::uint64_t stream_seed) {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0,1]");
  require_distinct(seeds);
  RunContext ctx(src, cost, seeds, stream_seed);

  RunRecord rec;
  rec.algorithm = "quickval";
  rec.n = seeds.size();
  rec.alpha = alpha;

  std::vector<std::uint32_t> elig(seeds.size());
  std::iota(elig.begin(), elig.end(), 0);
  double lo = 0.0, hi = 1.0;
  std::vector<std::uint32_t> next;
  while (!elig.empty()) {
    std::uint32_t tau = elig.front();
    double level = 0.0;
    for (std::size_t idx = 1; idx < elig.size(); ++idx) level += ctx.charge(elig[idx], tau);
    rec.comparisons += elig.size() - 1;
    rec.per_pivot.push_back(level);
    rec.total_cost += level;
    ++rec.pivots;

    double piv = seeds[tau];
    if (piv < alpha)
      lo = piv;
    else
      hi = piv;
    next.clear();
    for (std::size_t idx = 1; idx < elig.size(); ++idx) {
      double u = seeds[elig[idx]];
      if (u > lo && u < hi) next.push_back(elig[idx]);
    }
    elig.swap(next);
  }
  rec.truncated = ctx.truncated();
  return rec;
}

RunRecord run_quickquant(const SourceModel& src, const CostModel& cost,
                         std::span<const double> seeds, std::size_t m,
                         std::uint64_t stream_seed) {
  if (m < 1 || m > seeds.size())
    throw std::invalid_argument("target rank must lie in 1..n");
  require_distinct(seeds);
  RunContext ctx(src, cost, seeds, stream_seed);

  RunRecord rec;
  rec.algorithm = "quickquant";
  rec.n = seeds.size();
  rec.m = m;

  // 1-based rank of each seed among the whole array
  std::vector<std::uint32_t> order(seeds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return seeds[a] < seeds[b]; });
  std::vector<std::size_t> rank(seeds.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;

  std::vector<std::uint32_t> elig(seeds.size());
  std::iota(elig.begin(), elig.end(), 0);
  double lo = 0.0, hi = 1.0;
  std::vector<std::uint32_t> next;
  while (lo < hi && !elig.empty()) {
    std::uint32_t tau = elig.front();
    double level = 0.0;
    for (std::size_t idx = 1; idx < elig.size(); ++idx) level += ctx.charge(elig[idx], tau);
    rec.comparisons += elig.size() - 1;
    rec.per_pivot.push_back(level);
    rec.total_cost += level;
    ++rec.pivots;

    double piv = seeds[tau];
    std::size_t pr = rank[tau];
    if (pr <= m) lo = piv;
    if (pr >= m) hi = piv;
    next.clear();
    for (std::size_t idx = 1; idx < elig.size(); ++idx) {
      double u = seeds[elig[idx]];
      if (u > lo && u < hi) next.push_back(elig[idx]);
    }
    elig.swap(next);
  }
  rec.truncated = ctx.truncated();
  return rec;
}

RunRecord run_quickselect_random_pivot(const SourceModel& src, const CostModel& cost,
                                       std::span<const double> seeds, std::size_t m,
                                       RngStream& rng, std::uint64_t stream_seed) {
  if (m < 1 || m > seeds.size())
    throw std::invalid_argument("target rank must lie in 1..n");
  require_distinct(seeds);
  RunContext ctx(src, cost, seeds, stream_seed);

  RunRecord rec;
  rec.algorithm = "qs-random";
  rec.n = seeds.size();
  rec.m = m;

  std::vector<std::uint32_t> sub(seeds.size());
  std::iota(sub.begin(), sub.end(), 0);
  std::size_t target = m;
  std::vector<std::uint32_t> below, above;
  while (sub.size() > 1) {
    std::uint32_t piv = sub[rng.index(sub.size())];
    double pv = seeds[piv];
    below.clear();
    above.clear();
    double level = 0.0;
    for (std::uint32_t idx : sub) {
      if (idx == piv) continue;
      level += ctx.charge(idx, piv);
      (seeds[idx] < pv ? below : above).push_back(idx);
    }
    rec.comparisons += sub.size() - 1;
    rec.per_pivot.push_back(level);
    rec.total_cost += level;
    ++rec.pivots;

    std::size_t r = below.size() + 1;
    if (target == r) break;
    if (target < r) {
      sub.swap(below);
    } else {
      sub.swap(above);
      target -= r;
    }
  }
  rec.truncated = ctx.truncated();
  return rec;
}

}  // namespace qcost
