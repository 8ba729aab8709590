#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qcost/cost.hpp"
#include "qcost/rng.hpp"
#include "qcost/source.hpp"

namespace qcost {

// One refinement step of the limiting pivot recursion: interval (lo,hi) after
// processing pivot v.
struct PivotStep {
  double lo, hi, pivot;
};

struct PivotChain {
  double alpha = 0.0;
  std::vector<PivotStep> steps;
  double final_width = 1.0;
};

// Stop rule and certified-tail parameters for limit-cost sampling.
struct TruncationPolicy {
  double epsilon = 0.0;  // cost tameness: beta <= c (t-u)^-epsilon
  double c = 1.0;
  double delta = 1e-6;   // stop once the certified tail bound drops below this
  int max_depth = 400;
};

TruncationPolicy make_truncation_policy(const SourceModel& src, const CostModel& cost,
                                        double delta, int max_depth = 400);

// Pivot chain with independent conditionally-uniform pivots (the limit law).
PivotChain sample_pivot_chain(RngStream& rng, double alpha, int max_depth,
                              double min_width = 0.0);

// Chain built from externally supplied pivot values (for exact tests).
PivotChain chain_from_pivots(std::span<const double> pivots, double alpha);

enum class IntegralRoute { automatic, prefix_sum, quadrature };

// I_p(t,x,y) = integral over (x,y) of beta(u,t)^p du. Key costs have a
// closed form; symbol-counting costs sum overlaps along the prefix chain of
// t; the quadrature route integrates pointwise evaluations and is kept as an
// independent cross-check and as the fallback for table costs.
double integral_I(const SourceModel& src, const CostModel& cost, double p, double t, double x,
                  double y, double tol = 1e-10, IntegralRoute route = IntegralRoute::automatic);

struct LimitSample {
  double value = 0.0;
  double tail_bound = 0.0;
  int depth = 0;
  bool flagged = false;  // stop rule unmet at max depth
};

// Core accumulator for the limiting cost S = sum_k I(V_k, L_{k-1}, R_{k-1}).
// next_pivot(lo,hi) supplies each pivot; the certified tail treats the
// remaining interval widths as a geometric sequence with a conservatively
// floored observed ratio.
LimitSample accumulate_limit_cost(const std::function<double(double, double)>& next_pivot,
                                  const SourceModel& src, const CostModel& cost, double alpha,
                                  const TruncationPolicy& policy);

LimitSample sample_S(RngStream& rng, const SourceModel& src, const CostModel& cost, double alpha,
                     const TruncationPolicy& policy);

// Perpetuity 1 + sum_k U_1...U_k (the key-comparison limit at alpha = 0).
double sample_dickman(RngStream& rng, double delta);

struct Rect {
  double x1, x2, y1, y2;
};

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t reps = 0;
};

// Expected number of visits of the interval chain to [x1,x2] x [y1,y2]
// (state (0,1) included): closed form and Monte Carlo.
double nu_closed(double alpha, const Rect& rect);
McEstimate nu_mc(RngStream& rng, double alpha, const Rect& rect, std::size_t reps,
                 int max_depth = 256);

// Densities of the chain state after k steps on the two boundary strips:
// f_k for (L_k, 1) with L_k < alpha, g_k for (0, R_k) with R_k > alpha.
double chain_marginal_f(int k, double x, double alpha);
double chain_marginal_g(int k, double y, double alpha);
double chain_marginal_f_integral(int k, double x1, double x2, double alpha);
double chain_marginal_g_integral(int k, double y1, double y2, double alpha);
McEstimate chain_marginal_f_mc(RngStream& rng, int k, double x1, double x2, double alpha,
                               std::size_t reps);
McEstimate chain_marginal_g_mc(RngStream& rng, int k, double y1, double y2, double alpha,
                               std::size_t reps);

namespace detail {
// integral over (lo,hi) of beta(fixed,v)^p dv where fixed is an endpoint of
// (lo,hi); handles the singularity at v -> fixed by geometric grading plus a
// certified sliver bound from the tame parameters.
double integral_beta_one_sided(const SourceModel& src, const CostModel& cost, double p,
                               double fixed, double lo, double hi, double tol,
                               const TameParams& tame);

// Same integral through the per-model prefix-chain routes, which are exact up
// to the series truncation tol; fixed may sit anywhere relative to (lo,hi).
double integral_beta_line(const SourceModel& src, const CostModel& cost, double p, double fixed,
                          double lo, double hi, double tol, const TameParams& tame);
}  // namespace detail

}  // namespace qcost
