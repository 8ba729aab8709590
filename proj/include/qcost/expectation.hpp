#pragma once

#include <cstddef>
#include <string>

#include "qcost/cost.hpp"
#include "qcost/source.hpp"

namespace qcost {

// Entropy-like kernel, two branches split at y = 1/2, convention 0 ln 0 = 0.
double H_fn(double y);
// L(y) = 2[1 + H(y)]; continuous, nonincreasing, L(1/2) = 2, L(y) -> 0.
double L_fn(double y);

// Limit of expected key comparisons per element for quantile alpha.
double expected_key_closed(double alpha);

struct ExpectationResult {
  double value = 0.0;
  std::string method;
  double error_estimate = 0.0;
  std::size_t terms = 0;
  bool flagged = false;
};

// Contribution of one fundamental interval to the symbol-cost expectation:
// p_w L(|alpha - mu_w| / p_w).
double J_of_prefix(const FundamentalInterval& iv, double alpha);
// Same quantity by direct 2D quadrature of 2 [(alpha v t) - (alpha ^ u)]^-1
// over the triangle above iv; slow, kept as an independent check.
double J_of_prefix_quadrature(const FundamentalInterval& iv, double alpha, double tol = 1e-7);

// Symbol-cost expectation as the prefix-tree sum of J_of_prefix, pruned with
// certified subtree bounds; error_estimate sums the pruned bounds.
ExpectationResult expected_S_series(const SourceModel& src, double alpha, double tol,
                                    std::size_t max_terms = 100000000);

// Expectation for an arbitrary cost model: the occupation integral
// 2 beta(u,t) [(alpha v t) - (alpha ^ u)]^-1 over the unit triangle, summed
// exactly over source-tree rectangle pairs with certified diagonal remainders.
ExpectationResult expected_S_integral(const SourceModel& src, const CostModel& cost, double alpha,
                                      double tol = 1e-8);

// Integral over alpha of the expectation, composite midpoint rule.
ExpectationResult expected_quickrand(const SourceModel& src, const CostModel& cost, int panels,
                                     double inner_tol = 1e-6);

}  // namespace qcost
