#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "qcost/limit.hpp"
#include "qcost/quad.hpp"
#include "test_util.hpp"

using namespace qcost;
using testutil::stats_of;

namespace {

SourceModel uniform_binary() { return SourceModel::memoryless({0.5, 0.5}); }

}  // namespace

TEST_CASE("integral_I closed values") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  CostModel symb = CostModel::symbol();
  CHECK(integral_I(ub, key, 1.0, 0.5, 0.2, 0.9) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(integral_I(ub, symb, 1.0, 2.0 / 3.0, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integral_I(ub, symb, 1.0, 2.0 / 3.0, 0.6, 0.7) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("integral_I is additive in the domain") {
  SourceModel b = SourceModel::memoryless({0.3, 0.7});
  CostModel symb = CostModel::symbol();
  RngStream rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    double t = rng.uniform01();
    double x = rng.uniform01(), y = rng.uniform01();
    if (x > y) std::swap(x, y);
    if (y - x < 1e-6) continue;
    double m = rng.uniform(x, y);
    if (std::fabs(m - t) < 1e-9) continue;
    double whole = integral_I(b, symb, 1.0, t, x, y);
    double parts = integral_I(b, symb, 1.0, t, x, m) + integral_I(b, symb, 1.0, t, m, y);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-10));
  }
}

TEST_CASE("prefix route agrees with quadrature") {
  std::vector<SourceModel> sources = {uniform_binary(), SourceModel::memoryless({0.3, 0.7})};
  CostModel symb = CostModel::symbol();
  RngStream rng(17);
  for (const SourceModel& src : sources) {
    for (int trial = 0; trial < 100; ++trial) {
      double t = rng.uniform01();
      double x = rng.uniform01(), y = rng.uniform01();
      if (x > y) std::swap(x, y);
      if (y - x < 1e-4) continue;
      double exact = integral_I(src, symb, 1.0, t, x, y, 1e-10, IntegralRoute::prefix_sum);
      double quad = integral_I(src, symb, 1.0, t, x, y, 1e-9, IntegralRoute::quadrature);
      CHECK(testutil::close(exact, quad, 1e-6));
    }
  }
}

TEST_CASE("injected midpoint pivots reproduce the geometric series") {
  SourceModel ub = uniform_binary();
  TruncationPolicy policy = make_truncation_policy(ub, CostModel::key(), 1e-6);
  auto midpoint = [](double lo, double hi) { return 0.5 * (lo + hi); };
  LimitSample s = accumulate_limit_cost(midpoint, ub, CostModel::key(), 0.0, policy);
  CHECK_FALSE(s.flagged);
  CHECK(s.tail_bound <= 1e-6);
  CHECK(testutil::close(s.value, 2.0, s.tail_bound + 1e-12));
  CHECK(s.depth > 10);
}

TEST_CASE("chain_from_pivots records the interval recursion") {
  std::vector<double> pivots = {0.5, 0.25};
  PivotChain c = chain_from_pivots(pivots, 0.0);
  REQUIRE(c.steps.size() == 2);
  CHECK(c.steps[0].lo == 0.0);
  CHECK(c.steps[0].hi == 1.0);
  CHECK(c.steps[0].pivot == 0.5);
  CHECK(c.steps[1].lo == 0.0);
  CHECK(c.steps[1].hi == 0.5);
  CHECK(c.steps[1].pivot == 0.25);
  CHECK(c.final_width == doctest::Approx(0.25));

  PivotChain d = chain_from_pivots(pivots, 0.4);
  CHECK(d.steps[1].lo == 0.0);  // 0.5 > alpha shrinks the right side
  CHECK(d.steps[1].hi == 0.5);
  CHECK(d.final_width == doctest::Approx(0.25));  // 0.25 < alpha shrinks the left
}

TEST_CASE("sampled pivot chains nest and track alpha") {
  RngStream rng(8);
  for (double alpha : {0.0, 0.3, 1.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      PivotChain c = sample_pivot_chain(rng, alpha, 60);
      double lo = 0.0, hi = 1.0;
      for (const PivotStep& st : c.steps) {
        CHECK(st.lo == lo);
        CHECK(st.hi == hi);
        CHECK(st.pivot > lo);
        CHECK(st.pivot < hi);
        if (st.pivot < alpha)
          lo = st.pivot;
        else
          hi = st.pivot;
        CHECK(lo <= alpha);
        CHECK(alpha <= hi);
      }
      CHECK(c.final_width == doctest::Approx(hi - lo));
    }
  }
}

TEST_CASE("sample_S is deterministic and certified") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  TruncationPolicy policy = make_truncation_policy(ub, key, 1e-4);

  RngStream a(123), b(123);
  LimitSample s1 = sample_S(a, ub, key, 0.0, policy);
  LimitSample s2 = sample_S(b, ub, key, 0.0, policy);
  CHECK(s1.value == s2.value);
  CHECK(s1.depth == s2.depth);

  std::vector<double> vals;
  for (int rep = 0; rep < 10000; ++rep) {
    RngStream rng = RngStream::derive(2024, rep);
    LimitSample s = sample_S(rng, ub, key, 0.0, policy);
    CHECK_FALSE(s.flagged);
    CHECK(s.tail_bound <= 1e-4);
    vals.push_back(s.value);
  }
  auto st = stats_of(vals);
  CHECK(testutil::close(st.mean, 2.0, 3.0 * st.stderr_ + 1e-4));
}

TEST_CASE("halving delta only extends a sample within its certified bound") {
  SourceModel ub = uniform_binary();
  CostModel symb = CostModel::symbol();
  TruncationPolicy coarse = make_truncation_policy(ub, symb, 1e-2);
  TruncationPolicy fine = make_truncation_policy(ub, symb, 1e-3);
  for (int rep = 0; rep < 200; ++rep) {
    RngStream r1 = RngStream::derive(55, rep);
    RngStream r2 = RngStream::derive(55, rep);
    LimitSample c = sample_S(r1, ub, symb, 0.25, coarse);
    LimitSample f = sample_S(r2, ub, symb, 0.25, fine);
    CHECK(f.value >= c.value - 1e-12);
    CHECK(f.value - c.value <= c.tail_bound + 1e-12);
  }
}

TEST_CASE("dickman perpetuity sampler") {
  RngStream a(9), b(9);
  CHECK(sample_dickman(a, 1e-9) == sample_dickman(b, 1e-9));

  std::vector<double> vals;
  for (int rep = 0; rep < 20000; ++rep) {
    RngStream rng = RngStream::derive(77, rep);
    double v = sample_dickman(rng, 1e-9);
    CHECK(v >= 1.0);
    vals.push_back(v);
  }
  auto st = stats_of(vals);
  CHECK(testutil::close(st.mean, 2.0, 3.0 * st.stderr_));
}

TEST_CASE("nu closed form on a frozen rectangle") {
  Rect r{0.1, 0.2, 0.7, 0.8};
  CHECK(nu_closed(0.5, r) == doctest::Approx(2.0 * std::log(36.0 / 35.0)).epsilon(1e-12));

  RngStream rng(31337);
  McEstimate mc = nu_mc(rng, 0.5, r, 40000);
  CHECK(testutil::close(mc.mean, nu_closed(0.5, r), 3.0 * mc.stderr_));

  Rect r2{0.05, 0.3, 0.6, 0.95};
  RngStream rng2(4);
  McEstimate mc2 = nu_mc(rng2, 0.4, r2, 40000);
  CHECK(testutil::close(mc2.mean, nu_closed(0.4, r2), 3.0 * mc2.stderr_));
}

TEST_CASE("chain marginal closed forms") {
  // One-sided chains: g_k(y) = (-ln y)^{k-1}/(k-1)! below alpha on the right.
  CHECK(chain_marginal_g(1, 0.7, 0.3) == doctest::Approx(1.0));
  CHECK(chain_marginal_g(2, 0.7, 0.3) == doctest::Approx(-std::log(0.7)));
  CHECK(chain_marginal_g(3, 0.7, 0.3) ==
        doctest::Approx(std::pow(std::log(0.7), 2.0) / 2.0));
  CHECK(chain_marginal_f(2, 0.2, 0.3) == doctest::Approx(-std::log(0.8)));

  for (int k = 1; k <= 4; ++k) {
    double closed = chain_marginal_g_integral(k, 0.5, 0.9, 0.3);
    double quad =
        adaptive_simpson([&](double y) { return chain_marginal_g(k, y, 0.3); }, 0.5, 0.9, 1e-10);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
    RngStream rng(900 + k);
    McEstimate mc = chain_marginal_g_mc(rng, k, 0.5, 0.9, 0.3, 60000);
    CHECK(testutil::close(mc.mean, closed, 3.0 * mc.stderr_ + 1e-4));

    double fclosed = chain_marginal_f_integral(k, 0.05, 0.25, 0.3);
    RngStream rng2(1900 + k);
    McEstimate fmc = chain_marginal_f_mc(rng2, k, 0.05, 0.25, 0.3, 60000);
    CHECK(testutil::close(fmc.mean, fclosed, 3.0 * fmc.stderr_ + 1e-4));
  }
}

TEST_CASE("chain moments respect the geometric lemma bounds") {
  // E(R_k - L_k)^p <= ((2-2^-p)/(p+1))^k and, through the tame bound on I,
  // E I_k^q <= (2^eps c/(1-eps))^q ((2-2^-q(1-eps))/(q(1-eps)+1))^(k-1).
  SourceModel ub = uniform_binary();
  CostModel symb = CostModel::symbol();
  TameParams tame = symb.tame_params(ub);
  const int kmax = 8, reps = 4000;
  const double alpha = 0.5;

  std::vector<std::vector<double>> widths(kmax + 1), icosts(kmax + 1);
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(31, rep);
    PivotChain c = sample_pivot_chain(rng, alpha, kmax);
    REQUIRE(int(c.steps.size()) == kmax);
    for (int k = 1; k <= kmax; ++k) {
      const PivotStep& st = c.steps[k - 1];
      // Interval after k pivots: the side of st containing alpha.
      double wlo = st.pivot < alpha ? st.pivot : st.lo;
      double whi = st.pivot < alpha ? st.hi : st.pivot;
      widths[k].push_back(whi - wlo);
      icosts[k].push_back(integral_I(ub, symb, 1.0, st.pivot, st.lo, st.hi));
    }
  }

  for (double p : {1.0, 2.0, 4.0}) {
    double per_step = (2.0 - std::pow(2.0, -p)) / (p + 1.0);
    for (int k = 1; k <= kmax; ++k) {
      std::vector<double> pow_w;
      pow_w.reserve(widths[k].size());
      for (double w : widths[k]) pow_w.push_back(std::pow(w, p));
      auto st = stats_of(pow_w);
      CHECK(st.mean <= std::pow(per_step, double(k)) + 3.0 * st.stderr_);
    }
  }
  for (double q : {1.0, 4.0}) {
    double e = tame.epsilon;
    double lead = std::pow(std::pow(2.0, e) * tame.c / (1.0 - e), q);
    double per_step = (2.0 - std::pow(2.0, -q * (1.0 - e))) / (q * (1.0 - e) + 1.0);
    for (int k = 1; k <= kmax; ++k) {
      std::vector<double> pow_i;
      pow_i.reserve(icosts[k].size());
      for (double v : icosts[k]) pow_i.push_back(std::pow(v, q));
      auto st = stats_of(pow_i);
      CHECK(st.mean <= lead * std::pow(per_step, double(k - 1)) + 3.0 * st.stderr_);
    }
  }

  // Summability diagnostic: (E I_2,k)^(1/2) shrinks geometrically.
  std::vector<std::vector<double>> sq(kmax + 1);
  for (int rep = 0; rep < 1500; ++rep) {
    RngStream rng = RngStream::derive(67, rep);
    PivotChain c = sample_pivot_chain(rng, alpha, kmax);
    for (int k = 1; k <= kmax; ++k) {
      const PivotStep& st = c.steps[k - 1];
      sq[k].push_back(integral_I(ub, symb, 2.0, st.pivot, st.lo, st.hi));
    }
  }
  std::vector<double> roots;
  for (int k = 1; k <= kmax; ++k) roots.push_back(std::sqrt(stats_of(sq[k]).mean));
  for (int k = 3; k < kmax; ++k) CHECK(roots[k] < 0.95 * roots[k - 2]);
}
