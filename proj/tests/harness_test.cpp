#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qcost/harness.hpp"
#include "test_util.hpp"

using namespace qcost;
using testutil::stats_of;

namespace {

SourceModel uniform_binary() { return SourceModel::memoryless({0.5, 0.5}); }

double find_estimate(const ConvergenceReport& rep, std::size_t n, const std::string& algo,
                     double p) {
  for (const ConvergenceEstimate& e : rep.estimates)
    if (e.n == n && e.algo == algo && e.p == p) return e.estimate;
  REQUIRE(false);
  return 0.0;
}

}  // namespace

TEST_CASE("coupled_run determinism and trivial n") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();

  CoupledSample one = coupled_run(11, 0, ub, key, 0.4, 1, 1e-3);
  CHECK(one.quickval_avg == 0.0);
  CHECK(one.quickquant_avg == 0.0);
  CHECK(one.limit.value > 0.0);

  CoupledSample a = coupled_run(11, 5, ub, key, 0.4, 256, 1e-3);
  CoupledSample b = coupled_run(11, 5, ub, key, 0.4, 256, 1e-3);
  CHECK(a.quickval_avg == b.quickval_avg);
  CHECK(a.quickquant_avg == b.quickquant_avg);
  CHECK(a.limit.value == b.limit.value);
  CHECK(a.limit.depth == b.limit.depth);
}

TEST_CASE("coupling keeps the finite run close to its limit") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();

  // Shared randomness: the per-replication gap shrinks with n, so paired
  // samples must be strongly correlated, and most large-n gaps are small.
  std::vector<double> run_avg, limits;
  int close_gaps = 0;
  for (int rep = 0; rep < 40; ++rep) {
    CoupledSample s = coupled_run(2718, rep, ub, key, 0.0, 10000, 1e-3);
    run_avg.push_back(s.quickval_avg);
    limits.push_back(s.limit.value);
    if (std::fabs(s.quickval_avg - s.limit.value) < 0.1) ++close_gaps;
  }
  CHECK(close_gaps >= 36);

  auto ma = stats_of(run_avg), mb = stats_of(limits);
  double cov = 0.0;
  for (std::size_t i = 0; i < run_avg.size(); ++i)
    cov += (run_avg[i] - ma.mean) * (limits[i] - mb.mean);
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < run_avg.size(); ++i) {
    sa += (run_avg[i] - ma.mean) * (run_avg[i] - ma.mean);
    sb += (limits[i] - mb.mean) * (limits[i] - mb.mean);
  }
  CHECK(cov / std::sqrt(sa * sb) > 0.5);
}

TEST_CASE("convergence experiment trends and bookkeeping") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  ExperimentConfig cfg;
  cfg.alpha = 0.5;
  cfg.n_grid = {32, 128, 512};
  cfg.reps = 60;
  cfg.p_values = {1.0, 2.0};
  cfg.delta = 1e-3;
  cfg.master_seed = 9;
  cfg.paths = 4;
  cfg.validate();

  ConvergenceReport rep = convergence_experiment(ub, key, cfg);
  CHECK(rep.estimates.size() == 3 * 2 * 2);
  CHECK(rep.paths.size() == 4 * 3);
  CHECK_FALSE(rep.any_truncated);

  for (const ConvergenceEstimate& e : rep.estimates) {
    CHECK(e.estimate >= 0.0);
    CHECK(e.stderr_ >= 0.0);
  }
  for (const PathPoint& p : rep.paths) CHECK(p.value >= 0.0);

  for (const std::string& algo : {std::string("quickval"), std::string("quickquant")}) {
    CHECK(find_estimate(rep, 512, algo, 1.0) < find_estimate(rep, 32, algo, 1.0));
    // Jensen on the same sample: second moment dominates squared first.
    for (std::size_t n : cfg.n_grid) {
      double m1 = find_estimate(rep, n, algo, 1.0);
      double m2 = find_estimate(rep, n, algo, 2.0);
      CHECK(m2 >= m1 * m1 - 1e-12);
    }
  }

  // Same config, rerun: identical numbers. More worker threads: same too.
  ConvergenceReport rep2 = convergence_experiment(ub, key, cfg);
  ExperimentConfig cfg4 = cfg;
  cfg4.threads = 4;
  ConvergenceReport rep4 = convergence_experiment(ub, key, cfg4);
  REQUIRE(rep2.estimates.size() == rep.estimates.size());
  REQUIRE(rep4.estimates.size() == rep.estimates.size());
  for (std::size_t i = 0; i < rep.estimates.size(); ++i) {
    CHECK(rep.estimates[i].estimate == rep2.estimates[i].estimate);
    CHECK(rep.estimates[i].estimate == rep4.estimates[i].estimate);
    CHECK(rep.estimates[i].stderr_ == rep4.estimates[i].stderr_);
  }
  for (std::size_t i = 0; i < rep.paths.size(); ++i)
    CHECK(rep.paths[i].value == rep4.paths[i].value);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  cfg.n_grid = {64, 32};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_grid = {32, 64};
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.reps = 10;
  cfg.p_values = {0.5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.p_values = {1.0};
  cfg.validate();
}

TEST_CASE("two-sample KS decisions") {
  std::vector<double> a, b, shifted;
  for (int rep = 0; rep < 3000; ++rep) {
    RngStream r1 = RngStream::derive(41, rep);
    RngStream r2 = RngStream::derive(42, rep);
    a.push_back(sample_dickman(r1, 1e-9));
    double v = sample_dickman(r2, 1e-9);
    b.push_back(v);
    shifted.push_back(v + 0.15);
  }

  KsResult same = distribution_compare(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.accept);

  KsResult ok = distribution_compare(a, b);
  CHECK(ok.accept);
  CHECK(ok.p_value > 0.01);

  KsResult off = distribution_compare(a, shifted);
  CHECK_FALSE(off.accept);

  std::vector<double> tiny(50, 1.0);
  CHECK_THROWS_AS((void)distribution_compare(tiny, a), std::invalid_argument);
}

TEST_CASE("moment report") {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  TruncationPolicy policy = make_truncation_policy(ub, key, 1e-4);
  std::vector<double> vals;
  for (int rep = 0; rep < 4000; ++rep) {
    RngStream rng = RngStream::derive(3141, rep);
    vals.push_back(sample_S(rng, ub, key, 0.5, policy).value);
  }
  std::vector<int> orders = {1, 2};
  auto rows = moment_report(vals, orders);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].order == 1);
  CHECK(testutil::close(rows[0].mean, 2.0 * (1.0 + std::log(2.0)), 3.0 * rows[0].stderr_ + 1e-4));
  CHECK(rows[1].mean >= rows[0].mean * rows[0].mean);

  std::vector<double> constant(100, 4.0);
  auto crows = moment_report(constant, orders);
  CHECK(crows[0].mean == 4.0);
  CHECK(crows[0].stderr_ == 0.0);
}
