#include "qcost/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qcost {

namespace {

std::uint64_t stream_seed_for(std::uint64_t master, std::uint64_t rep) {
  return splitmix64(master ^ (0xA24BAED4963EE407ull * (rep + 1)));
}

// Pivot provider scanning a seed array in order, drawing fresh seeds once the
// prefix is exhausted. Nesting makes a single forward pointer sufficient.
struct StreamPivots {
  std::vector<double>& seeds;
  RngStream& rng;
  std::size_t pos = 0;

  double operator()(double lo, double hi) {
    for (;; ++pos) {
      if (pos == seeds.size()) seeds.push_back(rng.uniform01());
      double u = seeds[pos];
      if (u > lo && u < hi) {
        ++pos;
        return u;
      }
    }
  }
};

struct RepOutcome {
  std::vector<double> quickval_avg;   // per n in grid
  std::vector<double> quickquant_avg;
  double limit_value = 0.0;
  bool truncated = false;
};

RepOutcome run_replication(std::uint64_t master, std::uint64_t rep, const SourceModel& src,
                           const CostModel& cost, double alpha,
                           std::span<const std::size_t> n_grid, double delta) {
  RngStream rng = RngStream::derive(master, rep);
  std::size_t max_n = n_grid.back();
  std::vector<double> seeds = draw_seed_array(rng, max_n);
  std::uint64_t ss = stream_seed_for(master, rep);

  RepOutcome out;
  out.quickval_avg.reserve(n_grid.size());
  out.quickquant_avg.reserve(n_grid.size());
  for (std::size_t n : n_grid) {
    std::span<const double> prefix(seeds.data(), n);
    RunRecord rv = run_quickval(src, cost, prefix, alpha, ss);
    RunRecord rq = run_quickquant(src, cost, prefix, quantile_rank(alpha, n), ss);
    out.quickval_avg.push_back(rv.total_cost / double(n));
    out.quickquant_avg.push_back(rq.total_cost / double(n));
    out.truncated = out.truncated || rv.truncated || rq.truncated;
  }

  TruncationPolicy policy = make_truncation_policy(src, cost, delta);
  StreamPivots pivots{seeds, rng};
  LimitSample s = accumulate_limit_cost(std::ref(pivots), src, cost, alpha, policy);
  out.limit_value = s.value;
  out.truncated = out.truncated || s.flagged;
  return out;
}

}  // namespace

CoupledSample coupled_run(std::uint64_t master, std::uint64_t rep, const SourceModel& src,
                          const CostModel& cost, double alpha, std::size_t n, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("truncation bound must be positive");
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  RngStream rng = RngStream::derive(master, rep);
  std::vector<double> seeds = draw_seed_array(rng, n);
  std::uint64_t ss = stream_seed_for(master, rep);

  CoupledSample out;
  RunRecord rv = run_quickval(src, cost, seeds, alpha, ss);
  RunRecord rq = run_quickquant(src, cost, seeds, quantile_rank(alpha, n), ss);
  out.quickval_avg = rv.total_cost / double(n);
  out.quickquant_avg = rq.total_cost / double(n);

  TruncationPolicy policy = make_truncation_policy(src, cost, delta);
  StreamPivots pivots{seeds, rng};
  out.limit = accumulate_limit_cost(std::ref(pivots), src, cost, alpha, policy);
  out.truncated = rv.truncated || rq.truncated || out.limit.flagged;
  return out;
}

void ExperimentConfig::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("n grid must be nonempty");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
    throw std::invalid_argument("n grid must be strictly increasing");
  if (n_grid.front() == 0) throw std::invalid_argument("n grid values must be >= 1");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  for (double p : p_values)
    if (!(p >= 1.0)) throw std::invalid_argument("p values must be >= 1");
  if (p_values.empty()) throw std::invalid_argument("at least one p value required");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(alpha >= 0.0) || !(alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

ConvergenceReport convergence_experiment(const SourceModel& src, const CostModel& cost,
                                         const ExperimentConfig& config) {
  config.validate();
  std::size_t reps = config.reps;
  std::vector<RepOutcome> outcomes(reps);

  auto work = [&](std::size_t t, std::size_t nthreads) {
    for (std::size_t r = t; r < reps; r += nthreads)
      outcomes[r] = run_replication(config.master_seed, r, src, cost, config.alpha,
                                    config.n_grid, config.delta);
  };
  std::size_t nthreads = std::min<std::size_t>(std::size_t(config.threads), reps);
  if (nthreads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
    for (auto& th : pool) th.join();
  }

  ConvergenceReport report;
  for (const auto& o : outcomes) report.any_truncated = report.any_truncated || o.truncated;

  // Fixed accumulation order: n, then algorithm, then p, then replication.
  for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
    for (int algo = 0; algo < 2; ++algo) {
      for (double p : config.p_values) {
        long double sum = 0.0, sumsq = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          const RepOutcome& o = outcomes[r];
          double avg = algo == 0 ? o.quickval_avg[gi] : o.quickquant_avg[gi];
          double x = std::pow(std::fabs(avg - o.limit_value), p);
          sum += x;
          sumsq += (long double)(x) * x;
        }
        ConvergenceEstimate e;
        e.n = config.n_grid[gi];
        e.algo = algo == 0 ? "quickval" : "quickquant";
        e.p = p;
        e.estimate = double(sum / reps);
        double var = double(sumsq / reps) - e.estimate * e.estimate;
        e.stderr_ = reps > 1 ? std::sqrt(std::max(0.0, var) / double(reps)) : 0.0;
        report.estimates.push_back(e);
      }
    }
  }

  std::size_t npaths = std::min<std::size_t>(config.paths, reps);
  for (std::size_t pid = 0; pid < npaths; ++pid)
    for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi)
      report.paths.push_back(
          {pid, config.n_grid[gi],
           std::fabs(outcomes[pid].quickval_avg[gi] - outcomes[pid].limit_value)});
  return report;
}

KsResult distribution_compare(std::span<const double> a, std::span<const double> b, double level) {
  if (a.empty() || b.empty()) throw std::invalid_argument("samples must be nonempty");
  if (a.size() < 1000 || b.size() < 1000)
    throw std::invalid_argument("need at least 1000 samples per side");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(double(i) / x.size() - double(j) / y.size()));
  }

  double ne = double(x.size()) * double(y.size()) / double(x.size() + y.size());
  double lambda = d * std::sqrt(ne);
  double p = 1.0;
  if (lambda > 0.2) {
    long double acc = 0.0;
    for (int k = 1; k <= 100; ++k) {
      long double term = std::exp(-2.0 * k * k * lambda * lambda);
      acc += (k % 2 == 1) ? term : -term;
      if (term < 1e-18) break;
    }
    p = std::min(1.0, std::max(0.0, 2.0 * double(acc)));
  }

  KsResult r;
  r.statistic = d;
  r.p_value = p;
  r.level = level;
  r.accept = p > level;
  r.n1 = x.size();
  r.n2 = y.size();
  return r;
}

std::vector<MomentRow> moment_report(std::span<const double> samples,
                                     std::span<const int> orders) {
  if (samples.empty()) throw std::invalid_argument("samples must be nonempty");
  for (int r : orders)
    if (r < 1 || r > 4) throw std::invalid_argument("moment orders must lie in 1..4");
  std::vector<MomentRow> rows;
  rows.reserve(orders.size());
  for (int r : orders) {
    long double sum = 0.0, sumsq = 0.0;
    for (double v : samples) {
      long double x = std::pow(v, r);
      sum += x;
      sumsq += x * x;
    }
    MomentRow row;
    row.order = r;
    row.mean = double(sum / samples.size());
    double var = double(sumsq / samples.size()) - row.mean * row.mean;
    row.stderr_ =
        samples.size() > 1 ? std::sqrt(std::max(0.0, var) / double(samples.size())) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcost
