// Acceptance gate. Each criterion prints one PASS/FAIL line with the
// measured numbers; the exit code is the number of failures. With arguments,
// only the listed criterion numbers run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qcost/algo.hpp"
#include "qcost/expectation.hpp"
#include "qcost/harness.hpp"
#include "qcost/limit.hpp"

using namespace qcost;

namespace {

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Stats stats_of(std::span<const double> xs) {
  long double s = 0.0;
  for (double x : xs) s += x;
  double mean = double(s / xs.size());
  long double v = 0.0;
  for (double x : xs) v += (x - mean) * (x - mean);
  double sd = xs.size() > 1 ? std::sqrt(double(v / (xs.size() - 1))) : 0.0;
  return {mean, sd / std::sqrt(double(xs.size()))};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool check_line(std::string& out, bool ok, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  out += buf;
  return ok;
}

SourceModel uniform_binary() { return SourceModel::memoryless({0.5, 0.5}); }
SourceModel bernoulli03() { return SourceModel::memoryless({0.3, 0.7}); }

// 1. Mean key-comparison cost of the minimum-selection limit is 2 within 1%.
bool quickmin_key_mean(std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  TruncationPolicy policy = make_truncation_policy(ub, key, 1e-6);
  long double sum = 0.0;
  const std::size_t reps = 100000;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(101, rep);
    sum += sample_S(rng, ub, key, 0.0, policy).value;
  }
  double mean = double(sum / reps);
  double secs = seconds_since(t0);
  bool ok = std::fabs(mean - 2.0) <= 0.02 && secs < 10.0;
  return check_line(out, ok, "mean=%.5f |mean-2|=%.2e (limit 2e-2), %.1fs (limit 10s)", mean,
                    std::fabs(mean - 2.0), secs);
}

// 2. Key-cost integral evaluator matches 2[1 - a ln a - (1-a) ln(1-a)].
bool key_integral_matches_closed(std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  double worst = 0.0;
  for (int i = 0; i <= 10; ++i) {
    double alpha = i / 10.0;
    ExpectationResult r = expected_S_integral(ub, key, alpha, 1e-8);
    worst = std::max(worst, std::fabs(r.value - expected_key_closed(alpha)));
  }
  double secs = seconds_since(t0);
  bool ok = worst <= 1e-6 && secs < 60.0;
  return check_line(out, ok, "worst |integral-closed|=%.2e (limit 1e-6), %.1fs (limit 60s)",
                    worst, secs);
}

// 3. Symbol-cost series at alpha=0 on the uniform binary source.
bool uniform_binary_symbol_constant(std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  ExpectationResult r = expected_S_series(uniform_binary(), 0.0, 1e-4);
  double secs = seconds_since(t0);
  bool ok = std::fabs(r.value - 5.27938) <= 1e-3 && !r.flagged && secs < 60.0;
  return check_line(out, ok, "series=%.6f |series-5.27938|=%.2e (limit 1e-3), %.1fs (limit 60s)",
                    r.value, std::fabs(r.value - 5.27938), secs);
}

// 4. Quantile-averaged slopes: 3 for key cost, 8.20731 for symbol cost.
bool quickrand_slopes(std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  SourceModel ub = uniform_binary();
  ExpectationResult key = expected_quickrand(ub, CostModel::key(), 8192);
  ExpectationResult symb = expected_quickrand(ub, CostModel::symbol(), 64, 1e-4);
  double secs = seconds_since(t0);
  double dk = std::fabs(key.value - 3.0);
  double ds = std::fabs(symb.value - 8.20731);
  bool ok = dk <= 1e-6 && ds <= 1e-2 && secs < 600.0;
  return check_line(out, ok,
                    "key=%.8f (|d|=%.1e, limit 1e-6), symbol=%.5f (|d|=%.1e, limit 1e-2), "
                    "%.0fs (limit 600s)",
                    key.value, dk, symb.value, ds, secs);
}

// 5. Series, integral, and Monte Carlo symbol-cost expectations agree
// pairwise within combined certified plus statistical tolerances.
bool evaluator_triangle(std::string& out) {
  struct Case {
    const char* name;
    SourceModel src;
  };
  std::vector<Case> cases = {{"uniform-binary", uniform_binary()},
                             {"bernoulli-0.3", bernoulli03()}};
  CostModel symb = CostModel::symbol();
  bool all = true;
  double worst_gap = 0.0;
  for (auto& [name, src] : cases) {
    TruncationPolicy policy = make_truncation_policy(src, symb, 1e-4);
    for (double alpha : {0.0, 0.25, 0.5}) {
      ExpectationResult s = expected_S_series(src, alpha, 1e-3);
      ExpectationResult integ = expected_S_integral(src, symb, alpha, 1e-4);
      const std::size_t reps = 100000;
      std::vector<double> vals(reps);
      long double tail = 0.0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        RngStream rng = RngStream::derive(505, rep);
        LimitSample ls = sample_S(rng, src, symb, alpha, policy);
        vals[rep] = ls.value;
        tail += ls.tail_bound;
      }
      Stats st = stats_of(vals);
      double mc_err = 3.0 * st.stderr_ + double(tail / reps);
      bool si = std::fabs(s.value - integ.value) <=
                s.error_estimate + integ.error_estimate + 1e-12;
      bool sm = std::fabs(s.value - st.mean) <= s.error_estimate + mc_err;
      bool im = std::fabs(integ.value - st.mean) <= integ.error_estimate + mc_err;
      all = all && si && sm && im;
      worst_gap = std::max({worst_gap, std::fabs(s.value - integ.value),
                            std::fabs(s.value - st.mean), std::fabs(integ.value - st.mean)});
      if (!(si && sm && im))
        check_line(out, false, "[%s a=%.2f series=%.6f integral=%.6f mc=%.6f+-%.1e] ", name,
                   alpha, s.value, integ.value, st.mean, st.stderr_);
    }
  }
  return check_line(out, all, "6 configurations x 3 pairwise agreements, worst gap %.2e",
                    worst_gap);
}

// 6. E|S_n/n - S| decreases along the n grid for both algorithms and both
// costs, and the largest-n value is below a quarter of the smallest-n value.
bool convergence_trend(std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  SourceModel ub = uniform_binary();
  bool all = true;
  for (auto cost : {CostModel::key(), CostModel::symbol()}) {
    ExperimentConfig cfg;
    cfg.source_spec = "uniform-binary";
    cfg.cost_spec = cost.variant() == CostModel::Variant::key ? "key" : "symbol";
    cfg.alpha = 0.5;
    cfg.n_grid = {64, 256, 1024, 4096, 16384};
    cfg.reps = 200;
    cfg.p_values = {1.0};
    cfg.delta = 1e-3;
    cfg.master_seed = 606;
    cfg.threads = 4;
    cfg.paths = 0;
    ConvergenceReport rep = convergence_experiment(ub, cost, cfg);
    for (const char* algo : {"quickval", "quickquant"}) {
      std::vector<double> est;
      for (const auto& e : rep.estimates)
        if (e.algo == algo) est.push_back(e.estimate);
      int inversions = 0;
      for (std::size_t i = 1; i < est.size(); ++i)
        if (est[i] >= est[i - 1]) ++inversions;
      bool ok = est.size() == cfg.n_grid.size() && inversions <= 1 &&
                est.back() < 0.25 * est.front();
      all = all && ok;
      check_line(out, true, "[%s/%s %.4f->%.4f inv=%d] ", cfg.cost_spec.c_str(), algo,
                 est.front(), est.back(), inversions);
    }
  }
  double secs = seconds_since(t0);
  all = all && secs < 1800.0;
  return check_line(out, all, "%.0fs (limit 1800s)", secs);
}

// 7. Distribution identities through two-sample KS at level 0.01.
bool distribution_identities(std::string& out) {
  SourceModel ub = uniform_binary();
  CostModel key = CostModel::key();
  TruncationPolicy policy = make_truncation_policy(ub, key, 1e-6);

  std::vector<double> a(10000), b(10000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    RngStream r1 = RngStream::derive(701, i);
    RngStream r2 = RngStream::derive(702, i);
    a[i] = sample_S(r1, ub, key, 0.0, policy).value;
    b[i] = sample_dickman(r2, 1e-6);
  }
  KsResult dickman = distribution_compare(a, b);

  const std::size_t n = 16384, reps = 2000;
  std::size_t m = quantile_rank(0.5, n);
  std::vector<double> qq(reps), lim(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RngStream r1 = RngStream::derive(703, i);
    std::vector<double> seeds = draw_seed_array(r1, n);
    qq[i] = run_quickquant(ub, key, seeds, m).total_cost / double(n);
    RngStream r2 = RngStream::derive(704, i);
    lim[i] = sample_S(r2, ub, key, 0.5, policy).value;
  }
  KsResult scaled = distribution_compare(qq, lim);

  const std::size_t small_n = 100, small_reps = 5000;
  std::vector<double> qcost(small_reps), rcost(small_reps);
  for (std::size_t i = 0; i < small_reps; ++i) {
    RngStream r1 = RngStream::derive(705, i);
    std::vector<double> seeds = draw_seed_array(r1, small_n);
    qcost[i] = run_quickquant(ub, key, seeds, 50).total_cost;
    RngStream r2 = RngStream::derive(706, i);
    std::vector<double> seeds2 = draw_seed_array(r2, small_n);
    RngStream pivot_rng = RngStream::derive(707, i);
    rcost[i] = run_quickselect_random_pivot(ub, key, seeds2, 50, pivot_rng).total_cost;
  }
  KsResult selects = distribution_compare(qcost, rcost);

  bool ok = dickman.accept && scaled.accept && selects.accept;
  return check_line(out, ok,
                    "dickman KS=%.4f p=%.3f; scaled-cost KS=%.4f p=%.3f; "
                    "select KS=%.4f p=%.3f (all accept at 0.01)",
                    dickman.statistic, dickman.p_value, scaled.statistic, scaled.p_value,
                    selects.statistic, selects.p_value);
}

// 8. Occupation measure of the pivot chain: Monte Carlo versus the closed
// density 2 (y-x)^-2 on interior rectangles, and the k-step marginals.
bool nu_measure(std::string& out) {
  double alpha = 0.5;
  std::vector<Rect> rects = {{0.05, 0.15, 0.60, 0.80},
                             {0.20, 0.30, 0.55, 0.70},
                             {0.10, 0.40, 0.52, 0.95},
                             {0.35, 0.45, 0.60, 0.75},
                             {0.05, 0.45, 0.55, 0.95}};
  bool all = true;
  double worst_sig = 0.0;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    RngStream rng = RngStream::derive(801, i);
    McEstimate mc = nu_mc(rng, alpha, rects[i], 100000);
    double closed = nu_closed(alpha, rects[i]);
    double gap = std::fabs(mc.mean - closed);
    double lim = 3.0 * mc.stderr_ + 1e-4;
    all = all && gap <= lim;
    worst_sig = std::max(worst_sig, gap / (mc.stderr_ + 1e-12));
  }
  for (int k = 1; k <= 4; ++k) {
    RngStream rf = RngStream::derive(802, std::uint64_t(k));
    RngStream rg = RngStream::derive(803, std::uint64_t(k));
    McEstimate f = chain_marginal_f_mc(rf, k, 0.10, 0.30, alpha, 100000);
    McEstimate g = chain_marginal_g_mc(rg, k, 0.60, 0.90, alpha, 100000);
    double fc = chain_marginal_f_integral(k, 0.10, 0.30, alpha);
    double gc = chain_marginal_g_integral(k, 0.60, 0.90, alpha);
    bool okf = std::fabs(f.mean - fc) <= 3.0 * f.stderr_ + 1e-4;
    bool okg = std::fabs(g.mean - gc) <= 3.0 * g.stderr_ + 1e-4;
    all = all && okf && okg;
    worst_sig = std::max({worst_sig, std::fabs(f.mean - fc) / (f.stderr_ + 1e-12),
                          std::fabs(g.mean - gc) / (g.stderr_ + 1e-12)});
  }
  return check_line(out, all, "5 rectangles + 8 marginal windows, worst %.2f sigma (limit 3)",
                    worst_sig);
}

// 9. Interval-width and cost-integral moment bounds along the pivot chain.
bool lemma_bounds(std::string& out) {
  SourceModel ub = uniform_binary();
  CostModel symb = CostModel::symbol();
  double alpha = 0.5;
  const std::size_t reps = 20000;
  const int kmax = 10;

  std::vector<PivotChain> chains(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RngStream rng = RngStream::derive(901, i);
    chains[i] = sample_pivot_chain(rng, alpha, kmax);
  }

  bool all = true;
  double worst_margin = -1e9;
  for (double p : {1.0, 2.0, 4.0}) {
    for (int k = 1; k <= kmax; ++k) {
      std::vector<double> xs(reps);
      for (std::size_t i = 0; i < reps; ++i) {
        const PivotStep& st = chains[i].steps[k - 1];
        xs[i] = std::pow(st.hi - st.lo, p);
      }
      Stats st = stats_of(xs);
      double bound = std::pow((2.0 - std::pow(2.0, -p)) / (p + 1.0), k);
      double margin = st.mean - 3.0 * st.stderr_ - bound;
      all = all && margin <= 0.0;
      worst_margin = std::max(worst_margin, margin / bound);
    }
  }

  TameParams tame = symb.tame_params(ub);
  const std::size_t ireps = 4000;
  for (double q : {1.0, 4.0}) {
    double head = std::pow(std::pow(2.0, tame.epsilon) * tame.c / (1.0 - tame.epsilon), q);
    double ratio = (2.0 - std::pow(2.0, -q * (1.0 - tame.epsilon))) /
                   (q * (1.0 - tame.epsilon) + 1.0);
    for (int k = 1; k <= kmax; ++k) {
      std::vector<double> xs(ireps);
      for (std::size_t i = 0; i < ireps; ++i) {
        const PivotChain& ch = chains[i];
        double lo = k == 1 ? 0.0 : ch.steps[k - 2].lo;
        double hi = k == 1 ? 1.0 : ch.steps[k - 2].hi;
        double ik = integral_I(ub, symb, 1.0, ch.steps[k - 1].pivot, lo, hi, 1e-9);
        xs[i] = std::pow(ik, q);
      }
      Stats st = stats_of(xs);
      double bound = head * std::pow(ratio, k - 1);
      double margin = st.mean - 3.0 * st.stderr_ - bound;
      all = all && margin <= 0.0;
      worst_margin = std::max(worst_margin, margin / bound);
    }
  }
  return check_line(out, all, "width moments p in {1,2,4}, cost moments q in {1,4}, k <= 10; "
                              "worst relative margin %.2e (limit 0)",
                    worst_margin);
}

// 10. Bit-identical outputs for repeated multi-threaded harness runs.
bool determinism(std::string& out) {
  SourceModel ub = uniform_binary();
  CostModel symb = CostModel::symbol();
  ExperimentConfig cfg;
  cfg.source_spec = "uniform-binary";
  cfg.cost_spec = "symbol";
  cfg.alpha = 0.5;
  cfg.n_grid = {64, 256, 1024};
  cfg.reps = 64;
  cfg.p_values = {1.0, 2.0};
  cfg.delta = 1e-3;
  cfg.master_seed = 1001;
  cfg.threads = 4;
  cfg.paths = 5;

  auto render = [&]() {
    ConvergenceReport rep = convergence_experiment(ub, symb, cfg);
    std::string s;
    char buf[160];
    for (const auto& e : rep.estimates) {
      snprintf(buf, sizeof buf, "%zu %s %.17g %.17g %.17g\n", e.n, e.algo.c_str(), e.p,
               e.estimate, e.stderr_);
      s += buf;
    }
    for (const auto& p : rep.paths) {
      snprintf(buf, sizeof buf, "%zu %zu %.17g\n", p.path_id, p.n, p.value);
      s += buf;
    }
    return s;
  };
  std::string first = render();
  std::string second = render();
  cfg.threads = 1;
  std::string serial = render();
  bool ok = !first.empty() && first == second && first == serial;
  return check_line(out, ok, "two 4-thread runs %s, 1-thread run %s (%zu bytes)",
                    first == second ? "identical" : "DIFFER",
                    first == serial ? "identical" : "DIFFER", first.size());
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "quickmin-key-mean", quickmin_key_mean},
    {2, "key-integral-matches-closed", key_integral_matches_closed},
    {3, "uniform-binary-symbol-constant", uniform_binary_symbol_constant},
    {4, "quickrand-slopes", quickrand_slopes},
    {5, "evaluator-triangle", evaluator_triangle},
    {6, "convergence-trend", convergence_trend},
    {7, "distribution-identities", distribution_identities},
    {8, "nu-measure", nu_measure},
    {9, "lemma-bounds", lemma_bounds},
    {10, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail += std::string("exception: ") + e.what();
    }
    printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.name, detail.c_str());
    fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
