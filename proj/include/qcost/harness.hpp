#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcost/algo.hpp"
#include "qcost/cost.hpp"
#include "qcost/limit.hpp"
#include "qcost/source.hpp"

namespace qcost {

// One replication on a shared seed stream: QuickVal and QuickQuant on the
// first n seeds, and the limit cost accumulated along the same stream's pivot
// chain (extended past n as needed).
struct CoupledSample {
  double quickval_avg = 0.0;   // S_n / n
  double quickquant_avg = 0.0;
  LimitSample limit;
  bool truncated = false;
};

CoupledSample coupled_run(std::uint64_t master, std::uint64_t rep, const SourceModel& src,
                          const CostModel& cost, double alpha, std::size_t n, double delta);

struct ExperimentConfig {
  std::string source_spec = "uniform-binary";
  std::string cost_spec = "key";
  double alpha = 0.5;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 200;
  std::vector<double> p_values = {1.0};
  double delta = 1e-3;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::size_t paths = 10;
  std::string out_dir = ".";

  void validate() const;
};

struct ConvergenceEstimate {
  std::size_t n = 0;
  std::string algo;
  double p = 1.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct PathPoint {
  std::size_t path_id = 0;
  std::size_t n = 0;
  double value = 0.0;  // |S_n/n - S| along one replication
};

struct ConvergenceReport {
  std::vector<ConvergenceEstimate> estimates;
  std::vector<PathPoint> paths;
  bool any_truncated = false;
};

// Per n in the grid, E|S_n/n - S|^p for both algorithms, all replications
// coupled on shared streams. Deterministic for fixed config regardless of
// thread count (fixed replication order in every reduction).
ConvergenceReport convergence_experiment(const SourceModel& src, const CostModel& cost,
                                         const ExperimentConfig& config);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double level = 0.01;
  bool accept = true;
  std::size_t n1 = 0, n2 = 0;
};

// Two-sample Kolmogorov-Smirnov with asymptotic p-value; requires at least
// 1000 samples per side.
KsResult distribution_compare(std::span<const double> a, std::span<const double> b,
                              double level = 0.01);

struct MomentRow {
  int order = 1;
  double mean = 0.0;
  double stderr_ = 0.0;
};

std::vector<MomentRow> moment_report(std::span<const double> samples, std::span<const int> orders);

}  // namespace qcost
