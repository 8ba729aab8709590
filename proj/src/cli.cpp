#include "qcost/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcost/algo.hpp"
#include "qcost/expectation.hpp"
#include "qcost/harness.hpp"
#include "qcost/limit.hpp"
#include "qcost/rng.hpp"
#include "qcost/source.hpp"
#include "qcost/spec_parse.hpp"

namespace qcost {
namespace {

using json = nlohmann::ordered_json;
using ConfigItems = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Output sink: file when --out is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_config_block(std::ostream& os, const ConfigItems& items) {
  for (const auto& [k, v] : items) os << "# " << k << "=" << v << "\n";
}

json config_json(const ConfigItems& items) {
  json cfg = json::object();
  for (const auto& [k, v] : items) cfg[k] = v;
  return cfg;
}

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int verbosity = 0;
};

void add_common(CLI::App* cmd, GlobalOptions& g, bool with_format = true) {
  cmd->add_option("--seed", g.seed, "Master RNG seed (fixed default, never time-based)")
      ->capture_default_str();
  cmd->add_option("--out", g.out, "Output path ('-' or absent: stdout)");
  if (with_format) {
    cmd->add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }
  cmd->add_flag("-v,--verbose", [&g](std::int64_t n) { g.verbosity = static_cast<int>(n); },
                "Increase verbosity (progress notes on stderr)");
}

// ---------------------------------------------------------------- source --

struct InspectArgs {
  std::string source = "uniform-binary";
  int depth = 8;
  GlobalOptions g;
};

void run_source_inspect(const InspectArgs& a) {
  const SourceModel src = parse_source_spec(a.source);
  if (a.depth < 0) throw std::invalid_argument("--depth must be >= 0");
  const PiDecay decay = src.pi_decay();
  const TameParams tame = src.symb_tame_params();

  ConfigItems cfg{{"command", "source inspect"},
                  {"source", a.source},
                  {"resolved", src.describe()},
                  {"alphabet_size", std::to_string(src.alphabet_size())},
                  {"p_max", fmt(src.p_max())},
                  {"depth", std::to_string(a.depth)},
                  {"format", a.g.format}};

  Sink sink(a.g.out);
  std::ostream& os = sink.stream();
  if (a.g.format == "json") {
    json out;
    out["config"] = config_json(cfg);
    out["decay"] = {{"geometric", decay.geometric},
                    {"rate", decay.rate},
                    {"gamma", decay.gamma},
                    {"amplitude", decay.amplitude}};
    out["tame"] = {{"epsilon", tame.epsilon},
                   {"c", tame.c},
                   {"warn_slow_as_convergence", tame.warn_slow_as_convergence},
                   {"warn_divergent", tame.warn_divergent}};
    json pis = json::array();
    for (int k = 0; k <= a.depth; ++k) pis.push_back(src.pi_k(static_cast<std::uint32_t>(k)));
    out["pi_k"] = pis;
    os << out.dump(2) << "\n";
  } else {
    write_config_block(os, cfg);
    os << "# decay_geometric=" << (decay.geometric ? 1 : 0) << "\n";
    os << "# decay_rate=" << fmt(decay.rate) << "\n";
    os << "# decay_gamma=" << fmt(decay.gamma) << "\n";
    os << "# decay_amplitude=" << fmt(decay.amplitude) << "\n";
    os << "# tame_epsilon=" << fmt(tame.epsilon) << "\n";
    os << "# tame_c=" << fmt(tame.c) << "\n";
    os << "k,pi_k\n";
    for (int k = 0; k <= a.depth; ++k) {
      os << k << "," << fmt(src.pi_k(static_cast<std::uint32_t>(k))) << "\n";
    }
  }
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string algo;
  std::size_t n = 0;
  std::optional<double> alpha;
  std::optional<std::size_t> m;
  std::string source = "uniform-binary";
  std::string cost = "key";
  std::size_t reps = 1;
  GlobalOptions g;
};

void run_simulate(const SimulateArgs& a) {
  if (a.n < 1) throw std::invalid_argument("--n must be >= 1");
  if (a.reps < 1) throw std::invalid_argument("--reps must be >= 1");
  if (!a.alpha && !a.m) throw std::invalid_argument("one of --alpha or --m is required");
  if (a.alpha && a.m) throw std::invalid_argument("--alpha and --m are mutually exclusive");
  if (a.algo == "quickval" && !a.alpha) {
    throw std::invalid_argument("quickval takes --alpha, not --m");
  }
  const SourceModel src = parse_source_spec(a.source);
  const CostModel cost = parse_cost_spec(a.cost);
  const std::size_t m = a.m ? *a.m : (a.algo == "quickval" ? 0 : quantile_rank(*a.alpha, a.n));
  if (a.m && (*a.m < 1 || *a.m > a.n)) {
    throw std::invalid_argument("--m must lie in [1, n]");
  }

  ConfigItems cfg{{"command", "simulate"},
                  {"algo", a.algo},
                  {"n", std::to_string(a.n)},
                  {"alpha_or_m", a.algo == "quickval" ? fmt(*a.alpha)
                                                      : std::to_string(m)},
                  {"source", a.source},
                  {"cost", a.cost},
                  {"reps", std::to_string(a.reps)},
                  {"seed", std::to_string(a.g.seed)}};

  std::vector<RunRecord> records;
  records.reserve(a.reps);
  for (std::size_t rep = 0; rep < a.reps; ++rep) {
    RngStream rng = RngStream::derive(a.g.seed, rep);
    const std::vector<double> seeds = draw_seed_array(rng, a.n);
    const std::uint64_t stream_seed = rng.next_u64();
    if (a.algo == "quickval") {
      records.push_back(run_quickval(src, cost, seeds, *a.alpha, stream_seed));
    } else if (a.algo == "quickquant") {
      records.push_back(run_quickquant(src, cost, seeds, m, stream_seed));
    } else {
      records.push_back(run_quickselect_random_pivot(src, cost, seeds, m, rng, stream_seed));
    }
  }

  Sink sink(a.g.out);
  std::ostream& os = sink.stream();
  auto alpha_or_m = [&](const RunRecord& r) {
    return a.algo == "quickval" ? fmt(r.alpha) : std::to_string(r.m);
  };
  if (a.g.format == "json") {
    json out;
    out["config"] = config_json(cfg);
    json rows = json::array();
    for (std::size_t rep = 0; rep < records.size(); ++rep) {
      const RunRecord& r = records[rep];
      rows.push_back({{"rep", rep},
                      {"n", r.n},
                      {"alpha_or_m", alpha_or_m(r)},
                      {"algo", r.algorithm},
                      {"cost_model", a.cost},
                      {"total_cost", r.total_cost},
                      {"pivots", r.pivots},
                      {"truncation_flag", r.truncated ? 1 : 0}});
    }
    out["rows"] = rows;
    os << out.dump(2) << "\n";
  } else {
    write_config_block(os, cfg);
    os << "rep,n,alpha_or_m,algo,cost_model,total_cost,pivots,truncation_flag\n";
    for (std::size_t rep = 0; rep < records.size(); ++rep) {
      const RunRecord& r = records[rep];
      os << rep << "," << r.n << "," << alpha_or_m(r) << "," << r.algorithm << "," << a.cost
         << "," << fmt(r.total_cost) << "," << r.pivots << "," << (r.truncated ? 1 : 0) << "\n";
    }
  }
}

// ----------------------------------------------------------- sample-limit --

struct SampleLimitArgs {
  double alpha = 0.5;
  std::string source = "uniform-binary";
  std::string cost = "key";
  std::size_t reps = 1000;
  double delta = 1e-3;
  int max_depth = 400;
  GlobalOptions g;
};

void run_sample_limit(const SampleLimitArgs& a) {
  if (a.reps < 1) throw std::invalid_argument("--reps must be >= 1");
  const SourceModel src = parse_source_spec(a.source);
  const CostModel cost = parse_cost_spec(a.cost);
  const TruncationPolicy policy = make_truncation_policy(src, cost, a.delta, a.max_depth);

  ConfigItems cfg{{"command", "sample-limit"}, {"alpha", fmt(a.alpha)},
                  {"source", a.source},       {"cost", a.cost},
                  {"reps", std::to_string(a.reps)},
                  {"delta", fmt(a.delta)},    {"max_depth", std::to_string(a.max_depth)},
                  {"seed", std::to_string(a.g.seed)}};

  std::vector<LimitSample> samples;
  samples.reserve(a.reps);
  for (std::size_t rep = 0; rep < a.reps; ++rep) {
    RngStream rng = RngStream::derive(a.g.seed, rep);
    samples.push_back(sample_S(rng, src, cost, a.alpha, policy));
  }

  Sink sink(a.g.out);
  std::ostream& os = sink.stream();
  if (a.g.format == "json") {
    json out;
    out["config"] = config_json(cfg);
    json rows = json::array();
    for (std::size_t rep = 0; rep < samples.size(); ++rep) {
      const LimitSample& s = samples[rep];
      rows.push_back({{"rep", rep},
                      {"value", s.value},
                      {"tail_bound", s.tail_bound},
                      {"depth", s.depth}});
    }
    out["rows"] = rows;
    os << out.dump(2) << "\n";
  } else {
    write_config_block(os, cfg);
    os << "rep,value,tail_bound,depth\n";
    for (std::size_t rep = 0; rep < samples.size(); ++rep) {
      const LimitSample& s = samples[rep];
      os << rep << "," << fmt(s.value) << "," << fmt(s.tail_bound) << "," << s.depth << "\n";
    }
  }
}

// ---------------------------------------------------------------- expect --

struct ExpectArgs {
  std::string method;
  std::string source = "uniform-binary";
  std::string cost = "key";
  double alpha = 0.5;
  double tol = 1e-6;
  std::size_t max_terms = 100000000;
  std::size_t reps = 100000;
  double delta = 1e-3;
  GlobalOptions g;
};

struct QuickrandArgs {
  std::string source = "uniform-binary";
  std::string cost = "key";
  std::size_t panels = 256;
  double inner_tol = 1e-6;
  GlobalOptions g;
};

void emit_expectation(const ExpectationResult& r, const ConfigItems& cfg, const GlobalOptions& g) {
  Sink sink(g.out);
  std::ostream& os = sink.stream();
  if (g.format == "csv") {
    write_config_block(os, cfg);
    os << "value,method,error_estimate,terms,flagged\n";
    os << fmt(r.value) << "," << r.method << "," << fmt(r.error_estimate) << "," << r.terms << ","
       << (r.flagged ? 1 : 0) << "\n";
  } else {
    json out;
    out["value"] = r.value;
    out["method"] = r.method;
    out["error_estimate"] = r.error_estimate;
    out["terms"] = r.terms;
    out["flagged"] = r.flagged;
    out["config"] = config_json(cfg);
    os << out.dump(2) << "\n";
  }
}

void run_expect(const ExpectArgs& a) {
  const SourceModel src = parse_source_spec(a.source);
  const CostModel cost = parse_cost_spec(a.cost);

  ConfigItems cfg{{"command", "expect"},   {"method", a.method}, {"source", a.source},
                  {"cost", a.cost},        {"alpha", fmt(a.alpha)}, {"tol", fmt(a.tol)}};

  ExpectationResult result;
  if (a.method == "closed") {
    if (cost.variant() != CostModel::Variant::key) {
      throw std::invalid_argument("--method closed requires --cost key");
    }
    result.value = expected_key_closed(a.alpha);
    result.method = "closed";
    result.error_estimate = 0.0;
    result.terms = 0;
  } else if (a.method == "series") {
    if (cost.variant() != CostModel::Variant::symbol) {
      throw std::invalid_argument("--method series requires --cost symbol");
    }
    result = expected_S_series(src, a.alpha, a.tol, a.max_terms);
  } else if (a.method == "integral") {
    result = expected_S_integral(src, cost, a.alpha, a.tol);
  } else {  // mc
    if (a.reps < 1) throw std::invalid_argument("--reps must be >= 1");
    cfg.emplace_back("reps", std::to_string(a.reps));
    cfg.emplace_back("delta", fmt(a.delta));
    cfg.emplace_back("seed", std::to_string(a.g.seed));
    const TruncationPolicy policy = make_truncation_policy(src, cost, a.delta, 400);
    double sum = 0.0, sumsq = 0.0;
    bool flagged = false;
    for (std::size_t rep = 0; rep < a.reps; ++rep) {
      RngStream rng = RngStream::derive(a.g.seed, rep);
      const LimitSample s = sample_S(rng, src, cost, a.alpha, policy);
      sum += s.value;
      sumsq += s.value * s.value;
      flagged = flagged || s.flagged;
    }
    const double mean = sum / static_cast<double>(a.reps);
    const double var =
        a.reps > 1 ? std::max(0.0, (sumsq - sum * mean) / static_cast<double>(a.reps - 1)) : 0.0;
    result.value = mean;
    result.method = "mc";
    result.error_estimate = std::sqrt(var / static_cast<double>(a.reps));
    result.terms = a.reps;
    result.flagged = flagged;
  }
  emit_expectation(result, cfg, a.g);
}

void run_quickrand(const QuickrandArgs& a) {
  if (a.panels < 1) throw std::invalid_argument("--panels must be >= 1");
  const SourceModel src = parse_source_spec(a.source);
  const CostModel cost = parse_cost_spec(a.cost);
  ConfigItems cfg{{"command", "expect quickrand"},
                  {"source", a.source},
                  {"cost", a.cost},
                  {"panels", std::to_string(a.panels)},
                  {"inner_tol", fmt(a.inner_tol)}};
  emit_expectation(expected_quickrand(src, cost, a.panels, a.inner_tol), cfg, a.g);
}

// -------------------------------------------------------------- converge --

struct ConvergeArgs {
  std::string config_path;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
};

void run_converge(const ConvergeArgs& a) {
  ExperimentConfig cfg = parse_experiment_config(a.config_path);
  if (a.threads) cfg.threads = *a.threads;
  if (a.out_dir) cfg.out_dir = *a.out_dir;
  if (a.seed) cfg.master_seed = *a.seed;
  cfg.validate();

  const SourceModel src = parse_source_spec(cfg.source_spec);
  const CostModel cost = parse_cost_spec(cfg.cost_spec);
  const ConvergenceReport report = convergence_experiment(src, cost, cfg);

  std::filesystem::create_directories(cfg.out_dir);
  ConfigItems items{{"command", "converge"},
                    {"source", cfg.source_spec},
                    {"cost", cfg.cost_spec},
                    {"alpha", fmt(cfg.alpha)}};
  {
    std::string grid;
    for (std::size_t n : cfg.n_grid) grid += (grid.empty() ? "" : " ") + std::to_string(n);
    items.emplace_back("n_grid", grid);
  }
  {
    std::string ps;
    for (double p : cfg.p_values) ps += (ps.empty() ? "" : " ") + fmt(p);
    items.emplace_back("p_values", ps);
  }
  items.emplace_back("reps", std::to_string(cfg.reps));
  items.emplace_back("delta", fmt(cfg.delta));
  items.emplace_back("seed", std::to_string(cfg.master_seed));
  items.emplace_back("threads", std::to_string(cfg.threads));
  items.emplace_back("paths", std::to_string(cfg.paths));
  items.emplace_back("any_truncated", report.any_truncated ? "1" : "0");

  const std::filesystem::path dir(cfg.out_dir);
  {
    std::ofstream os(dir / "report.csv");
    if (!os) throw std::runtime_error("cannot write " + (dir / "report.csv").string());
    write_config_block(os, items);
    os << "n,algo,p,estimate,stderr\n";
    for (const ConvergenceEstimate& e : report.estimates) {
      os << e.n << "," << e.algo << "," << fmt(e.p) << "," << fmt(e.estimate) << ","
         << fmt(e.stderr_) << "\n";
    }
  }
  {
    std::ofstream os(dir / "paths.csv");
    if (!os) throw std::runtime_error("cannot write " + (dir / "paths.csv").string());
    write_config_block(os, items);
    os << "path_id,n,value\n";
    for (const PathPoint& p : report.paths) {
      os << p.path_id << "," << p.n << "," << fmt(p.value) << "\n";
    }
  }
  if (a.verbosity > 0) {
    std::cerr << "wrote " << (dir / "report.csv").string() << " and "
              << (dir / "paths.csv").string() << "\n";
  }
}

// --------------------------------------------------------------- nu-check --

struct NuCheckArgs {
  double alpha = 0.5;
  std::string rect;
  std::size_t reps = 100000;
  GlobalOptions g;
};

void run_nu_check(const NuCheckArgs& a) {
  const Rect rect = parse_rect(a.rect);
  const double closed = nu_closed(a.alpha, rect);
  RngStream rng(a.g.seed);
  const McEstimate mc = nu_mc(rng, a.alpha, rect, a.reps);
  const double z = mc.stderr_ > 0.0 ? (mc.mean - closed) / mc.stderr_ : 0.0;

  ConfigItems cfg{{"command", "nu-check"}, {"alpha", fmt(a.alpha)},
                  {"rect", a.rect},        {"reps", std::to_string(a.reps)},
                  {"seed", std::to_string(a.g.seed)}};

  Sink sink(a.g.out);
  std::ostream& os = sink.stream();
  if (a.g.format == "csv") {
    write_config_block(os, cfg);
    os << "closed,mc_mean,mc_stderr,z\n";
    os << fmt(closed) << "," << fmt(mc.mean) << "," << fmt(mc.stderr_) << "," << fmt(z) << "\n";
  } else {
    json out;
    out["closed"] = closed;
    out["mc_mean"] = mc.mean;
    out["mc_stderr"] = mc.stderr_;
    out["z"] = z;
    out["config"] = config_json(cfg);
    os << out.dump(2) << "\n";
  }
}

// ---------------------------------------------------------------- dickman --

struct DickmanArgs {
  std::size_t reps = 10000;
  double delta = 1e-9;
  GlobalOptions g;
};

void run_dickman(const DickmanArgs& a) {
  if (a.reps < 1) throw std::invalid_argument("--reps must be >= 1");
  if (!(a.delta > 0.0)) throw std::invalid_argument("--delta must be positive");
  ConfigItems cfg{{"command", "dickman"},
                  {"reps", std::to_string(a.reps)},
                  {"delta", fmt(a.delta)},
                  {"seed", std::to_string(a.g.seed)}};

  Sink sink(a.g.out);
  std::ostream& os = sink.stream();
  if (a.g.format == "json") {
    json out;
    out["config"] = config_json(cfg);
    json rows = json::array();
    for (std::size_t rep = 0; rep < a.reps; ++rep) {
      RngStream rng = RngStream::derive(a.g.seed, rep);
      rows.push_back({{"rep", rep}, {"value", sample_dickman(rng, a.delta)}});
    }
    out["rows"] = rows;
    os << out.dump(2) << "\n";
  } else {
    write_config_block(os, cfg);
    os << "rep,value\n";
    for (std::size_t rep = 0; rep < a.reps; ++rep) {
      RngStream rng = RngStream::derive(a.g.seed, rep);
      os << rep << "," << fmt(sample_dickman(rng, a.delta)) << "\n";
    }
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Comparison-cost analysis of QuickSelect over probabilistic word sources"};
  app.require_subcommand(1);

  auto inspect = std::make_shared<InspectArgs>();
  auto sim = std::make_shared<SimulateArgs>();
  auto slim = std::make_shared<SampleLimitArgs>();
  auto exp = std::make_shared<ExpectArgs>();
  auto qr = std::make_shared<QuickrandArgs>();
  auto conv = std::make_shared<ConvergeArgs>();
  auto nu = std::make_shared<NuCheckArgs>();
  auto dick = std::make_shared<DickmanArgs>();

  {
    CLI::App* source = app.add_subcommand("source", "Source model utilities");
    source->require_subcommand(1);
    CLI::App* cmd = source->add_subcommand("inspect", "Describe a resolved source model");
    cmd->add_option("--source", inspect->source, "Source spec or definition file")
        ->capture_default_str();
    cmd->add_option("--depth", inspect->depth, "Largest k in the pi_k table")
        ->capture_default_str();
    inspect->g.format = "json";
    add_common(cmd, inspect->g);
    cmd->callback([inspect] { run_source_inspect(*inspect); });
  }
  {
    CLI::App* cmd = app.add_subcommand("simulate", "Run instrumented selection algorithms");
    cmd->add_option("--algo", sim->algo, "quickval | quickquant | qs-random")
        ->required()
        ->check(CLI::IsMember({"quickval", "quickquant", "qs-random"}));
    cmd->add_option("--n", sim->n, "Number of keys")->required();
    cmd->add_option("--alpha", sim->alpha, "Target quantile in [0,1]");
    cmd->add_option("--m", sim->m, "Target rank in [1,n]");
    cmd->add_option("--source", sim->source, "Source spec")->capture_default_str();
    cmd->add_option("--cost", sim->cost, "Cost spec")->capture_default_str();
    cmd->add_option("--reps", sim->reps, "Replications")->capture_default_str();
    add_common(cmd, sim->g);
    cmd->callback([sim] { run_simulate(*sim); });
  }
  {
    CLI::App* cmd = app.add_subcommand("sample-limit", "Draw the limiting cost S by Monte Carlo");
    cmd->add_option("--alpha", slim->alpha, "Target quantile in [0,1]")->required();
    cmd->add_option("--source", slim->source, "Source spec")->capture_default_str();
    cmd->add_option("--cost", slim->cost, "Cost spec")->capture_default_str();
    cmd->add_option("--reps", slim->reps, "Replications")->capture_default_str();
    cmd->add_option("--delta", slim->delta, "Certified tail-bound target per draw")
        ->capture_default_str();
    cmd->add_option("--max-depth", slim->max_depth, "Pivot chain depth cap")
        ->capture_default_str();
    add_common(cmd, slim->g);
    cmd->callback([slim] { run_sample_limit(*slim); });
  }
  {
    CLI::App* cmd = app.add_subcommand("expect", "Evaluate E S");
    cmd->add_option("--method", exp->method, "closed | series | integral | mc")
        ->check(CLI::IsMember({"closed", "series", "integral", "mc"}));
    cmd->add_option("--source", exp->source, "Source spec")->capture_default_str();
    cmd->add_option("--cost", exp->cost, "Cost spec")->capture_default_str();
    cmd->add_option("--alpha", exp->alpha, "Target quantile in [0,1]")->capture_default_str();
    cmd->add_option("--tol", exp->tol, "Certified error budget")->capture_default_str();
    cmd->add_option("--max-terms", exp->max_terms, "Prefix cap for --method series")
        ->capture_default_str();
    cmd->add_option("--reps", exp->reps, "Monte Carlo replications (--method mc)")
        ->capture_default_str();
    cmd->add_option("--delta", exp->delta, "Per-draw tail target (--method mc)")
        ->capture_default_str();
    exp->g.format = "json";
    add_common(cmd, exp->g);

    CLI::App* sub = cmd->add_subcommand(
        "quickrand", "Average E S over the quantile for random-rank selection");
    sub->add_option("--source", qr->source, "Source spec")->capture_default_str();
    sub->add_option("--cost", qr->cost, "Cost spec")->capture_default_str();
    sub->add_option("--panels", qr->panels, "Midpoint panels over the quantile range")
        ->capture_default_str();
    sub->add_option("--inner-tol", qr->inner_tol, "Per-panel error budget")
        ->capture_default_str();
    qr->g.format = "json";
    add_common(sub, qr->g);
    sub->callback([qr] { run_quickrand(*qr); });

    cmd->callback([exp, cmd] {
      if (cmd->get_subcommands().empty()) {
        if (exp->method.empty()) {
          throw CLI::RequiredError("--method (or the quickrand subcommand)");
        }
        run_expect(*exp);
      }
    });
  }
  {
    CLI::App* cmd = app.add_subcommand("converge", "Coupled convergence experiment");
    cmd->add_option("--config", conv->config_path, "Experiment config file")->required();
    cmd->add_option("--threads", conv->threads, "Worker threads (overrides config)");
    cmd->add_option("--out-dir", conv->out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", conv->seed, "Master seed (overrides config)");
    cmd->add_flag("-v,--verbose",
                  [conv](std::int64_t n) { conv->verbosity = static_cast<int>(n); },
                  "Progress notes on stderr");
    cmd->callback([conv] { run_converge(*conv); });
  }
  {
    CLI::App* cmd = app.add_subcommand("nu-check", "Occupation measure: Monte Carlo vs closed form");
    cmd->add_option("--alpha", nu->alpha, "Target quantile in [0,1]")->required();
    cmd->add_option("--rect", nu->rect, "x1,x2,y1,y2 with the rect straddling alpha")->required();
    cmd->add_option("--reps", nu->reps, "Monte Carlo chains")->capture_default_str();
    nu->g.format = "json";
    add_common(cmd, nu->g);
    cmd->callback([nu] { run_nu_check(*nu); });
  }
  {
    CLI::App* cmd = app.add_subcommand("dickman", "Sample the Dickman perpetuity");
    cmd->add_option("--reps", dick->reps, "Draws")->capture_default_str();
    cmd->add_option("--delta", dick->delta, "Product truncation threshold")
        ->capture_default_str();
    add_common(cmd, dick->g);
    cmd->callback([dick] { run_dickman(*dick); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qcost
