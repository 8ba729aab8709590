#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <vector>

#include "qcost/algo.hpp"
#include "qcost/expectation.hpp"
#include "qcost/harness.hpp"
#include "qcost/limit.hpp"

namespace py = pybind11;
using namespace qcost;

namespace {

LimitSample sample_s_once(const SourceModel& src, const CostModel& cost, double alpha,
                          double delta, std::uint64_t master, std::uint64_t rep) {
  TruncationPolicy policy = make_truncation_policy(src, cost, delta);
  RngStream rng = RngStream::derive(master, rep);
  return sample_S(rng, src, cost, alpha, policy);
}

std::vector<double> sample_s_many(const SourceModel& src, const CostModel& cost, double alpha,
                                  std::size_t reps, double delta, std::uint64_t master) {
  TruncationPolicy policy = make_truncation_policy(src, cost, delta);
  std::vector<double> out(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RngStream rng = RngStream::derive(master, i);
    out[i] = sample_S(rng, src, cost, alpha, policy).value;
  }
  return out;
}

std::vector<double> sample_dickman_many(std::uint64_t master, std::size_t reps, double delta) {
  std::vector<double> out(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RngStream rng = RngStream::derive(master, i);
    out[i] = sample_dickman(rng, delta);
  }
  return out;
}

std::vector<double> seed_array(std::uint64_t master, std::uint64_t rep, std::size_t n) {
  RngStream rng = RngStream::derive(master, rep);
  return draw_seed_array(rng, n);
}

PivotChain pivot_chain(double alpha, int max_depth, std::uint64_t master, std::uint64_t rep) {
  RngStream rng = RngStream::derive(master, rep);
  return sample_pivot_chain(rng, alpha, max_depth);
}

RunRecord qs_random(const SourceModel& src, const CostModel& cost,
                    const std::vector<double>& seeds, std::size_t m, std::uint64_t master,
                    std::uint64_t rep, std::uint64_t stream_seed) {
  RngStream rng = RngStream::derive(master, rep);
  return run_quickselect_random_pivot(src, cost, seeds, m, rng, stream_seed);
}

McEstimate nu_mc_seeded(double alpha, const Rect& rect, std::size_t reps, std::uint64_t master,
                        int max_depth) {
  RngStream rng = RngStream::derive(master, 0);
  return nu_mc(rng, alpha, rect, reps, max_depth);
}

McEstimate marginal_f_mc(int k, double x1, double x2, double alpha, std::size_t reps,
                         std::uint64_t master) {
  RngStream rng = RngStream::derive(master, 0);
  return chain_marginal_f_mc(rng, k, x1, x2, alpha, reps);
}

McEstimate marginal_g_mc(int k, double y1, double y2, double alpha, std::size_t reps,
                         std::uint64_t master) {
  RngStream rng = RngStream::derive(master, 0);
  return chain_marginal_g_mc(rng, k, y1, y2, alpha, reps);
}

}  // namespace

PYBIND11_MODULE(_qcost, m) {
  m.doc() = "Symbol-comparison cost analysis of QuickSelect on probabilistic word sources";

  py::register_exception<truncation_error>(m, "TruncationError", PyExc_RuntimeError);

  py::class_<FundamentalInterval>(m, "FundamentalInterval")
      .def_readonly("a", &FundamentalInterval::a)
      .def_readonly("b", &FundamentalInterval::b)
      .def("width", &FundamentalInterval::width)
      .def("midpoint", &FundamentalInterval::midpoint)
      .def("__repr__", [](const FundamentalInterval& iv) {
        return "FundamentalInterval(" + std::to_string(iv.a) + ", " + std::to_string(iv.b) + ")";
      });

  py::class_<SourceModel>(m, "SourceModel")
      .def_static("memoryless", &SourceModel::memoryless, py::arg("probs"))
      .def_static("markov", &SourceModel::markov, py::arg("initial"), py::arg("transition"))
      .def_static("intermittent", &SourceModel::intermittent, py::arg("r"), py::arg("gamma"),
                  py::arg("sigma"))
      .def_property_readonly("alphabet_size", &SourceModel::alphabet_size)
      .def("refine_interval", &SourceModel::refine_interval, py::arg("prefix"))
      .def("symbols_from_seed", &SourceModel::symbols_from_seed, py::arg("seed"), py::arg("k"))
      .def("pi_k", &SourceModel::pi_k, py::arg("k"))
      .def("describe", &SourceModel::describe)
      .def("__repr__", &SourceModel::describe);

  py::class_<PositionalTable>(m, "PositionalTable")
      .def(py::init<>())
      .def_readwrite("tail_default", &PositionalTable::tail_default)
      .def("set", &PositionalTable::set, py::arg("i"), py::arg("s"), py::arg("t"),
           py::arg("value"))
      .def("value", &PositionalTable::value, py::arg("i"), py::arg("s"), py::arg("t"));

  py::class_<CostModel>(m, "CostModel")
      .def_static("key", &CostModel::key)
      .def_static("symbol", &CostModel::symbol)
      .def_static("position_indicator", &CostModel::position_indicator, py::arg("i0"))
      .def_static("positional", &CostModel::positional, py::arg("table"))
      .def("describe", &CostModel::describe)
      .def("__repr__", &CostModel::describe);

  py::class_<ExpectationResult>(m, "ExpectationResult")
      .def_readonly("value", &ExpectationResult::value)
      .def_readonly("method", &ExpectationResult::method)
      .def_readonly("error_estimate", &ExpectationResult::error_estimate)
      .def_readonly("terms", &ExpectationResult::terms)
      .def_readonly("flagged", &ExpectationResult::flagged)
      .def("__repr__", [](const ExpectationResult& r) {
        return "ExpectationResult(value=" + std::to_string(r.value) +
               ", error_estimate=" + std::to_string(r.error_estimate) + ", method=" + r.method +
               (r.flagged ? ", flagged" : "") + ")";
      });

  m.def("expected_key_closed", &expected_key_closed, py::arg("alpha"));
  m.def("expected_s_series", &expected_S_series, py::arg("source"), py::arg("alpha"),
        py::arg("tol"), py::arg("max_terms") = std::size_t(100000000),
        py::call_guard<py::gil_scoped_release>());
  m.def("expected_s_integral", &expected_S_integral, py::arg("source"), py::arg("cost"),
        py::arg("alpha"), py::arg("tol") = 1e-8, py::call_guard<py::gil_scoped_release>());
  m.def("expected_quickrand", &expected_quickrand, py::arg("source"), py::arg("cost"),
        py::arg("panels"), py::arg("inner_tol") = 1e-6,
        py::call_guard<py::gil_scoped_release>());

  py::class_<LimitSample>(m, "LimitSample")
      .def_readonly("value", &LimitSample::value)
      .def_readonly("tail_bound", &LimitSample::tail_bound)
      .def_readonly("depth", &LimitSample::depth)
      .def_readonly("flagged", &LimitSample::flagged)
      .def("__repr__", [](const LimitSample& s) {
        return "LimitSample(value=" + std::to_string(s.value) +
               ", tail_bound=" + std::to_string(s.tail_bound) + ")";
      });

  m.def("sample_s", &sample_s_once, py::arg("source"), py::arg("cost"), py::arg("alpha"),
        py::arg("delta") = 1e-6, py::arg("master") = std::uint64_t(1),
        py::arg("rep") = std::uint64_t(0));
  m.def("sample_s_many", &sample_s_many, py::arg("source"), py::arg("cost"), py::arg("alpha"),
        py::arg("reps"), py::arg("delta") = 1e-6, py::arg("master") = std::uint64_t(1),
        py::call_guard<py::gil_scoped_release>());
  m.def("sample_dickman_many", &sample_dickman_many, py::arg("master"), py::arg("reps"),
        py::arg("delta") = 1e-6, py::call_guard<py::gil_scoped_release>());

  py::class_<PivotStep>(m, "PivotStep")
      .def_readonly("lo", &PivotStep::lo)
      .def_readonly("hi", &PivotStep::hi)
      .def_readonly("pivot", &PivotStep::pivot);

  py::class_<PivotChain>(m, "PivotChain")
      .def_readonly("alpha", &PivotChain::alpha)
      .def_readonly("steps", &PivotChain::steps)
      .def_readonly("final_width", &PivotChain::final_width);

  m.def("sample_pivot_chain", &pivot_chain, py::arg("alpha"), py::arg("max_depth"),
        py::arg("master") = std::uint64_t(1), py::arg("rep") = std::uint64_t(0));

  m.def("integral_i", &integral_I, py::arg("source"), py::arg("cost"), py::arg("p"),
        py::arg("t"), py::arg("x"), py::arg("y"), py::arg("tol") = 1e-10,
        py::arg("route") = IntegralRoute::automatic);

  py::enum_<IntegralRoute>(m, "IntegralRoute")
      .value("automatic", IntegralRoute::automatic)
      .value("prefix_sum", IntegralRoute::prefix_sum)
      .value("quadrature", IntegralRoute::quadrature);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("algorithm", &RunRecord::algorithm)
      .def_readonly("n", &RunRecord::n)
      .def_readonly("alpha", &RunRecord::alpha)
      .def_readonly("m", &RunRecord::m)
      .def_readonly("total_cost", &RunRecord::total_cost)
      .def_readonly("per_pivot", &RunRecord::per_pivot)
      .def_readonly("pivots", &RunRecord::pivots)
      .def_readonly("comparisons", &RunRecord::comparisons)
      .def_readonly("truncated", &RunRecord::truncated)
      .def("__repr__", [](const RunRecord& r) {
        return "RunRecord(" + r.algorithm + ", n=" + std::to_string(r.n) +
               ", total_cost=" + std::to_string(r.total_cost) + ")";
      });

  m.def("seed_array", &seed_array, py::arg("master"), py::arg("rep"), py::arg("n"));
  m.def("quantile_rank", &quantile_rank, py::arg("alpha"), py::arg("n"));
  m.def(
      "run_quickval",
      [](const SourceModel& src, const CostModel& cost, const std::vector<double>& seeds,
         double alpha, std::uint64_t stream_seed) {
        return run_quickval(src, cost, seeds, alpha, stream_seed);
      },
      py::arg("source"), py::arg("cost"), py::arg("seeds"), py::arg("alpha"),
      py::arg("stream_seed") = std::uint64_t(0), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_quickquant",
      [](const SourceModel& src, const CostModel& cost, const std::vector<double>& seeds,
         std::size_t mrank, std::uint64_t stream_seed) {
        return run_quickquant(src, cost, seeds, mrank, stream_seed);
      },
      py::arg("source"), py::arg("cost"), py::arg("seeds"), py::arg("m"),
      py::arg("stream_seed") = std::uint64_t(0), py::call_guard<py::gil_scoped_release>());
  m.def("run_quickselect_random_pivot", &qs_random, py::arg("source"), py::arg("cost"),
        py::arg("seeds"), py::arg("m"), py::arg("master") = std::uint64_t(1),
        py::arg("rep") = std::uint64_t(0), py::arg("stream_seed") = std::uint64_t(0),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("source_spec", &ExperimentConfig::source_spec)
      .def_readwrite("cost_spec", &ExperimentConfig::cost_spec)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("n_grid", &ExperimentConfig::n_grid)
      .def_readwrite("reps", &ExperimentConfig::reps)
      .def_readwrite("p_values", &ExperimentConfig::p_values)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("paths", &ExperimentConfig::paths)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir);

  py::class_<ConvergenceEstimate>(m, "ConvergenceEstimate")
      .def_readonly("n", &ConvergenceEstimate::n)
      .def_readonly("algo", &ConvergenceEstimate::algo)
      .def_readonly("p", &ConvergenceEstimate::p)
      .def_readonly("estimate", &ConvergenceEstimate::estimate)
      .def_readonly("stderr", &ConvergenceEstimate::stderr_);

  py::class_<PathPoint>(m, "PathPoint")
      .def_readonly("path_id", &PathPoint::path_id)
      .def_readonly("n", &PathPoint::n)
      .def_readonly("value", &PathPoint::value);

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("estimates", &ConvergenceReport::estimates)
      .def_readonly("paths", &ConvergenceReport::paths)
      .def_readonly("any_truncated", &ConvergenceReport::any_truncated);

  m.def("convergence_experiment", &convergence_experiment, py::arg("source"), py::arg("cost"),
        py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::class_<KsResult>(m, "KsResult")
      .def_readonly("statistic", &KsResult::statistic)
      .def_readonly("p_value", &KsResult::p_value)
      .def_readonly("level", &KsResult::level)
      .def_readonly("accept", &KsResult::accept)
      .def_readonly("n1", &KsResult::n1)
      .def_readonly("n2", &KsResult::n2);

  m.def(
      "distribution_compare",
      [](const std::vector<double>& a, const std::vector<double>& b, double level) {
        return distribution_compare(a, b, level);
      },
      py::arg("a"), py::arg("b"), py::arg("level") = 0.01);

  py::class_<Rect>(m, "Rect")
      .def(py::init([](double x1, double x2, double y1, double y2) {
             return Rect{x1, x2, y1, y2};
           }),
           py::arg("x1"), py::arg("x2"), py::arg("y1"), py::arg("y2"))
      .def_readwrite("x1", &Rect::x1)
      .def_readwrite("x2", &Rect::x2)
      .def_readwrite("y1", &Rect::y1)
      .def_readwrite("y2", &Rect::y2);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_readonly("stderr", &McEstimate::stderr_)
      .def_readonly("reps", &McEstimate::reps);

  m.def("nu_closed", &nu_closed, py::arg("alpha"), py::arg("rect"));
  m.def("nu_mc", &nu_mc_seeded, py::arg("alpha"), py::arg("rect"), py::arg("reps"),
        py::arg("master") = std::uint64_t(1), py::arg("max_depth") = 256,
        py::call_guard<py::gil_scoped_release>());
  m.def("chain_marginal_f", &chain_marginal_f, py::arg("k"), py::arg("x"), py::arg("alpha"));
  m.def("chain_marginal_g", &chain_marginal_g, py::arg("k"), py::arg("y"), py::arg("alpha"));
  m.def("chain_marginal_f_integral", &chain_marginal_f_integral, py::arg("k"), py::arg("x1"),
        py::arg("x2"), py::arg("alpha"));
  m.def("chain_marginal_g_integral", &chain_marginal_g_integral, py::arg("k"), py::arg("y1"),
        py::arg("y2"), py::arg("alpha"));
  m.def("chain_marginal_f_mc", &marginal_f_mc, py::arg("k"), py::arg("x1"), py::arg("x2"),
        py::arg("alpha"), py::arg("reps"), py::arg("master") = std::uint64_t(1),
        py::call_guard<py::gil_scoped_release>());
  m.def("chain_marginal_g_mc", &marginal_g_mc, py::arg("k"), py::arg("y1"), py::arg("y2"),
        py::arg("alpha"), py::arg("reps"), py::arg("master") = std::uint64_t(1),
        py::call_guard<py::gil_scoped_release>());
}
