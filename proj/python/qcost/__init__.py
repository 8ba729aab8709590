"""Cost analysis of QuickSelect over probabilistic word sources.

Thin re-export of the native module: source and cost models, exact and
certified-error expectation evaluators, limit-cost and Dickman samplers,
instrumented algorithm runs, and the convergence/comparison harness.
"""

from ._qcost import (
    ConvergenceEstimate,
    ConvergenceReport,
    CostModel,
    ExpectationResult,
    ExperimentConfig,
    FundamentalInterval,
    IntegralRoute,
    KsResult,
    LimitSample,
    McEstimate,
    PathPoint,
    PivotChain,
    PivotStep,
    PositionalTable,
    Rect,
    RunRecord,
    SourceModel,
    TruncationError,
    chain_marginal_f,
    chain_marginal_f_integral,
    chain_marginal_f_mc,
    chain_marginal_g,
    chain_marginal_g_integral,
    chain_marginal_g_mc,
    convergence_experiment,
    distribution_compare,
    expected_key_closed,
    expected_quickrand,
    expected_s_integral,
    expected_s_series,
    integral_i,
    nu_closed,
    nu_mc,
    quantile_rank,
    run_quickquant,
    run_quickselect_random_pivot,
    run_quickval,
    sample_dickman_many,
    sample_pivot_chain,
    sample_s,
    sample_s_many,
    seed_array,
)

__all__ = [
    "ConvergenceEstimate",
    "ConvergenceReport",
    "CostModel",
    "ExpectationResult",
    "ExperimentConfig",
    "FundamentalInterval",
    "IntegralRoute",
    "KsResult",
    "LimitSample",
    "McEstimate",
    "PathPoint",
    "PivotChain",
    "PivotStep",
    "PositionalTable",
    "Rect",
    "RunRecord",
    "SourceModel",
    "TruncationError",
    "chain_marginal_f",
    "chain_marginal_f_integral",
    "chain_marginal_f_mc",
    "chain_marginal_g",
    "chain_marginal_g_integral",
    "chain_marginal_g_mc",
    "convergence_experiment",
    "distribution_compare",
    "expected_key_closed",
    "expected_quickrand",
    "expected_s_integral",
    "expected_s_series",
    "integral_i",
    "nu_closed",
    "nu_mc",
    "quantile_rank",
    "run_quickquant",
    "run_quickselect_random_pivot",
    "run_quickval",
    "sample_dickman_many",
    "sample_pivot_chain",
    "sample_s",
    "sample_s_many",
    "seed_array",
]
