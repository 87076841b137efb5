"""Differentially private subgraph counting over noisy adjacency matrices.

The package simulates a multi-round user/collector protocol under
edge-local differential privacy: each user perturbs its adjacency bits
once, the collector assembles an unbiased noisy adjacency matrix, and
triangle, quadrangle, and 2-star counts are estimated from powers of that
matrix, optionally with a degree-projected, clamped, and re-noised second
round.  Closed-form error oracles, attack analysis, cost accounting, and a
trial harness round out the toolkit; the ``namcount`` CLI drives them.
"""

from .accounting import (
    BudgetCharge,
    BudgetLedger,
    CostMeter,
    RunTrace,
    TraceRecord,
    download_cost,
    measure_cost,
)
from .analysis import (
    AttackPoint,
    AttackStrategy,
    ConfusionMatrix,
    ReBound,
    ReTrendPoint,
    ReTrendReport,
    TheoreticalMse,
    TrialStats,
    attack_point,
    confusion_matrix,
    pair_square_sums,
    re_bound,
    re_bound_check,
    simulate_attack,
    theoretical_mse,
    tradeoff_curve,
    tradeoff_type2,
    trial_statistics,
)
from .backend import active_backend
from .estimators import (
    FULL_PIPELINE,
    BudgetSplit,
    Estimate,
    EstimatorKind,
    JointEstimate,
    StageMask,
    delta_f,
    joint_estimate,
    qua_tr,
    tri_mtr,
    tri_or,
    tri_tr,
    two_star,
    two_star_unclamped,
)
from .graphs import (
    Graph,
    ParseStats,
    SubgraphKind,
    erdos_renyi,
    exact_count,
    exact_count_bruteforce,
    load_edge_list,
    parse_edge_list,
    two_step_counts,
)
from .harness import (
    EstimatorConfig,
    JointTrialReport,
    TrialReport,
    run_joint_trials,
    run_once,
    run_trials,
)
from .mechanisms import (
    Mechanism,
    MechanismKind,
    Stage,
    entry_variance,
    keep_probability,
    laplace_sample,
    normal_quantile,
    rr_ldp_ratio,
    rr_perturb,
    rr_unbias,
    stream,
)
from .nam import (
    DEFAULT_STRATEGY,
    MatMulStrategy,
    NoisyAdjacencyMatrix,
    gnam,
    load_nam,
    save_nam,
    square,
    trace_cube,
)
from .projection import (
    ProjectedView,
    ProjectionResult,
    graph_projection,
    project_all,
)

__version__ = "0.1.0"

__all__ = [
    "AttackPoint",
    "AttackStrategy",
    "BudgetCharge",
    "BudgetLedger",
    "BudgetSplit",
    "ConfusionMatrix",
    "CostMeter",
    "DEFAULT_STRATEGY",
    "Estimate",
    "EstimatorConfig",
    "EstimatorKind",
    "FULL_PIPELINE",
    "Graph",
    "JointEstimate",
    "JointTrialReport",
    "MatMulStrategy",
    "Mechanism",
    "MechanismKind",
    "NoisyAdjacencyMatrix",
    "ParseStats",
    "ProjectedView",
    "ProjectionResult",
    "ReBound",
    "ReTrendPoint",
    "ReTrendReport",
    "RunTrace",
    "Stage",
    "StageMask",
    "SubgraphKind",
    "TheoreticalMse",
    "TraceRecord",
    "TrialReport",
    "TrialStats",
    "active_backend",
    "attack_point",
    "confusion_matrix",
    "delta_f",
    "download_cost",
    "erdos_renyi",
    "exact_count",
    "exact_count_bruteforce",
    "entry_variance",
    "gnam",
    "graph_projection",
    "joint_estimate",
    "keep_probability",
    "laplace_sample",
    "load_edge_list",
    "load_nam",
    "measure_cost",
    "normal_quantile",
    "pair_square_sums",
    "parse_edge_list",
    "project_all",
    "qua_tr",
    "re_bound",
    "re_bound_check",
    "rr_ldp_ratio",
    "rr_perturb",
    "rr_unbias",
    "run_joint_trials",
    "run_once",
    "run_trials",
    "save_nam",
    "simulate_attack",
    "square",
    "stream",
    "theoretical_mse",
    "trace_cube",
    "tradeoff_curve",
    "tradeoff_type2",
    "trial_statistics",
    "tri_mtr",
    "tri_or",
    "tri_tr",
    "two_star",
    "two_star_unclamped",
    "two_step_counts",
    "__version__",
]
