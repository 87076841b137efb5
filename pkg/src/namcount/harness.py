"""Trial driver: repeated estimator runs with cost and budget accounting.

The protocol simulation is logical rather than socketed: users are loop
iterations with isolated random streams, and message sizes are recorded on
an explicit trace.  One representative run per batch keeps its trace so
reports carry the download meter and the budget ledger; the remaining
trials only keep their estimates.  Identical (graph, config, seed) inputs
produce identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .accounting import BudgetLedger, CostMeter, RunTrace, measure_cost
from .analysis import TrialStats, trial_statistics
from .estimators import (
    FULL_PIPELINE,
    BudgetSplit,
    Estimate,
    EstimatorKind,
    JointEstimate,
    StageMask,
    joint_estimate,
    qua_tr,
    tri_mtr,
    tri_or,
    tri_tr,
    two_star,
)
from .graphs import Graph, exact_count
from .mechanisms import MechanismKind
from .nam import DEFAULT_STRATEGY, MatMulStrategy

__all__ = [
    "EstimatorConfig",
    "TrialReport",
    "JointTrialReport",
    "run_once",
    "run_trials",
    "run_joint_trials",
]

DEFAULT_FRACTIONS = (0.1, 0.8, 0.1)
DEFAULT_JOINT_FRACTIONS = (0.1, 0.8, 0.1, 0.1)


@dataclass(frozen=True)
class EstimatorConfig:
    """Everything one estimator run needs besides the graph and the seed."""

    kind: EstimatorKind
    eps: float
    mech_kind: MechanismKind = MechanismKind.RR
    fractions: Sequence[float] = DEFAULT_FRACTIONS
    alpha: int = 20
    beta: float = 0.01
    mask: StageMask = FULL_PIPELINE
    strategy: MatMulStrategy = DEFAULT_STRATEGY

    def __post_init__(self):
        if math.isnan(self.eps) or self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def split(self) -> BudgetSplit:
        return BudgetSplit.from_total(self.eps, tuple(self.fractions))


@dataclass(frozen=True)
class TrialReport:
    """Aggregated outcome of repeated runs of one estimator."""

    kind: EstimatorKind
    eps: float
    seed: int
    trials: int
    truth: int
    values: tuple[float, ...]
    stats: TrialStats
    cost: CostMeter
    ledger: BudgetLedger
    clamp_events: int = 0
    clamp_opportunities: int = 0
    trace: Optional[RunTrace] = field(default=None, compare=False)


@dataclass(frozen=True)
class JointTrialReport:
    triangles: TrialReport
    quadrangles: TrialReport
    two_stars: TrialReport

    @property
    def reports(self) -> tuple[TrialReport, ...]:
        return (self.triangles, self.quadrangles, self.two_stars)


def run_once(g: Graph, config: EstimatorConfig, seed: int, trial: int = 0,
             trace: Optional[RunTrace] = None) -> Estimate:
    """Execute one configured estimator run."""
    kind = config.kind
    if kind is EstimatorKind.TRI_OR:
        return tri_or(g, config.eps, config.mech_kind, config.strategy,
                      seed, trial, trace)
    if kind is EstimatorKind.TWO_STAR:
        return two_star(g, config.eps, config.alpha, seed, trial, trace)
    runner = {
        EstimatorKind.TRI_TR: tri_tr,
        EstimatorKind.TRI_MTR: tri_mtr,
        EstimatorKind.QUA_TR: qua_tr,
    }[kind]
    return runner(g, config.split, config.alpha, config.beta,
                  config.mech_kind, config.strategy, config.mask,
                  seed, trial, trace)


def _wrap(estimate_trial_pairs, g, config, seed, trials, trace):
    values = tuple(e.value for e, _ in estimate_trial_pairs)
    first: Estimate = estimate_trial_pairs[0][0]
    truth = exact_count(g, config.kind.target)
    stats = trial_statistics(values, truth)
    cost = measure_cost(trace, g.n) if trace is not None else CostMeter.empty(g.n)
    clamp_events = sum(e.clamp_events for e, _ in estimate_trial_pairs)
    clamp_opps = sum(e.clamp_opportunities for e, _ in estimate_trial_pairs)
    return TrialReport(config.kind, config.eps, seed, trials, truth, values,
                       stats, cost, first.ledger, clamp_events, clamp_opps,
                       trace)


def run_trials(g: Graph, config: EstimatorConfig, trials: int, seed: int = 0,
               keep_trace: bool = True) -> TrialReport:
    """Run the estimator ``trials`` times on disjoint random streams.

    Trial 0 records the message trace used for the cost meter; estimates
    and the budget ledger are identical in distribution across trials.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pairs = []
    trace = RunTrace() if keep_trace else None
    for t in range(trials):
        est = run_once(g, config, seed, trial=t, trace=trace if t == 0 else None)
        pairs.append((est, t))
    return _wrap(pairs, g, config, seed, trials, trace)


def run_joint_trials(g: Graph, eps: float,
                     fractions: Sequence[float] = DEFAULT_JOINT_FRACTIONS,
                     trials: int = 20, seed: int = 0, alpha: int = 20,
                     beta: float = 0.01,
                     mech_kind: MechanismKind = MechanismKind.RR,
                     strategy: MatMulStrategy = DEFAULT_STRATEGY,
                     triangle_from_matrix: bool = False,
                     keep_trace: bool = True) -> JointTrialReport:
    """Run the shared three-count pipeline ``trials`` times."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    split = BudgetSplit.from_total(eps, tuple(fractions))
    trace = RunTrace() if keep_trace else None
    results: list[JointEstimate] = []
    for t in range(trials):
        results.append(joint_estimate(
            g, split, alpha, beta, mech_kind, strategy, seed, t,
            triangle_from_matrix, trace=trace if t == 0 else None))
    cost = measure_cost(trace, g.n) if trace is not None else CostMeter.empty(g.n)

    def build(kind: EstimatorKind, pick) -> TrialReport:
        values = tuple(pick(r).value for r in results)
        truth = exact_count(g, kind.target)
        stats = trial_statistics(values, truth)
        return TrialReport(kind, eps, seed, trials, truth, values, stats,
                           cost, results[0].ledger,
                           sum(pick(r).clamp_events for r in results),
                           sum(pick(r).clamp_opportunities for r in results),
                           trace)

    tri_kind = (EstimatorKind.TRI_TR if triangle_from_matrix
                else EstimatorKind.TRI_MTR)
    return JointTrialReport(
        triangles=build(tri_kind, lambda r: r.triangles),
        quadrangles=build(EstimatorKind.QUA_TR, lambda r: r.quadrangles),
        two_stars=build(EstimatorKind.TWO_STAR, lambda r: r.two_stars),
    )
