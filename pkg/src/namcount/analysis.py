"""Closed-form error oracles, attack analysis, and trial statistics.

Three groups of tools:

* :func:`theoretical_mse` evaluates the exact first-round mean squared
  error of each estimator from the clean graph and the per-entry noise
  variance, broken down by noise power.
* :func:`confusion_matrix`, :func:`tradeoff_curve`, and
  :func:`simulate_attack` characterize edge-inference attacks against the
  two randomizers, both in closed form and by Monte Carlo.
* :func:`trial_statistics` and :func:`re_bound_check` summarize batches of
  estimates and compare measured relative error against the theoretical
  convergence shapes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .estimators import BudgetSplit, EstimatorKind
from .graphs import Graph, exact_count
from .mechanisms import (
    Mechanism,
    MechanismKind,
    Stage,
    keep_probability,
    laplace_sample,
    stream,
)

__all__ = [
    "TheoreticalMse",
    "theoretical_mse",
    "pair_square_sums",
    "AttackStrategy",
    "AttackPoint",
    "ConfusionMatrix",
    "confusion_matrix",
    "attack_point",
    "simulate_attack",
    "tradeoff_curve",
    "tradeoff_type2",
    "TrialStats",
    "trial_statistics",
    "ReBound",
    "re_bound",
    "ReTrendPoint",
    "ReTrendReport",
    "re_bound_check",
]


# ---------------------------------------------------------------------------
# closed-form MSE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoreticalMse:
    """Exact estimator MSE split by noise power.

    ``sigma2_term`` collects contributions linear in the entry variance
    (for the degree-based 2-star estimator: the 1/eps0^2 part),
    ``sigma4_term`` the quadratic part, ``sigma6_term`` the cubic part.
    """

    kind: EstimatorKind
    sigma2_term: float
    sigma4_term: float
    sigma6_term: float = 0.0

    @property
    def total(self) -> float:
        return self.sigma2_term + self.sigma4_term + self.sigma6_term


def pair_square_sums(g: Graph) -> tuple[float, float, float]:
    """Pairwise walk-count power sums used by the closed forms.

    Returns ``(s_b, s_c, s_q)`` where ``s_b`` and ``s_c`` sum the squared
    2-walk and 3-walk counts over pairs i < j, and ``s_q`` sums the squared
    linear-noise weights of the quadrangle estimator,
    ``(2 c_ij - a_ij (d_i + d_j))**2``: the distinct-neighbor-pair
    restriction strips ``d_i + d_j`` degenerate walks from every edge.
    """
    a = g.adjacency(np.float64)
    b = a @ a
    c = b @ a
    d = g.degrees.astype(np.float64)
    upper = np.triu_indices(g.n, k=1)
    qweight = 2.0 * c - a * (d[:, None] + d[None, :])
    return (
        float(np.sum(b[upper] ** 2)),
        float(np.sum(c[upper] ** 2)),
        float(np.sum(qweight[upper] ** 2)),
    )


def theoretical_mse(kind: EstimatorKind, g: Graph, sigma2: float,
                    eps0: Optional[float] = None,
                    sums: Optional[tuple[float, float, float]] = None,
                    ) -> TheoreticalMse:
    """Exact first-round MSE of an estimator on a clean graph.

    ``sigma2`` is the per-entry variance of the noisy adjacency matrix; it
    is ignored by the 2-star estimator, which instead needs ``eps0``.  The
    two-round values describe the unclamped, no-response-noise pipeline.
    Pass precomputed :func:`pair_square_sums` as ``sums`` when sweeping
    budgets on one graph.
    """
    n = g.n
    m = g.num_edges
    if kind is EstimatorKind.TWO_STAR:
        if eps0 is None or eps0 <= 0:
            raise ValueError("the 2-star closed form requires eps0 > 0")
        d = g.degrees.astype(np.float64)
        lap2 = float(np.sum((2.0 * d - 1.0) ** 2)) * 2.0 / eps0**2
        lap4 = 20.0 * n / eps0**4
        return TheoreticalMse(kind, lap2, lap4)
    if sigma2 < 0 or math.isnan(sigma2):
        raise ValueError(f"sigma2 must be non-negative, got {sigma2}")
    s_b, s_c, s_q = pair_square_sums(g) if sums is None else sums
    if kind is EstimatorKind.TRI_OR:
        return TheoreticalMse(
            kind,
            sigma2 * s_b,
            sigma2**2 * (n - 2) * m,
            sigma2**3 * n * (n - 1) * (n - 2) / 6.0,
        )
    if kind is EstimatorKind.TRI_TR:
        return TheoreticalMse(kind, sigma2 * s_b / 9.0, 0.0)
    if kind is EstimatorKind.TRI_MTR:
        return TheoreticalMse(
            kind, 4.0 * sigma2 * s_b / 9.0, sigma2**2 * (n - 2) * m / 9.0)
    if kind is EstimatorKind.QUA_TR:
        # Linear weight of a noisy entry is 2c_ij - a_ij(d_i + d_j), not
        # 2c_ij: exhaustive enumeration over all RR outcomes on K5 matches
        # s_q/16 exactly and rejects s_c/4.
        return TheoreticalMse(
            kind, sigma2 * s_q / 16.0, sigma2**2 * (n - 2) * s_b / 16.0)
    raise ValueError(f"no closed form for {kind}")


# ---------------------------------------------------------------------------
# attack analysis
# ---------------------------------------------------------------------------

class AttackStrategy(enum.Enum):
    """Edge-inference rules: report the noisy bit, or threshold the noisy
    value at 1 (precision-first) or at 0.5 (minimum total error)."""

    RR = "rr"
    LAP_KAPPA1 = "lap-k1"
    LAP_KAPPA2 = "lap-k2"


@dataclass(frozen=True)
class AttackPoint:
    type1: float
    type2: float
    precision: float
    recall: float


@dataclass(frozen=True)
class ConfusionMatrix:
    """Joint cell masses for true bit vs attack verdict at edge density p."""

    true_positive: float   # x=1, verdict 1
    false_negative: float  # x=1, verdict 0
    false_positive: float  # x=0, verdict 1
    true_negative: float   # x=0, verdict 0

    @property
    def type1(self) -> float:
        mass = self.true_positive + self.false_negative
        return self.false_negative / mass if mass > 0 else 0.0

    @property
    def type2(self) -> float:
        mass = self.false_positive + self.true_negative
        return self.false_positive / mass if mass > 0 else 0.0

    @property
    def precision(self) -> float:
        flagged = self.true_positive + self.false_positive
        return self.true_positive / flagged if flagged > 0 else 0.0

    @property
    def recall(self) -> float:
        mass = self.true_positive + self.false_negative
        return self.true_positive / mass if mass > 0 else 0.0

    def cells(self) -> tuple[float, float, float, float]:
        return (self.true_positive, self.false_negative,
                self.false_positive, self.true_negative)

    def point(self) -> AttackPoint:
        return AttackPoint(self.type1, self.type2, self.precision, self.recall)


def _error_rates(strategy: AttackStrategy, eps: float) -> tuple[float, float]:
    """Per-bit miss and false-alarm probabilities of a strategy."""
    if math.isnan(eps) or eps <= 0 or math.isinf(eps):
        raise ValueError(f"eps must be positive and finite, got {eps}")
    if strategy is AttackStrategy.RR:
        t = 1.0 / (math.exp(eps) + 1.0)
        return t, t
    if strategy is AttackStrategy.LAP_KAPPA1:
        return 0.5, 0.5 * math.exp(-eps)
    if strategy is AttackStrategy.LAP_KAPPA2:
        t = 0.5 * math.exp(-0.5 * eps)
        return t, t
    raise ValueError(f"unknown strategy {strategy}")


def confusion_matrix(strategy: AttackStrategy, eps: float,
                     p: float) -> ConfusionMatrix:
    """Closed-form confusion matrix of an attack at edge density p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"edge density must lie in (0, 1), got {p}")
    t1, t2 = _error_rates(strategy, eps)
    return ConfusionMatrix(
        true_positive=p * (1.0 - t1),
        false_negative=p * t1,
        false_positive=(1.0 - p) * t2,
        true_negative=(1.0 - p) * (1.0 - t2),
    )


def attack_point(strategy: AttackStrategy, eps: float, p: float) -> AttackPoint:
    return confusion_matrix(strategy, eps, p).point()


def simulate_attack(strategy: AttackStrategy, eps: float, p: float,
                    draws: int, seed: int = 0) -> ConfusionMatrix:
    """Monte-Carlo confusion matrix: perturb random bits, apply the rule."""
    if draws <= 0:
        raise ValueError("draws must be positive")
    if not 0.0 < p < 1.0:
        raise ValueError(f"edge density must lie in (0, 1), got {p}")
    _error_rates(strategy, eps)  # validates eps
    rng = stream(seed, Stage.GENERIC)
    bits = rng.random(draws) < p
    if strategy is AttackStrategy.RR:
        keep = rng.random(draws) < keep_probability(eps)
        verdicts = np.where(keep, bits, ~bits)
    else:
        noisy = bits + laplace_sample(1.0 / eps, rng, size=draws)
        kappa = 1.0 if strategy is AttackStrategy.LAP_KAPPA1 else 0.5
        verdicts = noisy > kappa
    tp = float(np.sum(bits & verdicts))
    fn = float(np.sum(bits & ~verdicts))
    fp = float(np.sum(~bits & verdicts))
    tn = float(np.sum(~bits & ~verdicts))
    return ConfusionMatrix(tp / draws, fn / draws, fp / draws, tn / draws)


def _laplace_cdf(z: float, scale: float) -> float:
    if z <= 0:
        return 0.5 * math.exp(z / scale)
    return 1.0 - 0.5 * math.exp(-z / scale)


def _laplace_icdf(u: float, scale: float) -> float:
    if u < 0.5:
        return scale * math.log(2.0 * u)
    return -scale * math.log(2.0 * (1.0 - u))


def tradeoff_type2(kind: MechanismKind, eps: float, type1: float) -> float:
    """Smallest achievable false-alarm rate at a given miss rate.

    The test puts "edge present" as the null: type1 is the probability of
    rejecting a real edge, type2 of accepting an absent one.  RR follows
    the two randomized-flip segments through its inflection point; the
    Laplace rule thresholds the noisy value.
    """
    if math.isnan(eps) or eps <= 0 or math.isinf(eps):
        raise ValueError(f"eps must be positive and finite, got {eps}")
    if not 0.0 <= type1 <= 1.0:
        raise ValueError(f"type1 must lie in [0, 1], got {type1}")
    if kind is MechanismKind.RR:
        q = 1.0 / (1.0 + math.exp(eps))
        if type1 <= q:
            return 1.0 - type1 * (1.0 - q) / q
        return q * (1.0 - type1) / (1.0 - q)
    if type1 == 0.0:
        return 1.0
    if type1 == 1.0:
        return 0.0
    scale = 1.0 / eps
    kappa = 1.0 + _laplace_icdf(type1, scale)
    return 1.0 - _laplace_cdf(kappa, scale)


def tradeoff_curve(mech: Mechanism, resolution: int = 1000,
                   ) -> list[tuple[float, float]]:
    """Attack trade-off curve as (type1, type2) pairs on a uniform grid."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    xs = np.linspace(0.0, 1.0, resolution)
    return [(float(x), tradeoff_type2(mech.kind, mech.eps, float(x)))
            for x in xs]


# ---------------------------------------------------------------------------
# trial statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialStats:
    """Empirical summary of repeated estimates against a known truth.

    Relative-error fields are None when the truth is zero.
    """

    count: int
    mean: float
    mse: float
    std_error: float
    mean_re: Optional[float]
    median_re: Optional[float]


def trial_statistics(samples: Sequence[float], truth: float) -> TrialStats:
    values = np.asarray(list(samples), dtype=np.float64)
    if values.size == 0:
        raise ValueError("at least one sample is required")
    err = values - truth
    mse = float(np.mean(err**2))
    if values.size > 1:
        sem = float(np.std(values, ddof=1) / math.sqrt(values.size))
    else:
        sem = 0.0
    if truth != 0:
        re = np.abs(err) / abs(truth)
        mean_re, median_re = float(np.mean(re)), float(np.median(re))
    else:
        mean_re = median_re = None
    return TrialStats(int(values.size), float(np.mean(values)), mse, sem,
                      mean_re, median_re)


# ---------------------------------------------------------------------------
# relative-error convergence shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReBound:
    """Evaluated relative-error bound shape, term by term (constants one)."""

    kind: EstimatorKind
    terms: tuple[float, ...]

    @property
    def total(self) -> float:
        return sum(self.terms)


def re_bound(kind: EstimatorKind, n: int, d_avg: float,
             split: BudgetSplit) -> ReBound:
    """Relative-error convergence shape for the two-round triangle counts.

    Terms carry unit constants; only ratios across graphs are meaningful.
    """
    if d_avg <= 0:
        raise ValueError("average degree must be positive")
    e1, e2 = split.eps1, split.eps2
    if e1 <= 0 or e2 <= 0:
        raise ValueError("the bound needs positive eps1 and eps2")
    rn = math.sqrt(n)
    if kind is EstimatorKind.TRI_TR:
        terms = (
            1.0 / (e1 * d_avg),
            1.0 / (e1 * e2 * rn * d_avg**1.5),
            1.0 / (e2 * rn * d_avg),
        )
    elif kind is EstimatorKind.TRI_MTR:
        terms = (
            1.0 / (e1 * d_avg),
            1.0 / (e1**2 * d_avg**1.5),
            1.0 / (e1**2 * e2 * d_avg**2),
            1.0 / (e2 * rn * d_avg),
        )
    else:
        raise ValueError(f"no relative-error shape for {kind}")
    return ReBound(kind, terms)


@dataclass(frozen=True)
class ReTrendPoint:
    n: int
    d_avg: float
    bound: float
    median_re: Optional[float]


@dataclass(frozen=True)
class ReTrendReport:
    """Measured relative error against the theoretical shape on a family.

    ``monotone_re`` is None when fewer than two graphs have defined RE
    (e.g. triangle-free members); ``slope_ratio`` is the log-log slope of
    measured RE against the bound, near one when the shape is predictive.
    """

    kind: EstimatorKind
    points: tuple[ReTrendPoint, ...]
    monotone_bound: bool
    monotone_re: Optional[bool]
    slope_ratio: Optional[float]

    def slope_within(self, factor: float = 2.0) -> Optional[bool]:
        if self.slope_ratio is None:
            return None
        return 1.0 / factor <= self.slope_ratio <= factor


def re_bound_check(graphs, split: BudgetSplit,
                   kind: EstimatorKind = EstimatorKind.TRI_TR,
                   trials: int = 20, alpha: int = 20, beta: float = 0.01,
                   seed: int = 0) -> ReTrendReport:
    """Run an estimator across a graph family ordered by average degree and
    compare the measured median relative error with the bound shape."""
    from .estimators import tri_mtr, tri_tr  # local import avoids a cycle

    if isinstance(graphs, Graph):
        graphs = [graphs]
    graphs = sorted(graphs, key=lambda g: 2.0 * g.num_edges / max(g.n, 1))
    if kind is EstimatorKind.TRI_TR:
        runner = tri_tr
    elif kind is EstimatorKind.TRI_MTR:
        runner = tri_mtr
    else:
        raise ValueError(f"no relative-error shape for {kind}")

    points = []
    for gi, g in enumerate(graphs):
        d_avg = 2.0 * g.num_edges / g.n
        bound = re_bound(kind, g.n, d_avg, split).total
        truth = exact_count(g, kind.target)
        if truth == 0:
            points.append(ReTrendPoint(g.n, d_avg, bound, None))
            continue
        values = [
            runner(g, split, alpha=alpha, beta=beta,
                   seed=seed + 1000 * gi, trial=t).value
            for t in range(trials)
        ]
        stats = trial_statistics(values, truth)
        points.append(ReTrendPoint(g.n, d_avg, bound, stats.median_re))

    bounds = [pt.bound for pt in points]
    monotone_bound = all(b2 <= b1 * (1 + 1e-12)
                         for b1, b2 in zip(bounds, bounds[1:]))
    defined = [pt for pt in points if pt.median_re is not None]
    if len(defined) >= 2:
        res = [pt.median_re for pt in defined]
        monotone_re = all(r2 < r1 for r1, r2 in zip(res, res[1:]))
        logs_b = np.log([pt.bound for pt in defined])
        logs_r = np.log(np.maximum(res, 1e-300))
        denom = float(np.sum((logs_b - logs_b.mean()) ** 2))
        if denom > 0:
            slope = float(
                np.sum((logs_b - logs_b.mean()) * (logs_r - logs_r.mean()))
                / denom)
        else:
            slope = None
        slope_ratio = slope
    else:
        monotone_re = None
        slope_ratio = None
    return ReTrendReport(kind, tuple(points), monotone_bound, monotone_re,
                         slope_ratio)
