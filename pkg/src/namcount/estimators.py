"""Private subgraph-count estimators over noisy adjacency matrices.

Five estimators cover three subgraph families:

* ``tri_or``   - one-round triangles from the trace of the cubed noisy matrix
* ``tri_tr``   - two-round triangles; users download the whole noisy matrix
* ``tri_mtr``  - two-round triangles; users download one column of its square
* ``qua_tr``   - two-round quadrangles from the squared noisy matrix
* ``two_star`` - 2-stars straight from the projected noisy degrees

The two-round estimators run in up to four ablation stages controlled by
:class:`StageMask`: spend the whole budget on row perturbation, reserve part
of it, add degree projection (which enables clamping of the second-round
sums), and finally add the second-round response noise.  Clamp scales come
from :func:`delta_f`, a normal-quantile bound on how much one neighbor can
shift a user's sum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .accounting import BudgetLedger, RunTrace, download_cost
from .graphs import Graph, SubgraphKind
from .mechanisms import (
    Mechanism,
    MechanismKind,
    Stage,
    entry_variance,
    laplace_sample,
    normal_quantile,
    stream,
)
from .nam import DEFAULT_STRATEGY, MatMulStrategy, gnam, square, trace_cube
from .projection import ProjectionResult, project_all

__all__ = [
    "EstimatorKind",
    "BudgetSplit",
    "StageMask",
    "Estimate",
    "JointEstimate",
    "delta_f",
    "tri_or",
    "tri_tr",
    "tri_mtr",
    "qua_tr",
    "two_star",
    "two_star_unclamped",
    "joint_estimate",
]


class EstimatorKind(enum.Enum):
    TRI_OR = "tri-or"
    TRI_TR = "tri-tr"
    TRI_MTR = "tri-mtr"
    QUA_TR = "qua-tr"
    TWO_STAR = "two-star"

    @property
    def target(self) -> SubgraphKind:
        if self in (EstimatorKind.TRI_OR, EstimatorKind.TRI_TR, EstimatorKind.TRI_MTR):
            return SubgraphKind.TRIANGLE
        if self is EstimatorKind.QUA_TR:
            return SubgraphKind.QUADRANGLE
        return SubgraphKind.TWO_STAR


@dataclass(frozen=True)
class BudgetSplit:
    """Additive privacy budget parts: projection, perturbation, responses."""

    eps0: float
    eps1: float
    eps2: float
    eps3: float = 0.0

    def __post_init__(self):
        for name in ("eps0", "eps1", "eps2", "eps3"):
            val = getattr(self, name)
            if math.isnan(val) or val < 0.0:
                raise ValueError(f"{name} must be non-negative, got {val}")
        if self.total <= 0.0:
            raise ValueError("total budget must be positive")

    @property
    def total(self) -> float:
        return self.eps0 + self.eps1 + self.eps2 + self.eps3

    @classmethod
    def from_total(cls, eps: float, fractions: Sequence[float] = (0.1, 0.8, 0.1),
                   ) -> "BudgetSplit":
        """Split a total budget by fractions (three or four parts)."""
        if math.isinf(eps):
            parts = [math.inf if f > 0 else 0.0 for f in fractions]
        else:
            parts = [eps * f for f in fractions]
        if len(parts) == 3:
            parts.append(0.0)
        if len(parts) != 4:
            raise ValueError("fractions must have three or four entries")
        return cls(*parts)


@dataclass(frozen=True)
class StageMask:
    """Ablation switches for the two-round estimators.

    Stage 1 spends everything on row perturbation; stage 2 reserves the
    configured split; stage 3 adds degree projection and clamping; stage 4
    adds the second-round response noise.
    """

    reduce_eps1: bool = True
    apply_projection: bool = True
    add_second_noise: bool = True

    def __post_init__(self):
        if self.apply_projection and not self.reduce_eps1:
            raise ValueError("projection requires a reserved budget split")
        if self.add_second_noise and not self.apply_projection:
            raise ValueError("second-round noise requires projection bounds")

    @classmethod
    def stage(cls, k: int) -> "StageMask":
        if k == 1:
            return cls(False, False, False)
        if k == 2:
            return cls(True, False, False)
        if k == 3:
            return cls(True, True, False)
        if k == 4:
            return cls(True, True, True)
        raise ValueError(f"stage must be 1..4, got {k}")

    @property
    def stage_number(self) -> int:
        return 1 + self.reduce_eps1 + self.apply_projection + self.add_second_noise


FULL_PIPELINE = StageMask.stage(4)


@dataclass
class Estimate:
    """One estimator output with its accounting."""

    kind: EstimatorKind
    value: float
    download_bytes: int
    ledger: BudgetLedger
    clamp_events: int = 0
    clamp_opportunities: int = 0

    @property
    def clamp_fraction(self) -> float:
        if self.clamp_opportunities == 0:
            return 0.0
        return self.clamp_events / self.clamp_opportunities


@dataclass
class JointEstimate:
    """Triangle, quadrangle, and 2-star estimates from one shared run."""

    triangles: Estimate
    quadrangles: Estimate
    two_stars: Estimate
    ledger: BudgetLedger = field(default=None)  # shared across the three
    download_bytes: int = 0


def delta_f(kind: EstimatorKind, d_tilde, d_tilde_max: float, n: int,
            sigma2: float, beta: float):
    """Per-user clamp scale: a (1-beta) normal-quantile bound on the change
    one added or removed neighbor can cause in the user's second-round sum.

    ``d_tilde`` may be a scalar or an array of noisy degrees.  For the
    quadrangle estimator, ``d_tilde_max`` is the public plug-in for the
    maximum true degree (callers pass noisy-degree max minus alpha).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    d_tilde = np.asarray(d_tilde, dtype=np.float64)
    if (d_tilde < 0).any():
        raise ValueError("noisy degrees must be non-negative")
    q = normal_quantile(1.0 - beta)
    if kind is EstimatorKind.TRI_TR:
        return q * np.sqrt(d_tilde * sigma2) + d_tilde
    if kind is EstimatorKind.TRI_MTR:
        inner = (n - 2) * sigma2 * sigma2 + (d_tilde + d_tilde_max) * sigma2
        return q * np.sqrt(inner) + d_tilde
    if kind is EstimatorKind.QUA_TR:
        cap = max(float(d_tilde_max), 0.0)
        inner = d_tilde * (2.0 * cap * sigma2 + (n - 2) * sigma2 * sigma2)
        raw = q * np.sqrt(inner) + d_tilde * (cap - 1.0)
        return np.maximum(raw, 0.0)
    raise ValueError(f"no clamp scale is defined for {kind}")


# ---------------------------------------------------------------------------
# shared round plumbing
# ---------------------------------------------------------------------------

@dataclass
class _Round1:
    rows: list
    indptr: np.ndarray
    indices: np.ndarray
    projection: ProjectionResult | None
    eps1_effective: float


def _first_round(g: Graph, split: BudgetSplit, alpha: int, mask: StageMask,
                 ledger: BudgetLedger, seed: int, trial: int,
                 trace: RunTrace | None) -> _Round1:
    if mask.apply_projection:
        if split.eps0 <= 0:
            raise ValueError("projection requires eps0 > 0")
        proj = project_all(g, split.eps0, alpha, seed, trial, trace)
        ledger.charge("projection", split.eps0)
        indptr, indices = proj.csr()
        rows = proj.rows()
    else:
        proj = None
        indptr, indices = g.indptr, g.indices
        rows = g.neighbor_rows()
    eps1 = split.eps1 if mask.reduce_eps1 else split.total
    if eps1 <= 0:
        raise ValueError("perturbation requires a positive budget")
    return _Round1(rows, indptr, indices, proj, eps1)


def _respond(sums: np.ndarray, bounds: np.ndarray, eps2: float, seed: int,
             trial: int, stage: Stage) -> np.ndarray:
    """Add per-user Laplace noise of scale bounds/eps2 from per-user streams."""
    if eps2 <= 0:
        raise ValueError("second-round noise requires eps2 > 0")
    if math.isinf(eps2):
        return sums
    out = sums.copy()
    for u in range(sums.shape[0]):
        scale = bounds[u] / eps2
        if scale > 0.0:
            rng = stream(seed, stage, user=u, trial=trial)
            out[u] += float(laplace_sample(scale, rng))
    return out


def _record_downloads(trace: RunTrace | None, stage: str, n: int,
                      nbytes_per_user: int) -> None:
    if trace is None or nbytes_per_user == 0:
        return
    for u in range(n):
        trace.download(stage, u, nbytes_per_user)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def tri_or(g: Graph, eps: float, mech_kind: MechanismKind = MechanismKind.RR,
           strategy: MatMulStrategy = DEFAULT_STRATEGY, seed: int = 0,
           trial: int = 0, trace: RunTrace | None = None) -> Estimate:
    """One-round triangle estimate: trace of the cubed noisy matrix over six."""
    ledger = BudgetLedger(cap=eps)
    mech = Mechanism(mech_kind, eps)
    nam_ = gnam(g, mech, seed, trial, trace)
    ledger.charge("perturbation", eps)
    value = trace_cube(nam_, strategy) / 6.0
    return Estimate(EstimatorKind.TRI_OR, value, download_cost("tri-or", g.n), ledger)


def _two_round_common(g, split, alpha, beta, mech_kind, mask, seed, trial, trace):
    ledger = BudgetLedger(cap=split.total)
    r1 = _first_round(g, split, alpha, mask, ledger, seed, trial, trace)
    mech = Mechanism(mech_kind, r1.eps1_effective)
    nam_ = gnam(r1.rows, mech, seed, trial, trace)
    ledger.charge("perturbation", r1.eps1_effective)
    return ledger, r1, mech, nam_


def tri_tr(g: Graph, split: BudgetSplit, alpha: int = 20, beta: float = 0.01,
           mech_kind: MechanismKind = MechanismKind.RR,
           strategy: MatMulStrategy = DEFAULT_STRATEGY,
           mask: StageMask = FULL_PIPELINE, seed: int = 0, trial: int = 0,
           trace: RunTrace | None = None) -> Estimate:
    """Two-round triangle estimate from the full downloaded noisy matrix.

    Each user sums the noisy entries between its own neighbor pairs (clamped
    when projection bounds exist), doubles the sum after adding response
    noise, and the collector divides the total by six.
    """
    ledger, r1, mech, nam_ = _two_round_common(
        g, split, alpha, beta, mech_kind, mask, seed, trial, trace)
    n = g.n
    _record_downloads(trace, "matrix-download", n, download_cost("tri-tr", n))
    if r1.projection is not None:
        bounds = delta_f(EstimatorKind.TRI_TR, r1.projection.noisy_degrees,
                         r1.projection.noisy_degree_max, n, mech.sigma2, beta)
    else:
        bounds = np.full(n, np.inf)
    sums, clamped, terms = kernels.pair_sums(
        r1.indptr, r1.indices, nam_.entries, bounds, subtract_one=False)
    if mask.add_second_noise:
        sums = _respond(sums, bounds, split.eps2, seed, trial, Stage.RESPOND)
        ledger.charge("response", split.eps2)
    value = 2.0 * float(sums.sum()) / 6.0
    return Estimate(EstimatorKind.TRI_TR, value, download_cost("tri-tr", n),
                    ledger, int(clamped.sum()), int(terms.sum()))


def tri_mtr(g: Graph, split: BudgetSplit, alpha: int = 20, beta: float = 0.01,
            mech_kind: MechanismKind = MechanismKind.RR,
            strategy: MatMulStrategy = DEFAULT_STRATEGY,
            mask: StageMask = FULL_PIPELINE, seed: int = 0, trial: int = 0,
            trace: RunTrace | None = None) -> Estimate:
    """Two-round triangle estimate from one downloaded column of the square.

    The collector squares the noisy matrix; each user clamps and sums its
    own column entries over its neighbors, adds response noise, and the
    collector divides the total by six.
    """
    ledger, r1, mech, nam_ = _two_round_common(
        g, split, alpha, beta, mech_kind, mask, seed, trial, trace)
    n = g.n
    bsq = square(nam_, strategy)
    _record_downloads(trace, "column-download", n, download_cost("tri-mtr", n))
    if r1.projection is not None:
        bounds = delta_f(EstimatorKind.TRI_MTR, r1.projection.noisy_degrees,
                         r1.projection.noisy_degree_max, n, mech.sigma2, beta)
    else:
        bounds = np.full(n, np.inf)
    sums, clamped, terms = kernels.column_sums(r1.indptr, r1.indices, bsq, bounds)
    if mask.add_second_noise:
        sums = _respond(sums, bounds, split.eps2, seed, trial, Stage.RESPOND)
        ledger.charge("response", split.eps2)
    value = float(sums.sum()) / 6.0
    return Estimate(EstimatorKind.TRI_MTR, value, download_cost("tri-mtr", n),
                    ledger, int(clamped.sum()), int(terms.sum()))


def qua_tr(g: Graph, split: BudgetSplit, alpha: int = 20, beta: float = 0.01,
           mech_kind: MechanismKind = MechanismKind.RR,
           strategy: MatMulStrategy = DEFAULT_STRATEGY,
           mask: StageMask = FULL_PIPELINE, seed: int = 0, trial: int = 0,
           trace: RunTrace | None = None) -> Estimate:
    """Two-round quadrangle estimate from the downloaded squared matrix.

    Each user sums, over its neighbor pairs, the noisy 2-walk counts minus
    one (removing the walk through itself), clamps, doubles after response
    noise, and the collector divides the total by eight.
    """
    ledger, r1, mech, nam_ = _two_round_common(
        g, split, alpha, beta, mech_kind, mask, seed, trial, trace)
    n = g.n
    bsq = square(nam_, strategy)
    _record_downloads(trace, "matrix-download", n, download_cost("qua-tr", n))
    if r1.projection is not None:
        cap = r1.projection.noisy_degree_max - alpha
        bounds = delta_f(EstimatorKind.QUA_TR, r1.projection.noisy_degrees,
                         cap, n, mech.sigma2, beta)
    else:
        bounds = np.full(n, np.inf)
    sums, clamped, terms = kernels.pair_sums(
        r1.indptr, r1.indices, bsq, bounds, subtract_one=True)
    if mask.add_second_noise:
        sums = _respond(sums, bounds, split.eps2, seed, trial, Stage.RESPOND)
        ledger.charge("response", split.eps2)
    value = 2.0 * float(sums.sum()) / 8.0
    return Estimate(EstimatorKind.QUA_TR, value, download_cost("qua-tr", n),
                    ledger, int(clamped.sum()), int(terms.sum()))


def _two_star_value(noisy_degrees: np.ndarray, alpha: int, eps0: float) -> float:
    shifted = noisy_degrees.astype(np.float64) - alpha
    correction = 0.0 if math.isinf(eps0) else 2.0 / (eps0 * eps0)
    return float(np.sum(shifted * (shifted - 1.0) - correction))


def two_star(g: Graph, eps0: float, alpha: int = 20, seed: int = 0,
             trial: int = 0, trace: RunTrace | None = None) -> Estimate:
    """2-star estimate from the projected noisy degrees alone.

    Counts ordered pairs of distinct edges at a common center.  The noisy
    degree of each user, shifted back by alpha, estimates its degree; the
    product form is debiased by the Laplace second moment.
    """
    ledger = BudgetLedger(cap=eps0)
    proj = project_all(g, eps0, alpha, seed, trial, trace)
    ledger.charge("projection", eps0)
    value = _two_star_value(proj.noisy_degrees, alpha, eps0)
    return Estimate(EstimatorKind.TWO_STAR, value,
                    download_cost("two-star", g.n), ledger)


def two_star_unclamped(g: Graph, eps0: float, seed: int = 0, trial: int = 0) -> float:
    """Reference 2-star estimator without flooring or slack: exactly unbiased.

    Uses raw noisy degrees d + Laplace(1/eps0) and the same second-moment
    debiasing; this is the variant the closed-form error analysis describes.
    """
    if math.isnan(eps0) or eps0 <= 0:
        raise ValueError(f"eps0 must be positive, got {eps0}")
    d = g.degrees.astype(np.float64)
    noisy = d.copy()
    if not math.isinf(eps0):
        for u in range(g.n):
            rng = stream(seed, Stage.PROJECT, user=u, trial=trial)
            noisy[u] += float(laplace_sample(1.0 / eps0, rng))
    correction = 0.0 if math.isinf(eps0) else 2.0 / (eps0 * eps0)
    return float(np.sum(noisy * (noisy - 1.0) - correction))


def joint_estimate(g: Graph, split: BudgetSplit, alpha: int = 20,
                   beta: float = 0.01,
                   mech_kind: MechanismKind = MechanismKind.RR,
                   strategy: MatMulStrategy = DEFAULT_STRATEGY, seed: int = 0,
                   trial: int = 0, triangle_from_matrix: bool = False,
                   trace: RunTrace | None = None) -> JointEstimate:
    """Estimate triangles, quadrangles, and 2-stars from one shared run.

    One projection and one row perturbation serve all three counts: 2-stars
    come free from the noisy degrees, triangles from the squared matrix
    column (or from the noisy matrix itself when ``triangle_from_matrix``),
    and quadrangles from the squared matrix, with separate response budgets
    ``eps2`` (triangles) and ``eps3`` (quadrangles).
    """
    if split.eps3 <= 0:
        raise ValueError("joint estimation requires eps3 > 0")
    n = g.n
    ledger = BudgetLedger(cap=split.total)
    mask = FULL_PIPELINE
    r1 = _first_round(g, split, alpha, mask, ledger, seed, trial, trace)
    mech = Mechanism(mech_kind, r1.eps1_effective)
    nam_ = gnam(r1.rows, mech, seed, trial, trace)
    ledger.charge("perturbation", r1.eps1_effective)
    proj = r1.projection
    bsq = square(nam_, strategy)

    cost_tag = "joint-adjacency" if triangle_from_matrix else "joint"
    total_bytes = download_cost(cost_tag, n)
    _record_downloads(trace, "matrix-download", n, total_bytes)

    # triangles
    if triangle_from_matrix:
        tri_kind = EstimatorKind.TRI_TR
        bounds = delta_f(tri_kind, proj.noisy_degrees, proj.noisy_degree_max,
                         n, mech.sigma2, beta)
        tsums, tclamped, tterms = kernels.pair_sums(
            r1.indptr, r1.indices, nam_.entries, bounds, subtract_one=False)
        tsums = _respond(tsums, bounds, split.eps2, seed, trial, Stage.RESPOND)
        tri_value = 2.0 * float(tsums.sum()) / 6.0
    else:
        tri_kind = EstimatorKind.TRI_MTR
        bounds = delta_f(tri_kind, proj.noisy_degrees, proj.noisy_degree_max,
                         n, mech.sigma2, beta)
        tsums, tclamped, tterms = kernels.column_sums(
            r1.indptr, r1.indices, bsq, bounds)
        tsums = _respond(tsums, bounds, split.eps2, seed, trial, Stage.RESPOND)
        tri_value = float(tsums.sum()) / 6.0
    ledger.charge("response", split.eps2)

    # quadrangles
    cap = proj.noisy_degree_max - alpha
    qbounds = delta_f(EstimatorKind.QUA_TR, proj.noisy_degrees, cap, n,
                      mech.sigma2, beta)
    qsums, qclamped, qterms = kernels.pair_sums(
        r1.indptr, r1.indices, bsq, qbounds, subtract_one=True)
    qsums = _respond(qsums, qbounds, split.eps3, seed, trial, Stage.RESPOND_SECOND)
    ledger.charge("response", split.eps3)
    qua_value = 2.0 * float(qsums.sum()) / 8.0

    # 2-stars ride along on the projection
    star_value = _two_star_value(proj.noisy_degrees, alpha, split.eps0)

    triangles = Estimate(tri_kind, tri_value, total_bytes, ledger,
                         int(tclamped.sum()), int(tterms.sum()))
    quadrangles = Estimate(EstimatorKind.QUA_TR, qua_value, total_bytes, ledger,
                           int(qclamped.sum()), int(qterms.sum()))
    two_stars = Estimate(EstimatorKind.TWO_STAR, star_value, total_bytes, ledger)
    return JointEstimate(triangles, quadrangles, two_stars, ledger, total_bytes)
