"""Single-bit local randomizers, their exact moments, and RNG streams.

Two randomizers cover one adjacency bit each: symmetric bit flipping with
keep probability e^eps / (e^eps + 1), and additive Laplace noise of scale
1/eps.  Both admit unbiased post-processing with exactly known per-entry
variance, which the matrix estimators consume downstream.

Randomness is counter-based: :func:`stream` derives an independent Philox
generator from (seed, stage, user, trial), so any simulated user's draws can
be replayed in isolation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MechanismKind",
    "Mechanism",
    "Stage",
    "stream",
    "keep_probability",
    "rr_perturb",
    "rr_unbias",
    "rr_ldp_ratio",
    "laplace_sample",
    "entry_variance",
    "normal_quantile",
]


class MechanismKind(enum.Enum):
    RR = "rr"
    LAPLACE = "laplace"


class Stage(enum.IntEnum):
    """Stream labels for the protocol stages of one simulated round trip."""

    PROJECT = 1
    PERTURB = 2
    RESPOND = 3
    RESPOND_SECOND = 4
    GENERIC = 7


_MAX_STAGE = 1 << 8
_MAX_SUB = 1 << 28


def stream(seed: int, stage: int, user: int = 0, trial: int = 0) -> np.random.Generator:
    """Independent counter-based generator for (seed, stage, user, trial).

    The four fields are packed into a 128-bit Philox key, so streams never
    collide within their documented ranges and trials are reproducible
    user by user.
    """
    seed = int(seed)
    stage = int(stage)
    if not 0 <= seed < (1 << 64):
        raise ValueError("seed must fit in 64 bits")
    if not 0 <= stage < _MAX_STAGE:
        raise ValueError("stage out of range")
    if not 0 <= user < _MAX_SUB:
        raise ValueError("user index out of range")
    if not 0 <= trial < _MAX_SUB:
        raise ValueError("trial index out of range")
    key = (seed << 64) | (stage << 56) | (trial << 28) | user
    return np.random.Generator(np.random.Philox(key=key))


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if math.isnan(eps) or eps <= 0.0:
        raise ValueError(f"privacy budget must be positive, got {eps}")
    return eps


def keep_probability(eps: float) -> float:
    """Probability that bit flipping keeps the true bit: e^eps/(e^eps + 1)."""
    eps = _check_eps(eps)
    return 1.0 / (1.0 + math.exp(-eps))


def rr_ldp_ratio(eps: float) -> float:
    """Worst-case likelihood ratio of the implemented flipping probabilities."""
    p = keep_probability(eps)
    if p == 1.0:
        return math.inf
    return p / (1.0 - p)


def rr_perturb(bits: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Randomized response on an array of {0,1} bits."""
    eps = _check_eps(eps)
    bits = np.asarray(bits, dtype=np.uint8)
    if math.isinf(eps):
        return bits.copy()
    keep = rng.random(bits.shape) < keep_probability(eps)
    return np.where(keep, bits, 1 - bits).astype(np.uint8)


def rr_unbias(bits: np.ndarray, eps: float):
    """Unbiased real-valued decoding of flipped bits.

    Maps 1 to e^eps/(e^eps - 1) and 0 to -1/(e^eps - 1), which restores the
    original bit in expectation under :func:`rr_perturb`.
    """
    eps = _check_eps(eps)
    bits = np.asarray(bits)
    if math.isinf(eps):
        return bits.astype(np.float64)
    one_val = 1.0 / -math.expm1(-eps)
    zero_val = -1.0 / math.expm1(eps)
    return np.where(bits == 1, one_val, zero_val)


def laplace_sample(scale: float, rng: np.random.Generator, size=None):
    """Laplace(0, scale) draws via the inverse CDF on an open interval."""
    scale = float(scale)
    if not scale > 0.0:
        raise ValueError(f"laplace scale must be positive, got {scale}")
    u = rng.random(size)
    centered = u - 0.5
    mag = 1.0 - 2.0 * np.abs(centered)
    # u == 0.0 would hit log(0); nudge onto the open interval
    mag = np.maximum(mag, np.finfo(np.float64).tiny)
    return -scale * np.sign(centered) * np.log(mag)


def entry_variance(kind: MechanismKind, eps: float) -> float:
    """Exact variance of one unbiased released entry.

    Bit flipping: e^eps/(e^eps - 1)^2.  Laplace of scale 1/eps: 2/eps^2.
    The flipping variance is written as 1/(expm1(eps) * -expm1(-eps)), which
    is the same quantity arranged to stay finite for large budgets.
    """
    eps = _check_eps(eps)
    if kind == MechanismKind.RR:
        if math.isinf(eps):
            return 0.0
        return 1.0 / (math.expm1(eps) * -math.expm1(-eps))
    if kind == MechanismKind.LAPLACE:
        if math.isinf(eps):
            return 0.0
        return 2.0 / (eps * eps)
    raise ValueError(f"unknown mechanism kind: {kind}")


@dataclass(frozen=True)
class Mechanism:
    """A single-bit randomizer bound to a privacy budget."""

    kind: MechanismKind
    eps: float

    def __post_init__(self):
        _check_eps(self.eps)
        if not isinstance(self.kind, MechanismKind):
            raise ValueError(f"unknown mechanism kind: {self.kind}")

    @property
    def sigma2(self) -> float:
        return entry_variance(self.kind, self.eps)

    def randomize_bits(self, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Perturb an array of adjacency bits and return unbiased float entries."""
        bits = np.asarray(bits, dtype=np.uint8)
        if math.isinf(self.eps):
            return bits.astype(np.float64)
        if self.kind == MechanismKind.RR:
            return rr_unbias(rr_perturb(bits, self.eps, rng), self.eps)
        return bits.astype(np.float64) + laplace_sample(1.0 / self.eps, rng, bits.shape)


# ---------------------------------------------------------------------------
# standard normal quantile
# ---------------------------------------------------------------------------

_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02,
             -2.759285104469687e+02, 1.383577518672690e+02,
             -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02,
             -1.556989798598866e+02, 6.680131188771972e+01,
             -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01,
             -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01,
             2.445134137142996e+00, 3.754408661907416e+00)
_ACKLAM_LOW = 0.02425


def _acklam(p: float) -> float:
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if p < _ACKLAM_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - _ACKLAM_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF, accurate to well below 1e-9.

    A rational approximation supplies the starting point; one Newton step on
    the erfc-based CDF polishes it.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {p}")
    x = _acklam(p)
    cdf = 0.5 * math.erfc(-x / math.sqrt(2.0))
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        x -= (cdf - p) / pdf
    return x
