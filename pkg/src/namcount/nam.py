"""Noisy adjacency matrices assembled from independently perturbed rows.

Each user owns the adjacency bits toward lower-indexed vertices, perturbs
exactly those with the configured single-bit randomizer, and uploads them.
The collector symmetrizes the strict lower triangle, leaving every unordered
pair perturbed exactly once, the diagonal structurally zero, and every entry
an unbiased estimate of the true bit with known variance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .accounting import FLOAT_BYTES, RunTrace
from .graphs import Graph
from .mechanisms import Mechanism, MechanismKind, Stage, stream

__all__ = [
    "MatMulStrategy",
    "NoisyAdjacencyMatrix",
    "gnam",
    "square",
    "trace_cube",
    "save_nam",
    "load_nam",
]


@dataclass(frozen=True)
class MatMulStrategy:
    """Dense multiply strategy: straightforward or cache-blocked."""

    kind: str
    block: int = 64

    def __post_init__(self):
        if self.kind not in ("naive", "blocked"):
            raise ValueError(f"unknown matmul strategy: {self.kind!r}")
        if self.block <= 0:
            raise ValueError("block size must be positive")

    @classmethod
    def naive(cls) -> "MatMulStrategy":
        return cls("naive")

    @classmethod
    def blocked(cls, block: int = 64) -> "MatMulStrategy":
        return cls("blocked", block)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "naive":
            return kernels.matmul_naive(a, b)
        return kernels.matmul_blocked(a, b, self.block)


DEFAULT_STRATEGY = MatMulStrategy.blocked()


@dataclass(frozen=True)
class NoisyAdjacencyMatrix:
    """Symmetric zero-diagonal matrix of unbiased adjacency estimates."""

    entries: np.ndarray
    mechanism: Mechanism

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def sigma2(self) -> float:
        return self.mechanism.sigma2


def _as_rows(rows) -> tuple[Sequence[np.ndarray], int]:
    if isinstance(rows, Graph):
        return rows.neighbor_rows(), rows.n
    rows = list(rows)
    return rows, len(rows)


def gnam(rows, mech: Mechanism, seed: int, trial: int = 0,
         trace: RunTrace | None = None) -> NoisyAdjacencyMatrix:
    """Build the noisy adjacency matrix from per-user neighbor rows.

    ``rows`` is a :class:`Graph` or a sequence of sorted neighbor index
    arrays, one per user.  User ``u`` perturbs only its bits toward vertices
    ``i < u`` using its own randomness stream, so the result is reproducible
    per user and every unordered pair is touched exactly once.
    """
    neighbor_rows, n = _as_rows(rows)
    mat = np.zeros((n, n), dtype=np.float64)
    for u in range(1, n):
        nei = np.asarray(neighbor_rows[u])
        bits = np.zeros(u, dtype=np.uint8)
        lower = nei[nei < u]
        bits[lower] = 1
        rng = stream(seed, Stage.PERTURB, user=u, trial=trial)
        mat[u, :u] = mech.randomize_bits(bits, rng)
        if trace is not None:
            if mech.kind == MechanismKind.RR:
                nbytes = (u + 7) // 8  # one bit per perturbed entry
            else:
                nbytes = FLOAT_BYTES * u
            trace.upload("perturb", u, nbytes, eps=mech.eps)
            trace.mark_pairs(n, u, np.arange(u))
    mat += mat.T
    return NoisyAdjacencyMatrix(entries=mat, mechanism=mech)


def _entries(nam) -> np.ndarray:
    if isinstance(nam, NoisyAdjacencyMatrix):
        return nam.entries
    return np.asarray(nam, dtype=np.float64)


def square(nam, strategy: MatMulStrategy = DEFAULT_STRATEGY) -> np.ndarray:
    """The matrix of noisy 2-walk estimates: the noisy matrix times itself."""
    a = _entries(nam)
    return strategy.multiply(a, a)


def trace_cube(nam, strategy: MatMulStrategy = DEFAULT_STRATEGY) -> float:
    """Trace of the cubed noisy matrix.

    Computed as the Frobenius inner product of the square with the matrix
    itself (valid by symmetry), so the cube is never materialized.
    """
    a = _entries(nam)
    return float(kernels.frob_inner(square(a, strategy), a))


_MAGIC = b"NAMC"


def save_nam(nam, path) -> None:
    """Binary dump: magic, int64 n, then row-major little-endian float64."""
    a = _entries(nam)
    n = a.shape[0]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<q", n))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_nam(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValueError("not a noisy-matrix dump")
    (n,) = struct.unpack("<q", data[4:12])
    expect = 12 + 8 * n * n
    if len(data) != expect:
        raise ValueError(f"truncated dump: expected {expect} bytes, got {len(data)}")
    return np.frombuffer(data[12:], dtype="<f8").reshape(n, n).astype(np.float64)
