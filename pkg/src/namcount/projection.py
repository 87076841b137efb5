"""Degree-capped neighbor rows released through noisy degrees.

Each user adds Laplace noise to its degree, inflates by a public slack
``alpha``, floors, and removes uniformly chosen neighbors if the noisy degree
came out below the true one.  The released row never exceeds the noisy
degree, which later rounds may use as a public clamp scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accounting import RunTrace
from .graphs import Graph
from .mechanisms import Stage, laplace_sample, stream

__all__ = ["ProjectedView", "ProjectionResult", "graph_projection", "project_all"]


@dataclass(frozen=True)
class ProjectedView:
    """One user's released row after degree projection."""

    user: int
    row: np.ndarray  # sorted retained neighbors
    noisy_degree: int
    removed: int


@dataclass(frozen=True)
class ProjectionResult:
    views: tuple[ProjectedView, ...]
    noisy_degrees: np.ndarray

    @property
    def noisy_degree_max(self) -> int:
        return int(self.noisy_degrees.max())

    def rows(self) -> list[np.ndarray]:
        return [v.row for v in self.views]

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        lengths = np.array([v.row.shape[0] for v in self.views], dtype=np.int64)
        indptr = np.zeros(lengths.shape[0] + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        if indptr[-1]:
            indices = np.concatenate([v.row for v in self.views])
        else:
            indices = np.empty(0, dtype=np.int64)
        return indptr, np.ascontiguousarray(indices, dtype=np.int64)


def _check_projection_params(eps0: float, alpha: int) -> tuple[float, int]:
    eps0 = float(eps0)
    if math.isnan(eps0) or eps0 <= 0.0:
        raise ValueError(f"projection budget must be positive, got {eps0}")
    if int(alpha) != alpha or alpha < 0:
        raise ValueError(f"alpha must be a non-negative integer, got {alpha}")
    return eps0, int(alpha)


def graph_projection(user: int, neighbors: np.ndarray, eps0: float, alpha: int,
                     rng: np.random.Generator) -> ProjectedView:
    """Project one user's neighbor row.

    The noisy degree is ``floor(alpha + max(degree + Laplace(1/eps0), 0))``;
    if it fell below the true degree, the surplus neighbors are removed
    uniformly at random (partial shuffle of the row).
    """
    eps0, alpha = _check_projection_params(eps0, alpha)
    neighbors = np.asarray(neighbors, dtype=np.int64)
    d = neighbors.shape[0]
    noise = 0.0 if math.isinf(eps0) else float(laplace_sample(1.0 / eps0, rng))
    noisy_degree = int(math.floor(alpha + max(d + noise, 0.0)))
    if noisy_degree < d:
        perm = rng.permutation(d)
        kept = np.sort(neighbors[perm[:noisy_degree]])
        removed = d - noisy_degree
    else:
        kept = neighbors
        removed = 0
    return ProjectedView(user=user, row=kept, noisy_degree=noisy_degree,
                         removed=removed)


def project_all(g: Graph, eps0: float, alpha: int, seed: int, trial: int = 0,
                trace: RunTrace | None = None) -> ProjectionResult:
    """Run degree projection for every user with per-user streams."""
    views = []
    for u in range(g.n):
        rng = stream(seed, Stage.PROJECT, user=u, trial=trial)
        view = graph_projection(u, g.neighbors(u), eps0, alpha, rng)
        views.append(view)
        if trace is not None:
            trace.upload("projection", u, nbytes=8, eps=eps0)
    degrees = np.array([v.noisy_degree for v in views], dtype=np.int64)
    return ProjectionResult(views=tuple(views), noisy_degrees=degrees)
