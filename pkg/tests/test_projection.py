"""Per-user edge trimming behind a noisy degree cap."""

import math

import numpy as np
import pytest

from namcount import erdos_renyi, graph_projection, project_all
from namcount.mechanisms import Stage, stream


def _rng(seed, user, trial=0):
    return stream(seed, Stage.PROJECT, user, trial)


def test_noiseless_cap_is_margin_plus_degree():
    nei = np.arange(5, dtype=np.int64)
    view = graph_projection(7, nei, math.inf, 3, _rng(0, 7))
    # cap = alpha + max(d + Lap, 0); Lap degenerates to 0 at infinite budget
    assert view.noisy_degree == pytest.approx(3 + 5)
    assert np.array_equal(view.row, nei)
    assert view.removed == 0


def test_margin_absorbs_moderate_noise_keeping_all_edges():
    nei = np.arange(10, dtype=np.int64)
    kept = [graph_projection(u, nei, 1.0, 20, _rng(3, u)) for u in range(50)]
    assert all(v.removed == 0 for v in kept)
    assert all(np.array_equal(v.row, nei) for v in kept)


def test_heavy_negative_noise_trims_to_the_cap():
    """With a tiny budget the Laplace tail drops below -alpha and the row is
    cut to the published cap; seed chosen to hit that tail."""
    nei = np.arange(12, dtype=np.int64)
    view = graph_projection(0, nei, 0.05, 1, _rng(12, 0))
    assert view.removed == 11
    assert len(view.row) == 1
    assert view.removed == 12 - len(view.row)
    assert set(view.row) <= set(nei.tolist())
    assert len(view.row) == int(view.noisy_degree)


def test_noisy_degree_cap_distribution():
    """Published caps are floor(alpha + max(d + Lap, 0)): integral, never
    below the margin, centered half a unit under alpha + d."""
    nei = np.arange(6, dtype=np.int64)
    trials = 5000
    draws = np.array([
        graph_projection(2, nei, 1.0, 20, _rng(1, 2, t)).noisy_degree
        for t in range(trials)
    ])
    assert issubclass(draws.dtype.type, np.integer)
    assert draws.min() >= 20
    assert len(np.unique(draws)) > 3
    se = math.sqrt(2.0 / trials)
    assert np.mean(draws) == pytest.approx(25.5, abs=0.1 + 5 * se)


def test_projection_deterministic_per_stream():
    nei = np.arange(8, dtype=np.int64)
    a = graph_projection(3, nei, 0.5, 4, _rng(9, 3))
    b = graph_projection(3, nei, 0.5, 4, _rng(9, 3))
    assert np.array_equal(a.row, b.row)
    assert a.noisy_degree == b.noisy_degree


def test_project_all_consistency():
    g = erdos_renyi(25, 0.3, seed=5)
    res = project_all(g, 1.0, 20, seed=4)
    rows = res.rows()
    assert len(rows) == g.n
    indptr, indices = res.csr()
    for u in range(g.n):
        assert np.array_equal(indices[indptr[u]:indptr[u + 1]], rows[u])
        assert set(rows[u].tolist()) <= set(g.neighbors(u).tolist())
    degs = [v.noisy_degree for v in res.views]
    assert np.array_equal(res.noisy_degrees, np.array(degs))
    assert res.noisy_degree_max == max(degs)


def test_project_all_empty_graph():
    from namcount import Graph
    g = Graph.from_edges(4, [])
    res = project_all(g, 1.0, 20, seed=0)
    indptr, indices = res.csr()
    assert indices.size == 0
    assert np.array_equal(indptr, np.zeros(5, dtype=indptr.dtype))
