"""Noisy adjacency matrix construction, its algebra, and serialization."""

import math

import numpy as np
import pytest

from namcount import (
    MatMulStrategy,
    NoisyAdjacencyMatrix,
    erdos_renyi,
    gnam,
    load_nam,
    save_nam,
    square,
    trace_cube,
)
from namcount.mechanisms import Mechanism, MechanismKind, entry_variance

from _oracles import rr_points


@pytest.fixture(scope="module")
def rr1():
    return Mechanism(MechanismKind.RR, 1.0)


def test_gnam_is_symmetric_with_zero_diagonal(rr1):
    g = erdos_renyi(12, 0.4, seed=2)
    nam = gnam(g, rr1, seed=5)
    assert nam.entries.shape == (12, 12)
    assert np.array_equal(nam.entries, nam.entries.T)
    assert not nam.entries.diagonal().any()
    assert nam.sigma2 == pytest.approx(entry_variance(MechanismKind.RR, 1.0))


def test_gnam_bit_mechanism_emits_the_two_unbiased_values(rr1):
    g = erdos_renyi(10, 0.5, seed=3)
    nam = gnam(g, rr1, seed=7)
    _, hi, lo = rr_points(1.0)
    off = nam.entries[np.triu_indices(10, 1)]
    assert set(np.round(off, 12)) <= {round(hi, 12), round(lo, 12)}


def test_gnam_reproducible_per_seed_and_trial(rr1):
    g = erdos_renyi(10, 0.4, seed=1)
    a = gnam(g, rr1, seed=4, trial=2).entries
    assert np.array_equal(a, gnam(g, rr1, seed=4, trial=2).entries)
    assert not np.array_equal(a, gnam(g, rr1, seed=4, trial=3).entries)
    assert not np.array_equal(a, gnam(g, rr1, seed=5, trial=2).entries)


def test_gnam_pair_randomness_is_local_to_its_owner(rr1):
    """Each unordered pair is perturbed by its higher-index endpoint, and a
    user's draw positions are fixed, so editing one user's row elsewhere
    leaves every other pair's output unchanged."""
    g1 = erdos_renyi(12, 0.4, seed=6)
    edges = {tuple(e) for e in map(tuple, g1.edges)}
    flip = (0, 5) if (0, 5) in edges else None
    if flip is None:
        edges.add((0, 5))
    else:
        edges.remove(flip)
    from namcount import Graph
    g2 = Graph.from_edges(12, sorted(edges))
    m1 = gnam(g1, rr1, seed=9).entries
    m2 = gnam(g2, rr1, seed=9).entries
    diff = np.argwhere(m1 != m2)
    assert all((i, j) in ((0, 5), (5, 0)) for i, j in map(tuple, diff))


def test_gnam_unbiased_per_entry(rr1):
    g = erdos_renyi(8, 0.5, seed=11)
    a = g.adjacency(np.float64)
    trials = 4000
    acc = np.zeros_like(a)
    for t in range(trials):
        acc += gnam(g, rr1, seed=13, trial=t).entries
    mean = acc / trials
    sd = math.sqrt(rr1.sigma2 / trials)
    off = ~np.eye(8, dtype=bool)
    assert np.all(np.abs(mean - a)[off] < 5 * sd)


def test_laplace_gnam_perturbs_continuously():
    g = erdos_renyi(10, 0.4, seed=2)
    m = Mechanism(MechanismKind.LAPLACE, 2.0)
    nam = gnam(g, m, seed=1)
    off = nam.entries[np.triu_indices(10, 1)]
    assert nam.sigma2 == pytest.approx(0.5)
    assert len(np.unique(off)) == off.size  # continuous noise: all distinct


def test_square_and_trace_cube_match_numpy(rr1):
    g = erdos_renyi(20, 0.35, seed=4)
    nam = gnam(g, rr1, seed=3)
    want_sq = nam.entries @ nam.entries
    want_tr = float(np.trace(want_sq @ nam.entries))
    for strategy in (MatMulStrategy(kind="blocked", block=7),
                     MatMulStrategy(kind="blocked", block=64),
                     MatMulStrategy(kind="naive", block=64)):
        assert np.allclose(square(nam, strategy), want_sq, rtol=1e-10)
        assert trace_cube(nam, strategy) == pytest.approx(want_tr, rel=1e-10)


def test_noiseless_limit_reproduces_the_adjacency():
    g = erdos_renyi(9, 0.5, seed=8)
    nam = gnam(g, Mechanism(MechanismKind.RR, math.inf), seed=1)
    assert np.array_equal(nam.entries, g.adjacency(np.float64))


def test_save_load_round_trip(tmp_path, rr1):
    g = erdos_renyi(11, 0.4, seed=5)
    nam = gnam(g, rr1, seed=2)
    path = tmp_path / "nam.npz"
    save_nam(nam, path)
    assert np.array_equal(load_nam(path), nam.entries)
