"""Undirected simple graphs and exact subgraph-count oracles.

Graphs are immutable once built: vertices are 0..n-1, edges are stored as a
deduplicated ``(m, 2)`` array with ``i < j`` per row, and adjacency is also
available in CSR form with sorted neighbor rows.  Exact counts for triangles,
quadrangles (4-cycles), and 2-stars come in two independent flavors: a
scalable oracle (:func:`exact_count`) and a subset-enumeration cross-check
(:func:`exact_count_bruteforce`) limited to small graphs.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "SubgraphKind",
    "ParseStats",
    "Graph",
    "parse_edge_list",
    "load_edge_list",
    "erdos_renyi",
    "exact_count",
    "exact_count_bruteforce",
    "two_step_counts",
]

BRUTEFORCE_MAX_NODES = 64


class SubgraphKind(enum.Enum):
    """Subgraph families the counters understand."""

    TRIANGLE = "triangle"
    QUADRANGLE = "quadrangle"
    TWO_STAR = "two-star"


@dataclass(frozen=True)
class ParseStats:
    """Cleanup counters reported by the edge-list parser."""

    self_loops_dropped: int
    duplicate_edges_merged: int


class Graph:
    """Immutable undirected simple graph.

    ``original_ids`` maps canonical vertex 0..n-1 back to the labels seen in
    the source file (first-appearance order); it is ``None`` for generated
    graphs whose labels are already canonical.
    """

    __slots__ = ("n", "edges", "indptr", "indices", "original_ids", "_dense")

    def __init__(self, n: int, edges: np.ndarray,
                 original_ids: Sequence[str] | None = None):
        if n <= 0:
            raise ValueError("graph must have at least one vertex")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.unique(np.column_stack([lo, hi]), axis=0)
        self.n = int(n)
        self.edges = edges
        self.edges.setflags(write=False)
        both = np.concatenate([edges, edges[:, ::-1]], axis=0) if edges.size \
            else np.empty((0, 2), dtype=np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.indptr, both[:, 0] + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = np.ascontiguousarray(both[:, 1])
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.original_ids = list(original_ids) if original_ids is not None else None
        self._dense = None

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n, np.array(list(pairs), dtype=np.int64).reshape(-1, 2))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor row of vertex ``u`` (read-only view)."""
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def neighbor_rows(self) -> list[np.ndarray]:
        return [self.neighbors(u) for u in range(self.n)]

    def adjacency(self, dtype=np.float64) -> np.ndarray:
        """Dense adjacency matrix copy in the requested dtype."""
        if self._dense is None:
            dense = np.zeros((self.n, self.n), dtype=np.uint8)
            if self.num_edges:
                dense[self.edges[:, 0], self.edges[:, 1]] = 1
                dense[self.edges[:, 1], self.edges[:, 0]] = 1
            dense.setflags(write=False)
            self._dense = dense
        return self._dense.astype(dtype)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        k = np.searchsorted(row, v)
        return bool(k < row.shape[0] and row[k] == v)

    def to_edge_list_text(self) -> str:
        """Canonical serialization: one ``i j`` pair per line, i < j, sorted."""
        lines = [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Graph(n={self.n}, m={self.num_edges})"


def parse_edge_list(text: str) -> tuple[Graph, ParseStats]:
    """Parse a whitespace-separated edge list.

    Accepts ``#`` comments and blank lines, arbitrary node labels (remapped to
    0..n-1 in first-appearance order), duplicate edges in either orientation
    (merged), and self-loops (dropped).  Raises ``ValueError`` naming the line
    for malformed rows and for input containing no vertices at all.
    """
    ids: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    loops = 0
    seen: set[tuple[int, int]] = set()
    dups = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(
                f"line {lineno}: expected two node labels, got {len(parts)}"
            )
        a = ids.setdefault(parts[0], len(ids))
        b = ids.setdefault(parts[1], len(ids))
        if a == b:
            loops += 1
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        pairs.append(key)
    if not ids:
        raise ValueError("empty graph: input contains no vertices")
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    graph = Graph(len(ids), edges, original_ids=list(ids))
    return graph, ParseStats(self_loops_dropped=loops, duplicate_edges_merged=dups)


def load_edge_list(path: str | Path) -> tuple[Graph, ParseStats]:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) sample; test and sweep helper."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must be in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.shape[0]) < p
    edges = np.column_stack([iu[mask], ju[mask]])
    return Graph(n, edges)


# ---------------------------------------------------------------------------
# exact oracles
# ---------------------------------------------------------------------------

def two_step_counts(g: Graph) -> np.ndarray:
    """Dense matrix of 2-walk counts (the square of the adjacency matrix).

    Entry (i, j) counts common neighbors of i and j; the diagonal carries the
    degrees.  Computed in float64 and converted: every partial sum is an
    integer below n, far inside the exactly-representable range.
    """
    a = g.adjacency(np.float64)
    return np.dot(a, a).astype(np.int64)


def _triangles_exact(g: Graph) -> int:
    return kernels.triangle_count(g.indptr, g.indices)


def _quadrangles_exact(g: Graph) -> int:
    # Closed 4-walks decompose into 4-cycles (8 ways each), degree pendulums,
    # and 2-path round trips:  tr(A^4) = 8*q + 2*sum(d^2) - 2*m.
    b = two_step_counts(g).astype(np.float64)
    walk4 = float(np.einsum("ij,ij->", b, b))
    d = g.degrees.astype(np.float64)
    q = (walk4 + 2.0 * g.num_edges - 2.0 * float(np.dot(d, d))) / 8.0
    return int(round(q))


def _two_stars_exact(g: Graph) -> int:
    d = g.degrees.astype(np.int64)
    return int(np.sum(d * (d - 1)))


def exact_count(g: Graph, kind: SubgraphKind) -> int:
    """Exact subgraph count via counting identities (no noise anywhere)."""
    if kind == SubgraphKind.TRIANGLE:
        return _triangles_exact(g)
    if kind == SubgraphKind.QUADRANGLE:
        return _quadrangles_exact(g)
    if kind == SubgraphKind.TWO_STAR:
        return _two_stars_exact(g)
    raise ValueError(f"unknown subgraph kind: {kind}")


def exact_count_bruteforce(g: Graph, kind: SubgraphKind) -> int:
    """Independent subset-enumeration counter, guarded to n <= 64."""
    if g.n > BRUTEFORCE_MAX_NODES:
        raise ValueError(
            f"bruteforce oracle is limited to n <= {BRUTEFORCE_MAX_NODES}"
        )
    adj = g.adjacency(np.uint8)
    if kind == SubgraphKind.TRIANGLE:
        total = 0
        for a, b, c in itertools.combinations(range(g.n), 3):
            if adj[a, b] and adj[a, c] and adj[b, c]:
                total += 1
        return total
    if kind == SubgraphKind.QUADRANGLE:
        total = 0
        for a, b, c, d in itertools.combinations(range(g.n), 4):
            # the three ways to close a 4-cycle on a fixed vertex set
            if adj[a, b] and adj[b, c] and adj[c, d] and adj[d, a]:
                total += 1
            if adj[a, c] and adj[c, b] and adj[b, d] and adj[d, a]:
                total += 1
            if adj[a, b] and adj[b, d] and adj[d, c] and adj[c, a]:
                total += 1
        return total
    if kind == SubgraphKind.TWO_STAR:
        total = 0
        for u in range(g.n):
            nei = g.neighbors(u)
            for v, w in itertools.permutations(nei, 2):
                if v != w:
                    total += 1
        return total
    raise ValueError(f"unknown subgraph kind: {kind}")
