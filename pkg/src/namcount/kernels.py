"""Numeric kernels with numba and pure-numpy implementations.

Every public function dispatches on :mod:`namcount.backend`.  The  ``_nb``
variants are compiled with numba when available; the ``_np`` variants are the
fallback and the reference for cross-checking.  All matrices are row-major
float64; neighbor structure arrives as CSR ``(indptr, indices)`` with each
row's indices sorted ascending.
"""

from __future__ import annotations

import numpy as np

from . import backend

__all__ = [
    "matmul_naive",
    "matmul_blocked",
    "frob_inner",
    "pair_sums",
    "column_sums",
    "triangle_count",
]


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _matmul_naive_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Unblocked direct product; numpy delegates to its dot routine.
    return np.dot(a, b)


def _matmul_blocked_np(a: np.ndarray, b: np.ndarray, block: int) -> np.ndarray:
    n, kdim = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.float64)
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        for k0 in range(0, kdim, block):
            k1 = min(k0 + block, kdim)
            left = a[i0:i1, k0:k1]
            for j0 in range(0, m, block):
                j1 = min(j0 + block, m)
                out[i0:i1, j0:j1] += np.dot(left, b[k0:k1, j0:j1])
    return out


def _frob_inner_np(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("ij,ij->", a, b))


def _pair_sums_np(indptr, indices, mat, bounds, subtract_one):
    n = indptr.shape[0] - 1
    sums = np.zeros(n, dtype=np.float64)
    clamped = np.zeros(n, dtype=np.int64)
    terms = np.zeros(n, dtype=np.int64)
    for u in range(n):
        nei = indices[indptr[u]:indptr[u + 1]]
        d = nei.shape[0]
        terms[u] = d
        if d == 0:
            continue
        sub = mat[np.ix_(nei, nei)]
        if subtract_one:
            sub = sub - 1.0
        # Row r of the submatrix is neighbor nei[r]; columns left of r are the
        # lower-index neighbors, so the strict lower triangle gives the j < i sums.
        inner = np.tril(sub, -1).sum(axis=1)
        bound = bounds[u]
        over = np.abs(inner) > bound
        clamped[u] = int(np.count_nonzero(over))
        if clamped[u]:
            inner = np.clip(inner, -bound, bound)
        sums[u] = inner.sum()
    return sums, clamped, terms


def _column_sums_np(indptr, indices, mat, bounds):
    n = indptr.shape[0] - 1
    sums = np.zeros(n, dtype=np.float64)
    clamped = np.zeros(n, dtype=np.int64)
    terms = np.zeros(n, dtype=np.int64)
    for u in range(n):
        nei = indices[indptr[u]:indptr[u + 1]]
        terms[u] = nei.shape[0]
        if nei.shape[0] == 0:
            continue
        vals = mat[nei, u]
        bound = bounds[u]
        over = np.abs(vals) > bound
        clamped[u] = int(np.count_nonzero(over))
        if clamped[u]:
            vals = np.clip(vals, -bound, bound)
        sums[u] = vals.sum()
    return sums, clamped, terms


def _triangle_count_np(indptr, indices):
    n = indptr.shape[0] - 1
    total = 0
    for u in range(n):
        nei_u = indices[indptr[u]:indptr[u + 1]]
        for v in nei_u[nei_u > u]:
            nei_v = indices[indptr[v]:indptr[v + 1]]
            common = np.intersect1d(nei_u, nei_v, assume_unique=True)
            total += int(np.count_nonzero(common > v))
    return total


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if backend.HAS_NUMBA:
    import numba

    @numba.njit(cache=True, fastmath=True)
    def _matmul_naive_nb(a, b):
        n, kdim = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.float64)
        for i in range(n):
            for k in range(kdim):
                aik = a[i, k]
                if aik == 0.0:
                    continue
                for j in range(m):
                    out[i, j] += aik * b[k, j]
        return out

    @numba.njit(cache=True, fastmath=True)
    def _matmul_blocked_nb(a, b, block):
        n, kdim = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.float64)
        for i0 in range(0, n, block):
            i1 = min(i0 + block, n)
            for k0 in range(0, kdim, block):
                k1 = min(k0 + block, kdim)
                for j0 in range(0, m, block):
                    j1 = min(j0 + block, m)
                    for i in range(i0, i1):
                        for k in range(k0, k1):
                            aik = a[i, k]
                            for j in range(j0, j1):
                                out[i, j] += aik * b[k, j]
        return out

    @numba.njit(cache=True, fastmath=True)
    def _frob_inner_nb(a, b):
        n, m = a.shape
        total = 0.0
        for i in range(n):
            for j in range(m):
                total += a[i, j] * b[i, j]
        return total

    @numba.njit(cache=True)
    def _pair_sums_nb(indptr, indices, mat, bounds, subtract_one):
        n = indptr.shape[0] - 1
        sums = np.zeros(n, dtype=np.float64)
        clamped = np.zeros(n, dtype=np.int64)
        terms = np.zeros(n, dtype=np.int64)
        for u in range(n):
            lo = indptr[u]
            hi = indptr[u + 1]
            bound = bounds[u]
            s = 0.0
            for p in range(lo, hi):
                i = indices[p]
                inner = 0.0
                for q in range(lo, p):
                    inner += mat[i, indices[q]]
                if subtract_one:
                    inner -= p - lo
                if inner > bound:
                    inner = bound
                    clamped[u] += 1
                elif inner < -bound:
                    inner = -bound
                    clamped[u] += 1
                s += inner
            sums[u] = s
            terms[u] = hi - lo
        return sums, clamped, terms

    @numba.njit(cache=True)
    def _column_sums_nb(indptr, indices, mat, bounds):
        n = indptr.shape[0] - 1
        sums = np.zeros(n, dtype=np.float64)
        clamped = np.zeros(n, dtype=np.int64)
        terms = np.zeros(n, dtype=np.int64)
        for u in range(n):
            lo = indptr[u]
            hi = indptr[u + 1]
            bound = bounds[u]
            s = 0.0
            for p in range(lo, hi):
                v = mat[indices[p], u]
                if v > bound:
                    v = bound
                    clamped[u] += 1
                elif v < -bound:
                    v = -bound
                    clamped[u] += 1
                s += v
            sums[u] = s
            terms[u] = hi - lo
        return sums, clamped, terms

    @numba.njit(cache=True)
    def _triangle_count_nb(indptr, indices):
        n = indptr.shape[0] - 1
        total = 0
        for u in range(n):
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if v <= u:
                    continue
                # two-pointer intersection of the sorted rows, keeping w > v
                a = indptr[u]
                b = indptr[v]
                ahi = indptr[u + 1]
                bhi = indptr[v + 1]
                while a < ahi and b < bhi:
                    wa = indices[a]
                    wb = indices[b]
                    if wa < wb:
                        a += 1
                    elif wb < wa:
                        b += 1
                    else:
                        if wa > v:
                            total += 1
                        a += 1
                        b += 1
        return total


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def matmul_naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product ``a @ b`` via the unblocked strategy."""
    if backend.USE_NUMBA:
        return _matmul_naive_nb(a, b)
    return _matmul_naive_np(a, b)


def matmul_blocked(a: np.ndarray, b: np.ndarray, block: int = 64) -> np.ndarray:
    """Product ``a @ b`` via cache-blocked tiles of the given edge length."""
    if block <= 0:
        raise ValueError("block size must be positive")
    if backend.USE_NUMBA:
        return _matmul_blocked_nb(a, b, block)
    return _matmul_blocked_np(a, b, block)


def frob_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius inner product: sum of the elementwise products."""
    if backend.USE_NUMBA:
        return float(_frob_inner_nb(a, b))
    return _frob_inner_np(a, b)


def pair_sums(indptr, indices, mat, bounds, subtract_one: bool = False):
    """Per-user clamped sums over ordered neighbor pairs.

    For each user ``u`` with sorted neighbor row ``Nei``, computes

        sum_u = sum over i in Nei of clamp(inner_i, bounds[u])
        inner_i = sum over j in Nei with j < i of (mat[i, j] - subtract_one)

    Returns ``(sums, clamped, terms)`` where ``clamped[u]`` counts inner sums
    that exceeded the bound and ``terms[u]`` counts inner sums evaluated.
    A bound of ``inf`` disables clamping for that user.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    bounds = np.ascontiguousarray(bounds, dtype=np.float64)
    if backend.USE_NUMBA:
        return _pair_sums_nb(indptr, indices, mat, bounds, subtract_one)
    return _pair_sums_np(indptr, indices, mat, bounds, subtract_one)


def column_sums(indptr, indices, mat, bounds):
    """Per-user clamped sums of ``mat[i, u]`` over each user's neighbors ``i``.

    Same return convention as :func:`pair_sums`.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    bounds = np.ascontiguousarray(bounds, dtype=np.float64)
    if backend.USE_NUMBA:
        return _column_sums_nb(indptr, indices, mat, bounds)
    return _column_sums_np(indptr, indices, mat, bounds)


def triangle_count(indptr, indices) -> int:
    """Exact triangle count from sorted CSR adjacency."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if backend.USE_NUMBA:
        return int(_triangle_count_nb(indptr, indices))
    return _triangle_count_np(indptr, indices)
