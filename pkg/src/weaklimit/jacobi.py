"""Jacobi matrices: truncations, Gauss rules, banded matrix powers, block fold."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError
from .recurrence import BilateralCoefficients, CoefficientSequence

__all__ = [
    "TridiagonalMatrix",
    "QuadratureRule",
    "tridiagonal_eigen",
    "null_vectors",
    "truncate",
    "gauss_quadrature",
    "moment_entry",
    "bilateral_moment",
    "fold_block",
    "window_convergence",
]


@dataclass(frozen=True)
class TridiagonalMatrix:
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        if len(self.diagonal) < 1 or len(self.offdiagonal) != len(self.diagonal) - 1:
            raise ValueError("need N >= 1 diagonal and N-1 off-diagonal entries")

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    def to_dense(self) -> np.ndarray:
        d = np.diag(self.diagonal)
        if self.dimension > 1:
            d += np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)
        return d


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def exactness_degree(self) -> int:
        return 2 * len(self.nodes) - 1

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def tridiagonal_eigen(diagonal, offdiagonal, rows: Sequence[int] = (0,),
                      tol: float = 1e-14, max_sweeps: int = 50):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    Only the requested ``rows`` of the eigenvector matrix are accumulated,
    which is all a Gauss rule (row 0) or a 2x2 spectral measure needs.

    Returns ``(eigenvalues, Z)`` with eigenvalues ascending and ``Z[r, i]``
    the component ``rows[r]`` of the i-th normalized eigenvector.
    """
    d = [float(v) for v in diagonal]
    n = len(d)
    e = [float(v) for v in offdiagonal] + [0.0]
    if len(e) != n:
        raise ValueError("offdiagonal must have length len(diagonal) - 1")
    z = []
    for r in rows:
        if not 0 <= r < n:
            raise IndexError(f"row {r} outside 0..{n - 1}")
        row = [0.0] * n
        row[r] = 1.0
        z.append(row)

    norm = max((abs(d[i]) + abs(e[i]) + (abs(e[i - 1]) if i else 0.0) for i in range(n)), default=0.0)
    small = tol * norm
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= small or abs(e[m]) <= 2.2e-16 * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if sweeps == max_sweeps:
                raise ConvergenceError(
                    f"QL did not converge for eigenvalue {l} after {sweeps} sweeps",
                    index=l, sweeps=sweeps, offdiagonal=e[l], threshold=small,
                )
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for row in z:
                    f = row[i + 1]
                    row[i + 1] = s * row[i] + c * f
                    row[i] = c * row[i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = sorted(range(n), key=d.__getitem__)
    evals = np.array([d[i] for i in order])
    Z = np.array([[row[i] for i in order] for row in z]).reshape(len(z), n)
    return evals, Z


def null_vectors(J: TridiagonalMatrix, eigenvalues, rows: Sequence[int]) -> np.ndarray:
    """Rows of the unit eigenvectors of J at known eigenvalues (twisted factorization).

    For each eigenvalue the forward and backward LDL^T pivots of ``J - lambda``
    are combined at the twist index with the smallest pivot, where the
    eigenvector is large, and the vector is propagated outward from there.
    This is stable where forward evaluation of p_m(lambda) is not. Entries
    are fixed to ``v[0] >= 0``, so ``v[m]^2 = w p_m(lambda)^2`` for a
    discrete measure with mass w at lambda.

    Returns an array of shape ``(len(rows), len(eigenvalues))``.
    """
    lam = np.asarray(eigenvalues, dtype=np.longdouble)
    N = J.dimension
    d = np.asarray(J.diagonal, dtype=np.longdouble)
    a = np.asarray(J.offdiagonal, dtype=np.longdouble)  # a[i] couples i, i+1
    tiny = np.longdouble("1e-4000")  # a Python float literal would flush to 0
    fwd = np.empty((N, lam.size), dtype=np.longdouble)
    bwd = np.empty((N, lam.size), dtype=np.longdouble)
    fwd[0] = d[0] - lam
    for i in range(1, N):
        prev = np.where(fwd[i - 1] == 0, tiny, fwd[i - 1])
        fwd[i] = d[i] - lam - a[i - 1] ** 2 / prev
    bwd[N - 1] = d[N - 1] - lam
    for i in range(N - 2, -1, -1):
        nxt = np.where(bwd[i + 1] == 0, tiny, bwd[i + 1])
        bwd[i] = d[i] - lam - a[i] ** 2 / nxt
    gamma = fwd + bwd - (d[:, None] - lam)
    twist = np.argmin(np.abs(gamma), axis=0)
    cols = np.arange(lam.size)
    v = np.zeros((N, lam.size), dtype=np.longdouble)
    v[twist, cols] = 1.0
    for i in range(N - 2, -1, -1):
        piv = np.where(fwd[i] == 0, tiny, fwd[i])
        mask = i < twist
        v[i, mask] = -a[i] * v[i + 1, mask] / piv[mask]
    for i in range(1, N):
        piv = np.where(bwd[i] == 0, tiny, bwd[i])
        mask = i > twist
        v[i, mask] = -a[i - 1] * v[i - 1, mask] / piv[mask]
    v /= np.sqrt(np.sum(v * v, axis=0))
    v *= np.where(v[0] < 0, -1, 1)
    return v[list(rows)].astype(float)


def truncate(coeffs: CoefficientSequence, N: int) -> TridiagonalMatrix:
    """Top-left N x N block of the Jacobi matrix."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    diag, off = coeffs.arrays(N)
    return TridiagonalMatrix(diag, off)


def gauss_quadrature(J: TridiagonalMatrix) -> QuadratureRule:
    """Gauss rule of the truncation (Golub-Welsch): exact to degree 2N-1."""
    if np.any(J.offdiagonal <= 0):
        raise ValueError("Gauss rule needs a strictly positive off-diagonal")
    nodes, Z = tridiagonal_eigen(J.diagonal, J.offdiagonal, rows=(0,))
    weights = Z[0] ** 2
    return QuadratureRule(nodes, weights / weights.sum())


def _band_power_entry(a, b, start: int, end: int, m: int, lo: int, hi: int) -> float:
    """<T^m e_start, e_end> for a symmetric tridiagonal T restricted to [lo, hi].

    ``a(i)`` couples i-1 and i, ``b(i)`` is the diagonal. Entries outside
    the index range are treated as zero.
    """
    if abs(start - end) > m:
        return 0.0
    # support after j steps stays within start +- j; only end +- (m - j) matters
    left = max(lo, min(start, end) - m)
    right = min(hi, max(start, end) + m)
    size = right - left + 1
    diag = [b(left + i) for i in range(size)]
    off = [a(left + i) for i in range(1, size)]  # off[i-1] couples i-1, i
    v = [0.0] * size
    v[start - left] = 1.0
    for _ in range(m):
        w = [diag[i] * v[i] for i in range(size)]
        for i in range(size - 1):
            w[i] += off[i] * v[i + 1]
            w[i + 1] += off[i] * v[i]
        v = w
    return float(v[end - left])


def moment_entry(coeffs: CoefficientSequence, n: int, k: int, l: int, m: int) -> float:
    """<J^m e_{n+k}, e_{n+l}> = integral of x^m p_{n+k} p_{n+l} dmu.

    Computed by multiplying the band on the index window touched by paths
    of length m; rows and columns with negative index are zero.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if n + k < 0 or n + l < 0:
        raise IndexError(f"negative basis index: n+k={n + k}, n+l={n + l}")
    if abs(k - l) > m:
        return 0.0
    hi = max(n + k, n + l) + m
    if coeffs.cutoff is not None:
        hi = min(hi, coeffs.cutoff - 1)
        if n + k > hi or n + l > hi:
            return 0.0
    return _band_power_entry(lambda i: coeffs.a(i), coeffs.b, n + k, n + l, m, 0, hi)


def bilateral_moment(bilateral: BilateralCoefficients, k: int, l: int, m: int) -> float:
    """<J^m e_k, e_l> for the doubly infinite operator (k, l in Z)."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    lo = min(k, l) - m
    hi = max(k, l) + m
    return _band_power_entry(bilateral.a, bilateral.b, k, l, m, lo, hi)


def fold_block(bilateral: BilateralCoefficients, depth: int) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """2x2 blocks of the folded operator pairing indices -n-1 and n.

    Returns ``(B, A)`` with ``B[0..depth]`` and ``A[0..depth-1]`` holding
    A_1..A_depth.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    a, b = bilateral.a, bilateral.b
    B = [np.array([[b(-1), a(0)], [a(0), b(0)]])]
    B += [np.diag([b(-n - 1), b(n)]) for n in range(1, depth + 1)]
    A = [np.diag([a(-n), a(n)]) for n in range(1, depth + 1)]
    return B, A


def window_convergence(family, bilateral: BilateralCoefficients, n: int, window: int) -> float:
    """max |(J_n)_{n+i, n+j} - J_{i,j}| over |i|, |j| <= window.

    ``family`` is anything with ``coefficients(n) -> CoefficientSequence``.
    Only tridiagonal entries can be nonzero, so only those are compared.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if n <= window:
        raise ValueError("need n > window")
    coeffs = family.coefficients(n)
    worst = 0.0
    for i in range(-window, window + 1):
        worst = max(worst, abs(coeffs.b(n + i) - bilateral.b(i)))
        if i < window:
            worst = max(worst, abs(coeffs.a(n + i + 1) - bilateral.a(i + 1)))
    return worst
