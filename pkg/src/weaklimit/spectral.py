"""Second-kind functions, Stieltjes transforms and the 2x2 spectral matrix measure.

For a doubly infinite Jacobi operator the spectral object is a matrix of
measures ``mu = [[mu11, mu12], [mu12, mu22]]`` attached to the basis pair
``(e_{-1}, e_0)``. Its Stieltjes transform is built from the scalar
transforms p0 (of J+) and q0 (of J-)::

    m11 = q0 / D,   m22 = p0 / D,   m12 = a_0 p0 q0 / D,   D = 1 - a_0^2 p0 q0
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateDenominatorError,
    InstabilityWarning,
    SingularSystemError,
)
from .jacobi import tridiagonal_eigen
from .recurrence import (
    BilateralCoefficients,
    CoefficientSequence,
    eval_associated,
    eval_orthonormal,
)

__all__ = [
    "sqrt_z2m1",
    "constant_stieltjes",
    "stieltjes_m",
    "second_kind",
    "matrix_stieltjes",
    "resolvent_oracle",
    "invert_stieltjes",
    "matrix_orthopoly",
    "MatrixMeasure",
    "constant_matrix_measure",
    "discretize_matrix_measure",
    "density_table",
    "write_density_csv",
]

_TINY = 1e-300


def sqrt_z2m1(z):
    """sqrt(z^2 - 1) on the branch that behaves like z at infinity (cut [-1, 1])."""
    z = np.asarray(z, dtype=complex)
    return np.sqrt(z - 1.0) * np.sqrt(z + 1.0)


def constant_stieltjes(a: float, b: float, z):
    """Stieltjes transform of the measure of constant coefficients (a, b).

    Equal to ``(w - sqrt(w^2 - 4a^2)) / (2a^2)`` with ``w = z - b``; for
    a = 1/2, b = 0 this is ``2 (z - sqrt(z^2 - 1))``.
    """
    w = (np.asarray(z, dtype=complex) - b) / (2.0 * a)
    return (w - sqrt_z2m1(w)) / a


def stieltjes_m(coeffs: CoefficientSequence, z: complex, tol: float = 1e-13,
                max_depth: int = 100_000) -> complex:
    """Integral of dmu(x)/(z - x), i.e. the continued fraction

        1/(z - b_0 - a_1^2/(z - b_1 - a_2^2/(z - b_2 - ...)))

    Finite supports and declared constant tails are summed exactly; otherwise
    the fraction is evaluated by the modified Lentz method until successive
    convergents agree to ``tol`` (relative).
    """
    z = complex(z)
    if coeffs.cutoff is not None:
        m = 0j
        for j in range(coeffs.cutoff - 1, -1, -1):
            coupling = coeffs.a(j + 1) ** 2 if j + 1 < coeffs.cutoff else 0.0
            m = 1.0 / (z - coeffs.b(j) - coupling * m)
        return m
    if coeffs.tail is not None:
        start, ainf, binf = coeffs.tail
        m = complex(constant_stieltjes(ainf, binf, z))
        for j in range(start - 1, -1, -1):
            m = 1.0 / (z - coeffs.b(j) - coeffs.a(j + 1) ** 2 * m)
        return m

    # g = d_0 + (-c_1)/(d_1 + (-c_2)/(d_2 + ...)), d_j = z - b_j, c_j = a_j^2; result 1/g
    g = z - coeffs.b(0)
    if g == 0:
        g = _TINY
    C, D = g, 0j
    prev = g
    for j in range(1, max_depth):
        num = -coeffs.a(j) ** 2
        den = z - coeffs.b(j)
        D = den + num * D
        if D == 0:
            D = _TINY
        C = den + num / C
        if C == 0:
            C = _TINY
        D = 1.0 / D
        delta = C * D
        prev, g = g, g * delta
        if abs(delta - 1.0) < tol:
            return 1.0 / g
    raise ConvergenceError(
        f"continued fraction did not converge in {max_depth} levels at z={z}",
        last=1.0 / g, previous=1.0 / prev, depth=max_depth,
    )


def second_kind(coeffs: CoefficientSequence, n: int, z: complex,
                a0: Optional[float] = None, rtol: float = 1e-6) -> complex:
    """Function of the second kind p~_n(z) = integral of p_n(x)/(z - x) dmu.

    Forward recurrence from ``a_0 p~_{-1} = 1`` and ``p~_0 = stieltjes_m``.
    Without a bilateral ``a0`` the seed p~_{-1} is reported as 1. The
    recurrence runs against the decay of this minimal solution; an
    ``InstabilityWarning`` is issued once the propagated error of p~_0 may
    exceed ``rtol`` relative to the result.
    """
    if n < -1:
        raise ValueError(f"n must be >= -1, got {n}")
    if n == -1:
        return 1.0 / a0 if a0 is not None else 1.0 + 0j
    z = complex(z)
    tol = 1e-13
    m0 = stieltjes_m(coeffs, z, tol=tol)
    prev, cur = None, m0  # prev stands for a_0 p~_{-1} = 1 below
    p_prev, p_cur = 0j, 1 + 0j
    for j in range(n):
        coupled = 1.0 if j == 0 else coeffs.a(j) * prev
        nxt = ((z - coeffs.b(j)) * cur - coupled) / coeffs.a(j + 1)
        p_nxt = ((z - coeffs.b(j)) * p_cur - (coeffs.a(j) * p_prev if j else 0.0)) / coeffs.a(j + 1)
        prev, cur = cur, nxt
        p_prev, p_cur = p_cur, p_nxt
    # an error d in p~_0 propagates as d * p_n(z)
    est = tol * abs(m0) * abs(p_cur)
    if n > 0 and est > rtol * abs(cur):
        warnings.warn(
            f"second-kind recurrence at n={n}, z={z}: estimated relative error "
            f"{est / max(abs(cur), _TINY):.2e}",
            InstabilityWarning, stacklevel=2,
        )
    return cur


def matrix_stieltjes(bilateral: BilateralCoefficients, z: complex,
                     degenerate_tol: float = 1e-12) -> np.ndarray:
    """Stieltjes transform of the 2x2 spectral matrix measure at z."""
    z = complex(z)
    q0 = stieltjes_m(bilateral.minus(), z)
    if bilateral.one_sided:
        return np.array([[q0, 0j], [0j, 0j]])
    p0 = stieltjes_m(bilateral.plus(), z)
    a0 = bilateral.a(0)
    den = 1.0 - a0 * a0 * p0 * q0
    if abs(den) < degenerate_tol:
        raise DegenerateDenominatorError(f"|1 - a0^2 p0 q0| = {abs(den):.3e} at z={z}")
    m12 = a0 * p0 * q0 / den
    return np.array([[q0 / den, m12], [m12, p0 / den]])


def resolvent_oracle(bilateral: BilateralCoefficients, z: complex, truncation: int) -> np.ndarray:
    """Solve (z - J) r = e_0 and (z - J) s = e_{-1} on indices [-T, T].

    Returns ``[[s_{-1}, s_0], [r_{-1}, r_0]]``; a direct cross-check of
    ``matrix_stieltjes`` that never touches continued fractions.
    """
    T = int(truncation)
    if T < 1:
        raise ValueError("truncation must be >= 1")
    idx = np.arange(-T, T + 1)
    size = len(idx)
    M = np.zeros((size, size), dtype=complex)
    M[np.arange(size), np.arange(size)] = complex(z) - np.array([bilateral.b(int(k)) for k in idx])
    off = np.array([bilateral.a(int(k)) for k in idx[1:]])  # couples k-1 and k
    M[np.arange(size - 1), np.arange(1, size)] = -off
    M[np.arange(1, size), np.arange(size - 1)] = -off
    rhs = np.zeros((size, 2), dtype=complex)
    rhs[T - 1, 0] = 1.0  # e_{-1}
    rhs[T, 1] = 1.0      # e_0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"truncated resolvent singular at z={z}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError(f"truncated resolvent singular at z={z}")
    s, r = sol[:, 0], sol[:, 1]
    return np.array([[s[T - 1], s[T]], [r[T - 1], r[T]]])


def invert_stieltjes(transform: Callable[[complex], complex], x: float,
                     epsilon: float = 1e-4, extrapolate: bool = False) -> float:
    """Density estimate (1/pi) Im transform(x - i eps).

    With ``extrapolate`` the estimates at eps and eps/2 are combined by one
    Richardson step, cancelling the O(eps) smoothing bias.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")

    def at(eps):
        return complex(transform(complex(x, -eps))).imag / np.pi

    if not extrapolate:
        return at(epsilon)
    return 2.0 * at(epsilon / 2.0) - at(epsilon)


def matrix_orthopoly(bilateral: BilateralCoefficients, n: int, t) -> np.ndarray:
    """Matrix orthonormal polynomial P_n(t) of the folded block operator.

    Rows are the images of e_{-n-1} and e_n::

        [[ q_n(t),                 -(a0/a_{-1}) q^{(1)}_{n-1}(t) ],
         [ -(a0/a_1) p^{(1)}_{n-1}(t),  p_n(t)                   ]]

    For array ``t`` the result has shape ``t.shape + (2, 2)``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if bilateral.one_sided:
        raise ValueError("matrix polynomials need a two-sided operator")
    plus, minus = bilateral.plus(), bilateral.minus()
    a0 = bilateral.a(0)
    q = eval_orthonormal(minus, n, t)
    q1 = -(a0 / bilateral.a(-1)) * eval_associated(minus, n - 1, t)
    p1 = -(a0 / bilateral.a(1)) * eval_associated(plus, n - 1, t)
    p = eval_orthonormal(plus, n, t)
    q1 = q1 + 0.0 * q
    p1 = p1 + 0.0 * p
    return np.stack([np.stack([q, q1], -1), np.stack([p1, p], -1)], -2)


@dataclass
class MatrixMeasure:
    """2x2 matrix measure, closed form or discretized.

    ``kind == "closed_form"``: ``mu11``, ``mu12``, ``mu22`` are densities on
    ``support`` and ``rule(M)`` returns an M-point rule ``(x, W)`` with
    ``W[i]`` the 2x2 weight at ``x[i]``.
    ``kind == "discretized"``: ``nodes`` and ``weights`` (shape (M, 2, 2)).
    """

    kind: str
    support: Tuple[float, float]
    mu11: Optional[Callable] = None
    mu12: Optional[Callable] = None
    mu22: Optional[Callable] = None
    rule: Optional[Callable[[int], Tuple[np.ndarray, np.ndarray]]] = None
    nodes: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    note: str = field(default="")

    def quadrature(self, size: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == "discretized":
            return self.nodes, self.weights
        return self.rule(size)

    def integrate(self, g: Callable, size: int = 64) -> np.ndarray:
        """Return the 2x2 matrix of integrals of g against each entry."""
        x, W = self.quadrature(size)
        return np.einsum("i,ijk->jk", np.asarray(g(x), dtype=float), W)


def constant_matrix_measure(a_half: float, b: float = 0.0) -> MatrixMeasure:
    """Closed-form measure of the constant operator (off-diagonal a/2, diagonal b).

    Support is [b - a, b + a] with a = 2 a_half; in u = (x - b)/a::

        dmu11 = dmu22 = du / (pi sqrt(1 - u^2)),   dmu12 = u du / (pi sqrt(1 - u^2))
    """
    a = 2.0 * a_half

    def arcsine(x):
        x = np.asarray(x, dtype=float)
        u2 = ((x - b) / a) ** 2
        out = np.zeros_like(x)
        inside = u2 < 1.0
        out[inside] = 1.0 / (np.pi * a * np.sqrt(1.0 - u2[inside]))
        return out

    def cross(x):
        return (np.asarray(x, dtype=float) - b) / a * arcsine(x)

    def rule(M):
        M = max(int(M), 1)
        u = np.cos((2.0 * np.arange(1, M + 1) - 1.0) * np.pi / (2.0 * M))
        W = np.empty((M, 2, 2))
        W[:, 0, 0] = W[:, 1, 1] = 1.0 / M
        W[:, 0, 1] = W[:, 1, 0] = u / M
        return b + a * u, W

    return MatrixMeasure("closed_form", (b - a, b + a), arcsine, cross, arcsine, rule,
                         note=f"arcsine law on [{b - a}, {b + a}]")


def discretize_matrix_measure(bilateral: BilateralCoefficients, depth: int) -> MatrixMeasure:
    """Spectral matrix measure of the truncation of J to indices [-depth, depth-1].

    Each eigenpair (lambda, v) contributes the weight ``w w^T`` at lambda,
    where ``w = (v_{-1}, v_0)``. Moments of order below about ``depth``
    are exact.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    idx = range(-depth, depth)
    diag = [bilateral.b(k) for k in idx]
    off = [bilateral.a(k) for k in range(-depth + 1, depth)]
    nodes, Z = tridiagonal_eigen(diag, off, rows=(depth - 1, depth))
    W = np.einsum("ri,si->irs", Z, Z)
    return MatrixMeasure("discretized", (float(nodes[0]), float(nodes[-1])),
                         nodes=nodes, weights=W, note=f"truncation depth {depth}")


def density_table(bilateral: BilateralCoefficients, grid, epsilon: float = 1e-4,
                  extrapolate: bool = True) -> np.ndarray:
    """Rows ``(x, mu11, mu12, mu22)`` of densities recovered by Stieltjes inversion."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pick = ((0, 0), (0, 1), (1, 1))

    def at(x, eps):
        m = matrix_stieltjes(bilateral, complex(x, -eps))
        return np.array([m[i, j].imag for i, j in pick]) / np.pi

    rows = []
    for x in np.asarray(grid, dtype=float):
        vals = at(x, epsilon)
        if extrapolate:
            vals = 2.0 * at(x, epsilon / 2.0) - vals
        rows.append([x, *vals])
    return np.array(rows).reshape(-1, 4)


def write_density_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x", "mu11", "mu12", "mu22"])
    for r in rows:
        writer.writerow([repr(float(v)) for v in r])
