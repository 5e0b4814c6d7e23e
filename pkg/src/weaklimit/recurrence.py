"""Orthonormal polynomials from three-term recurrence coefficients.

Conventions used throughout the package::

    x p_n(x) = a_{n+1} p_{n+1}(x) + b_n p_n(x) + a_n p_{n-1}(x),   n >= 0
    p_{-1} = 0,  p_0 = 1,  a_n > 0

Coefficient sequences are rules ``n -> value`` rather than stored arrays, so
families whose members have different lengths share a single interface.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import IndexBeyondSupportError, NonPositiveCoefficientError

__all__ = [
    "CoefficientSequence",
    "BilateralCoefficients",
    "eval_orthonormal",
    "eval_associated",
    "leading_coefficient",
    "eval_vector_symbol",
]


class CoefficientSequence:
    """Semi-infinite recurrence data ``a_n`` (n >= 1) and ``b_n`` (n >= 0).

    Parameters
    ----------
    a, b : callables
        Index rules. ``a`` is only queried for ``n >= 1``.
    cutoff : int, optional
        Size N of a finite support. Then ``a_n = b_n = 0`` for ``n >= N``
        regardless of what the rules return.
    tail : (start, a_inf, b_inf), optional
        Declares ``b_n = b_inf`` for ``n >= start`` and ``a_n = a_inf`` for
        ``n >= max(start, 1)``. Lets the Stieltjes transform close the
        continued fraction exactly instead of iterating.
    """

    def __init__(
        self,
        a: Callable[[int], float],
        b: Callable[[int], float],
        cutoff: Optional[int] = None,
        tail: Optional[Tuple[int, float, float]] = None,
        name: str = "",
    ):
        if cutoff is not None and cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {cutoff}")
        self._a = a
        self._b = b
        self.cutoff = cutoff
        self.tail = tail
        self.name = name
        self._cache_a: dict = {}
        self._cache_b: dict = {}

    @classmethod
    def constant(cls, a: float, b: float = 0.0) -> "CoefficientSequence":
        """``a_n = a`` for all n >= 1 and ``b_n = b`` for all n >= 0."""
        a, b = float(a), float(b)
        return cls(lambda n: a, lambda n: b, tail=(0, a, b), name=f"constant({a}, {b})")

    @classmethod
    def from_arrays(cls, a, b) -> "CoefficientSequence":
        """Finite support sequence: ``b = (b_0..b_{N-1})``, ``a = (a_1..a_{N-1})``."""
        b = [float(v) for v in b]
        a = [float(v) for v in a]
        if len(a) != len(b) - 1:
            raise ValueError("need len(a) == len(b) - 1")
        return cls(lambda n: a[n - 1], lambda n: b[n], cutoff=len(b), name="arrays")

    def a(self, n: int) -> float:
        if n < 1:
            raise IndexError(f"a_n is defined for n >= 1, got {n}")
        if self.cutoff is not None and n >= self.cutoff:
            return 0.0
        try:
            return self._cache_a[n]
        except KeyError:
            v = self._cache_a[n] = float(self._a(n))
            return v

    def b(self, n: int) -> float:
        if n < 0:
            raise IndexError(f"b_n is defined for n >= 0, got {n}")
        if self.cutoff is not None and n >= self.cutoff:
            return 0.0
        try:
            return self._cache_b[n]
        except KeyError:
            v = self._cache_b[n] = float(self._b(n))
            return v

    def shifted(self, s: int = 1) -> "CoefficientSequence":
        """Sequence with ``a'_m = a_{m+s}``, ``b'_m = b_{m+s}`` (first s rows deleted)."""
        if s < 0:
            raise ValueError("shift must be nonnegative")
        if s == 0:
            return self
        cutoff = None if self.cutoff is None else max(self.cutoff - s, 0)
        if cutoff == 0:
            raise IndexBeyondSupportError(f"shift {s} removes the whole support")
        tail = None
        if self.tail is not None:
            start, ainf, binf = self.tail
            tail = (max(start - s, 0), ainf, binf)
        return CoefficientSequence(
            lambda m: self.a(m + s), lambda m: self.b(m + s), cutoff, tail,
            name=f"{self.name}>>{s}",
        )

    def arrays(self, N: int) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(b_0..b_{N-1}, a_1..a_{N-1})`` as float arrays."""
        diag = np.array([self.b(i) for i in range(N)])
        off = np.array([self.a(i) for i in range(1, N)])
        return diag, off

    def __repr__(self):
        return f"CoefficientSequence({self.name or '<rule>'}, cutoff={self.cutoff})"


class BilateralCoefficients:
    """Doubly infinite data ``a_k, b_k`` for k in Z defining a Jacobi operator on l2(Z).

    ``one_sided`` marks the degenerate limit where ``a_k = b_k = 0`` for all
    k >= 0, so the operator lives on the negative indices only.
    """

    def __init__(
        self,
        a: Callable[[int], float],
        b: Callable[[int], float],
        one_sided: bool = False,
        constant: Optional[Tuple[float, float]] = None,
        name: str = "",
    ):
        self._a = a
        self._b = b
        self.one_sided = one_sided
        self.constant = constant
        self.name = name

    @classmethod
    def from_constant(cls, a: float, b: float = 0.0) -> "BilateralCoefficients":
        if a <= 0:
            raise ValueError(f"bilateral off-diagonal must be positive, got {a}")
        a, b = float(a), float(b)
        return cls(lambda k: a, lambda k: b, constant=(a, b), name=f"constant({a}, {b})")

    def a(self, k: int) -> float:
        if self.one_sided and k >= 0:
            return 0.0
        return float(self._a(k))

    def b(self, k: int) -> float:
        if self.one_sided and k >= 0:
            return 0.0
        return float(self._b(k))

    def plus(self) -> CoefficientSequence:
        """Coefficients of J+ : ``(a_{n}, b_n)`` for n >= 0 (a from n >= 1)."""
        if self.one_sided:
            raise ValueError("a one-sided operator has no J+ part")
        tail = None if self.constant is None else (0, *self.constant)
        return CoefficientSequence(self.a, self.b, tail=tail, name=f"{self.name}:J+")

    def minus(self) -> CoefficientSequence:
        """Coefficients of J- : ``a'_n = a_{-n}``, ``b'_n = b_{-n-1}``."""
        tail = None if self.constant is None else (0, *self.constant)
        return CoefficientSequence(
            lambda n: self.a(-n), lambda n: self.b(-n - 1), tail=tail,
            name=f"{self.name}:J-",
        )

    def __repr__(self):
        return f"BilateralCoefficients({self.name or '<rule>'}, one_sided={self.one_sided})"


def _work_dtype(x):
    return np.clongdouble if np.iscomplexobj(x) else np.longdouble


def _unwrap(v, scalar):
    if np.iscomplexobj(v):
        v = v.astype(complex)
    else:
        v = v.astype(float)
    return v[()] if scalar else v


def eval_orthonormal(coeffs: CoefficientSequence, n: int, x):
    """Evaluate p_n(x) by forward recurrence (accumulated in extended precision).

    ``x`` may be a scalar or an array, real or complex. For a finite support
    of size N the degree-N polynomial is taken with ``a_N := 1``, so that it
    vanishes exactly on the support points.
    """
    if n < -1:
        raise ValueError(f"degree must be >= -1, got {n}")
    N = coeffs.cutoff
    if N is not None and n > N:
        raise IndexBeyondSupportError(f"degree {n} exceeds support size {N}")
    scalar = np.ndim(x) == 0
    x = np.asarray(x)
    dt = _work_dtype(x)
    xw = x.astype(dt)
    if n == -1:
        return _unwrap(np.zeros_like(xw), scalar)
    prev = np.zeros_like(xw)
    cur = np.ones_like(xw)
    for m in range(n):
        a_next = 1.0 if (N is not None and m + 1 == N) else coeffs.a(m + 1)
        if a_next <= 0:
            raise NonPositiveCoefficientError(f"a_{m + 1} = {a_next} is not positive")
        a_m = coeffs.a(m) if m >= 1 else 0.0
        nxt = ((xw - dt(coeffs.b(m))) * cur - dt(a_m) * prev) / dt(a_next)
        prev, cur = cur, nxt
    return _unwrap(cur, scalar)


def eval_associated(coeffs: CoefficientSequence, n: int, x):
    """Associated polynomial p_n^{(1)}(x): first row and column of J deleted."""
    if n < -1:
        raise ValueError(f"degree must be >= -1, got {n}")
    if n == -1:
        return eval_orthonormal(coeffs, -1, x)
    return eval_orthonormal(coeffs.shifted(1), n, x)


def leading_coefficient(coeffs: CoefficientSequence, n: int) -> float:
    """gamma_n = 1/(a_1 ... a_n), accumulated in log space."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    log_gamma = 0.0
    for m in range(1, n + 1):
        am = coeffs.a(m)
        if am <= 0:
            raise NonPositiveCoefficientError(f"a_{m} = {am} is not positive")
        log_gamma -= math.log(am)
    # exp overflows above ~709.78 and underflows to 0 below ~-745
    if log_gamma > math.log(np.finfo(float).max) or log_gamma < math.log(np.finfo(float).tiny):
        raise OverflowError(f"gamma_{n} = exp({log_gamma:.6g}) is outside double range")
    return math.exp(log_gamma)


def eval_vector_symbol(bilateral: BilateralCoefficients, n: int, x):
    """Return (A_n(x), B_n(x)), the image of the basis vector e_n.

    For n >= 0: ``(-(a_0/a_1) p^{(1)}_{n-1}(x), p_n(x))`` with p from J+.
    For n < 0: ``(q_{|n|-1}(x), -(a_0/a_{-1}) q^{(1)}_{|n|-2}(x))`` with q from J-.
    Degree -1 terms are zero, including q^{(1)}_{-1} at n = -1.
    """
    if n == 0:
        zero = eval_orthonormal(CoefficientSequence.constant(1.0), -1, x)
        return zero, zero + 1.0
    a0 = bilateral.a(0)
    if n > 0:
        if bilateral.one_sided:
            raise ValueError("one-sided operator: no vector symbol for n >= 1")
        plus = bilateral.plus()
        ratio = a0 / bilateral.a(1)
        return -ratio * eval_associated(plus, n - 1, x), eval_orthonormal(plus, n, x)
    m = -n
    minus = bilateral.minus()
    first = eval_orthonormal(minus, m - 1, x)
    if a0 == 0.0:
        return first, 0.0 * first
    ratio = a0 / bilateral.a(-1)
    return first, -ratio * eval_associated(minus, m - 2, x)
