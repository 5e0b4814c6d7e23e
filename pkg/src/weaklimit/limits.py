"""Both sides of the weak-limit identity and convergence tables.

For a family mu_n with recurrence data converging along diagonals to a
doubly infinite operator J, the quantity compared is::

    lhs(n) = integral f(x) p_{n+k}(x; mu_n) p_{n+l}(x; mu_n) dmu_n(x)
    rhs    = integral f(x) (A_k, B_k) dmu (A_l, B_l)^T

For a monomial f = x^m both reduce to matrix entries, ``<J_n^m e_{n+k}, e_{n+l}>``
and ``<J^m e_k, e_l>``; they are computed by walking the band. Other test
functions go through quadrature.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import IndexBeyondSupportError, MeasureUnavailableError
from .families import LimitData, MeasureFamily, hermite_coefficients, laguerre_coefficients
from .jacobi import (
    bilateral_moment,
    gauss_quadrature,
    moment_entry,
    null_vectors,
    tridiagonal_eigen,
    truncate,
)
from .recurrence import eval_vector_symbol
from .spectral import MatrixMeasure, discretize_matrix_measure

__all__ = [
    "TestFunction",
    "ConvergenceRecord",
    "ConvergenceTable",
    "lhs_integral",
    "rhs_limit",
    "chebyshev_limit_integral",
    "dual_hahn_limit_rhs",
    "convergence_table",
    "TREND_FLOOR",
]

# errors at or below this level count as converged for the trend check
TREND_FLOOR = 1e-13
_AGREE = 1e-8
_MAX_RULE = 4096

_NAMED = {
    "cos": np.cos,
    "sin": np.sin,
    "atan": np.arctan,
    "tanh": np.tanh,
    "abs": np.abs,
    "gauss": lambda x: np.exp(-np.asarray(x, dtype=float) ** 2),
    "sech": lambda x: 1.0 / np.cosh(x),
}


@dataclass(frozen=True)
class TestFunction:
    """A test function: either the monomial x^degree or a callable.

    Monomials are handled exactly by band walks; callables by quadrature
    or lattice sums.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    degree: Optional[int] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    @classmethod
    def monomial(cls, m: int) -> "TestFunction":
        if m < 0:
            raise ValueError(f"monomial degree must be >= 0, got {m}")
        return cls(f"x^{m}", degree=int(m))

    @classmethod
    def callable(cls, f: Callable, name: str = "f") -> "TestFunction":
        return cls(name, func=f)

    @classmethod
    def parse(cls, text: str) -> "TestFunction":
        """Accepts ``1``, ``x``, ``x^m`` / ``x**m`` or a name such as ``cos``."""
        t = text.strip().replace(" ", "")
        if t == "1":
            return cls.monomial(0)
        if t == "x":
            return cls.monomial(1)
        hit = re.fullmatch(r"x(?:\^|\*\*)(\d+)", t)
        if hit:
            return cls.monomial(int(hit.group(1)))
        key = t[:-3] if t.endswith("(x)") else t
        if key in _NAMED:
            return cls.callable(_NAMED[key], key)
        raise ValueError(f"cannot parse test function {text!r}; "
                         f"use 1, x, x^m or one of {sorted(_NAMED)}")

    @property
    def is_monomial(self) -> bool:
        return self.degree is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_monomial:
            return x ** self.degree
        return np.asarray(self.func(x), dtype=float)


def _as_test_function(f) -> TestFunction:
    if isinstance(f, TestFunction):
        return f
    if isinstance(f, str):
        return TestFunction.parse(f)
    if callable(f):
        return TestFunction.callable(f, getattr(f, "__name__", "f"))
    raise TypeError(f"not a test function: {f!r}")


def _until_stable(evaluate: Callable[[int], float], start: int, cap: int = _MAX_RULE) -> float:
    """Evaluate at sizes start, 2 start, ... until two successive values agree."""
    size = start
    prev = evaluate(size)
    while size < cap:
        size *= 2
        cur = evaluate(size)
        if abs(cur - prev) <= _AGREE * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def lhs_integral(family: MeasureFamily, n: int, k: int, l: int, f) -> float:
    """integral f p_{n+k} p_{n+l} dmu_n for the family member mu_n."""
    f = _as_test_function(f)
    i, j = n + k, n + l
    if i < 0 or j < 0:
        raise IndexError(f"negative basis index: n+k={i}, n+l={j}")
    coeffs = family.coefficients(n)
    if coeffs.cutoff is not None and max(i, j) >= coeffs.cutoff:
        raise IndexBeyondSupportError(
            f"index {max(i, j)} beyond support size {coeffs.cutoff} of member {n}")
    if f.is_monomial:
        return moment_entry(coeffs, n, k, l, f.degree)
    if family.support is not None:
        # exact lattice sum; eigenvector rows are sqrt(pi_j) p_m(x_j)
        x, _ = family.support(n)
        V = null_vectors(truncate(coeffs, len(x)), x, (i, j))
        return float(np.sum(f(x) * V[0] * V[1]))

    def gauss(size):
        nodes, Z = tridiagonal_eigen(*coeffs.arrays(size), rows=(i, j))
        return float(np.sum(f(nodes) * Z[0] * Z[1]))

    if coeffs.cutoff is not None:
        return gauss(coeffs.cutoff)
    return _until_stable(gauss, max(64, 2 * (n + abs(k) + abs(l)) + 8))


def chebyshev_limit_integral(f, k: int, a: float, b: float) -> float:
    """(1/pi) integral f(x) T_k((x-b)/a) / sqrt(a^2 - (x-b)^2) dx by Gauss-Chebyshev."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    f = _as_test_function(f)

    def rule(M):
        theta = (2.0 * np.arange(1, M + 1) - 1.0) * np.pi / (2.0 * M)
        return float(np.mean(f(b + a * np.cos(theta)) * np.cos(k * theta)))

    if f.is_monomial:
        # exact once 2M - 1 >= m + k
        return rule(max(8, (f.degree + k) // 2 + 2))
    return _until_stable(rule, max(64, 2 * k + 8))


def _laguerre_l(n: int, beta: float, x):
    """Classical L_n^beta(x) by its three-term recurrence."""
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for m in range(n):
        prev, cur = cur, ((2 * m + 1 + beta - x) * cur - (m + beta) * prev) / (m + 1)
    return cur


def _hermite_h(n: int, x):
    """Physicists' H_n(x)."""
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for m in range(n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * m * prev
    return cur


def dual_hahn_limit_rhs(mode: str, k: int, l: int, f, beta: float = 1.0) -> float:
    """Limit value for dual Hahn families, k, l >= 1 counting p_{n-k} from the top.

    ``mode="laguerre"``: (-1)^{k+l} / sqrt(h_{k-1} h_{l-1}) int f L_{k-1}^beta L_{l-1}^beta
    x^beta e^{-x} / Gamma(beta+1) dx with h_m = binom(m+beta, m).
    ``mode="hermite"``: 1/sqrt(2^{k+l-2} (k-1)! (l-1)!) int f H_{k-1} H_{l-1} e^{-x^2}/sqrt(pi) dx.
    Gauss rules come from the classical Jacobi matrices.
    """
    if k < 1 or l < 1:
        raise ValueError(f"k, l must be >= 1, got k={k}, l={l}")
    f = _as_test_function(f)
    if mode == "laguerre":
        if beta <= -1:
            raise ValueError(f"need beta > -1, got {beta}")
        coeffs = laguerre_coefficients(beta)

        def log_h(m):
            return math.lgamma(m + beta + 1) - math.lgamma(m + 1) - math.lgamma(beta + 1)

        scale = (-1) ** (k + l) * math.exp(-0.5 * (log_h(k - 1) + log_h(l - 1)))

        def poly(m, x):
            return _laguerre_l(m, beta, x)
    elif mode == "hermite":
        coeffs = hermite_coefficients()
        scale = math.exp(-0.5 * ((k + l - 2) * math.log(2.0) + math.lgamma(k) + math.lgamma(l)))

        def poly(m, x):
            return _hermite_h(m, x)
    else:
        raise ValueError(f"mode must be 'laguerre' or 'hermite', got {mode!r}")

    def rule(size):
        q = gauss_quadrature(truncate(coeffs, size))
        x = q.nodes
        return scale * float(np.sum(q.weights * f(x) * poly(k - 1, x) * poly(l - 1, x)))

    if f.is_monomial:
        return rule(max(4, (f.degree + k + l) // 2 + 1))
    return _until_stable(rule, max(64, 2 * (k + l) + 8), cap=1024)


def _measure_integral(bilateral, measure: MatrixMeasure, k: int, l: int, f: TestFunction,
                      size: int) -> float:
    x, W = measure.quadrature(size)
    Ak, Bk = eval_vector_symbol(bilateral, k, x)
    Al, Bl = eval_vector_symbol(bilateral, l, x)
    sk = np.stack([np.broadcast_to(Ak, x.shape), np.broadcast_to(Bk, x.shape)], -1)
    sl = np.stack([np.broadcast_to(Al, x.shape), np.broadcast_to(Bl, x.shape)], -1)
    return float(np.sum(f(x) * np.einsum("ir,irs,is->i", sk, W, sl)))


def rhs_limit(limit: LimitData, k: int, l: int, f, discretize: Optional[int] = None) -> float:
    """integral f (A_k, B_k) dmu (A_l, B_l)^T for the limit operator.

    ``discretize`` is the truncation depth used when the limit has no
    closed-form measure; without it such limits raise MeasureUnavailableError.
    """
    f = _as_test_function(f)
    bil = limit.bilateral
    # the form is symmetric; a fixed argument order makes that hold bit for bit
    k, l = min(k, l), max(k, l)
    if f.is_monomial:
        return bilateral_moment(bil, k, l, f.degree)
    if bil.one_sided:
        # indices >= 0 are decoupled eigenvectors of eigenvalue 0
        if k >= 0 and l >= 0:
            return float(f(0.0)) if k == l else 0.0
        if k >= 0 or l >= 0:
            return 0.0
        if limit.classical is None:
            raise MeasureUnavailableError("one-sided limit without a classical measure")
        if limit.classical[0] == "laguerre":
            return dual_hahn_limit_rhs("laguerre", -k, -l, f, limit.classical[1])
        return dual_hahn_limit_rhs("hermite", -k, -l, f)
    measure = limit.measure
    if measure is None:
        if discretize is None:
            raise MeasureUnavailableError(
                f"no closed-form measure for {bil!r} and no discretization depth given")
        measure = discretize_matrix_measure(bil, discretize)
    if measure.kind == "discretized":
        return _measure_integral(bil, measure, k, l, f, 0)
    return _until_stable(lambda M: _measure_integral(bil, measure, k, l, f, M),
                         max(64, 2 * (abs(k) + abs(l)) + 8))


@dataclass
class ConvergenceRecord:
    n: int
    lhs: float
    rhs: float
    abs_error: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class ConvergenceTable:
    records: List[ConvergenceRecord]
    k: int
    l: int
    f: str

    @property
    def trend_decreasing(self) -> bool:
        """Errors of the last three rows strictly decrease, or all sit at the floor."""
        tail = self.records[-3:]
        if not tail or any(r.failed for r in tail):
            return False
        errs = [r.abs_error for r in tail]
        if all(e <= TREND_FLOOR for e in errs):
            return True
        return all(q < p for p, q in zip(errs, errs[1:]))

    @property
    def final_error(self) -> float:
        last = self.records[-1]
        return math.inf if last.failed else last.abs_error

    def passes(self, threshold: float = 1e-2) -> bool:
        return self.final_error < threshold and self.trend_decreasing

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "lhs", "rhs", "abs_error"])
        for r in self.records:
            w.writerow([r.n, repr(r.lhs), repr(r.rhs), repr(r.abs_error)])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.records:
            d = asdict(r)
            if d["error"] is None:
                del d["error"]
            for key in ("lhs", "rhs", "abs_error"):
                if not math.isfinite(d[key]):
                    d[key] = None
            rows.append(d)
        return json.dumps(rows, sort_keys=True, indent=1) + "\n"


def convergence_table(family: MeasureFamily, limit: LimitData, k: int, l: int, f,
                      ns: Sequence[int]) -> ConvergenceTable:
    """Rows (n, lhs, rhs, |lhs - rhs|); a failing row is recorded, not raised."""
    ns = [int(n) for n in ns]
    if any(q <= p for p, q in zip(ns, ns[1:])):
        raise ValueError(f"ns must be strictly increasing, got {ns}")
    f = _as_test_function(f)
    rhs = rhs_limit(limit, k, l, f)
    records = []
    for n in ns:
        try:
            lhs = lhs_integral(family, n, k, l, f)
        except (ArithmeticError, IndexError, ValueError, RuntimeError) as exc:
            records.append(ConvergenceRecord(n, math.nan, rhs, math.nan,
                                             f"{type(exc).__name__}: {exc}"))
            continue
        records.append(ConvergenceRecord(n, lhs, rhs, abs(lhs - rhs)))
    return ConvergenceTable(records, k, l, f.name)
