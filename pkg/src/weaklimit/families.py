"""One-parameter measure families k -> (a_{n,k}, b_{n,k}) and their limit operators.

Every constructor returns ``(family, limit)``. The limit holds the doubly
infinite coefficients ``a_j^0 = lim a_{n+j,n}``, ``b_j^0 = lim b_{n+j,n}``
together with whatever closed-form measure is known for them.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import ParameterDomainError
from .recurrence import BilateralCoefficients, CoefficientSequence
from .spectral import MatrixMeasure, constant_matrix_measure

__all__ = [
    "MeasureFamily",
    "LimitData",
    "LimitEstimate",
    "DEFAULT_PROBE",
    "richardson",
    "numeric_limit",
    "family_mab",
    "family_rescaled",
    "family_wall",
    "family_jacobi_growing",
    "family_laguerre_growing",
    "family_dual_hahn",
    "dual_hahn_lattice",
    "dual_hahn_coefficients",
    "perturbed_member",
    "laguerre_coefficients",
    "hermite_coefficients",
    "wall_coefficients",
    "jacobi_coefficients",
    "jacobi_growing_limit",
    "log_gamma_signed",
    "build_family",
    "family_from_json",
]

DEFAULT_PROBE = (1250, 2500, 5000, 10000)


@dataclass
class MeasureFamily:
    name: str
    params: Dict
    rule: Callable[[int], CoefficientSequence] = field(repr=False)
    cutoff_rule: str = "none"
    scaling: str = "x"
    support: Optional[Callable[[int], Tuple[np.ndarray, np.ndarray]]] = field(default=None, repr=False)
    rescale: Optional[Callable[[int], float]] = field(default=None, repr=False)
    # coefficients approach their limits in powers of n**-rate
    rate: float = 1.0

    def coefficients(self, k: int) -> CoefficientSequence:
        """Recurrence data of the member mu_k."""
        return self.rule(k)

    def cutoff(self, k: int) -> Optional[int]:
        return self.rule(k).cutoff

    def descriptor(self) -> Dict:
        return {"name": self.name, "params": self.params,
                "cutoff_rule": self.cutoff_rule, "scaling": self.scaling}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)


@dataclass
class LimitData:
    bilateral: BilateralCoefficients
    closed_form_note: str
    measure: Optional[MatrixMeasure] = None
    # ("laguerre", beta) or ("hermite",) when the limit is one-sided
    classical: Optional[Tuple] = None
    # constants as printed in the literature, kept for comparison
    printed: Dict[str, float] = field(default_factory=dict)


class LimitEstimate(NamedTuple):
    a: float
    b: float
    error: float
    converged: bool


def richardson(ns: Sequence[float], values: Sequence[float], rate: float = 1.0) -> Tuple[float, float]:
    """Extrapolate samples v(n) to n = infinity, assuming v = c0 + c1 h + c2 h^2 + ...

    with ``h = n**-rate``. Returns the estimate from all points and its
    distance to the estimate that drops the smallest n.
    """
    h = np.asarray(ns, dtype=float) ** -rate
    v = np.asarray(values, dtype=float)

    def neville(hh, vv):
        p = list(vv)
        m = len(hh)
        for level in range(1, m):
            for i in range(m - level):
                j = i + level
                p[i] = (hh[j] * p[i] - hh[i] * p[i + 1]) / (hh[j] - hh[i])
        return p[0]

    full = neville(h, v)
    if len(h) < 2:
        return full, float("inf")
    reduced = neville(h[1:], v[1:])
    return float(full), float(abs(full - reduced))


def numeric_limit(family: MeasureFamily, k: int, probe: Sequence[int] = DEFAULT_PROBE,
                  tol: float = 1e-6) -> LimitEstimate:
    """Extrapolated (lim a_{n+k,n}, lim b_{n+k,n}) from samples at n in ``probe``."""
    probe = [int(n) for n in probe]
    if any(q <= p for p, q in zip(probe, probe[1:])):
        raise ValueError("probe must be strictly increasing")
    if probe[0] + k < 1:
        raise ValueError(f"probe start {probe[0]} too small for k={k}")
    a_vals = [family.coefficients(n).a(n + k) for n in probe]
    b_vals = [family.coefficients(n).b(n + k) for n in probe]
    if all(v == a_vals[0] for v in a_vals) and all(v == b_vals[0] for v in b_vals):
        return LimitEstimate(a_vals[0], b_vals[0], 0.0, True)
    a_est, a_err = richardson(probe, a_vals, family.rate)
    b_est, b_err = richardson(probe, b_vals, family.rate)
    err = max(a_err, b_err)
    scale = max(1.0, abs(a_est), abs(b_est))
    return LimitEstimate(a_est, b_est, err, err <= tol * scale)


def _constant_limit(a_half: float, b: float, note: str, **printed) -> LimitData:
    return LimitData(BilateralCoefficients.from_constant(a_half, b), note,
                     measure=constant_matrix_measure(a_half, b), printed=dict(printed))


def family_mab(a: float, b: float, member: Optional[CoefficientSequence] = None):
    """Class M(a, b): a single measure with a_n -> a/2, b_n -> b, used for every k.

    Without ``member`` the exact constant sequence (scaled Chebyshev U) is used.
    """
    if not a > 0:
        raise ParameterDomainError(f"M(a, b) needs a > 0, got a={a}")
    if member is None:
        member = CoefficientSequence.constant(a / 2.0, b)
        label = "exact"
    else:
        label = member.name or "custom"
    family = MeasureFamily("mab", {"a": a, "b": b, "member": label}, lambda k: member)
    limit = _constant_limit(a / 2.0, b, f"constant operator: diagonal {b}, off-diagonal {a / 2}")
    return family, limit


def perturbed_member(a: float, b: float) -> CoefficientSequence:
    """a_n = a/2 + 1/n, b_n = b + 1/(n+1): a non-trivial member of M(a, b)."""
    return CoefficientSequence(lambda n: a / 2.0 + 1.0 / n, lambda n: b + 1.0 / (n + 1),
                               name="perturbed")


def family_rescaled(base: CoefficientSequence, c: Callable[[int], float],
                    probe: Sequence[int] = DEFAULT_PROBE, name: str = "rescaled"):
    """Family x -> c_k x of a fixed measure: a_{n,k} = a_n/c_k, b_{n,k} = b_n/c_k.

    Requires c_k positive increasing with c_{k+1}/c_k -> 1, and the ratios
    a_n/c_n -> a/2 > 0, b_n/c_n -> b, which are extrapolated from ``probe``.
    """
    probe = list(probe)
    try:
        cs = [float(c(n)) for n in probe]
    except (OverflowError, ZeroDivisionError) as exc:
        raise ParameterDomainError(f"c_k cannot be evaluated on the probe range: {exc}") from exc
    if any(v <= 0 for v in cs) or any(q <= p for p, q in zip(cs, cs[1:])):
        raise ParameterDomainError("c_k must be positive and increasing")
    ratio_gap = [abs(float(c(n + 1)) / float(c(n)) - 1.0) for n in probe]
    if ratio_gap[-1] > 1e-2 or any(q > p for p, q in zip(ratio_gap, ratio_gap[1:])):
        raise ParameterDomainError(f"c_(k+1)/c_k does not approach 1: gaps {ratio_gap}")
    a_half, _ = richardson(probe, [base.a(n) / c(n) for n in probe])
    b_lim, _ = richardson(probe, [base.b(n) / c(n) for n in probe])
    if a_half < 1e-6:
        raise ParameterDomainError(f"lim a_n/c_n = {a_half:.3g}: degenerate (must be > 0)")

    def rule(k):
        ck = float(c(k))
        return CoefficientSequence(lambda n: base.a(n) / ck, lambda n: base.b(n) / ck,
                                   cutoff=base.cutoff, name=f"{name}[{k}]")

    family = MeasureFamily(name, {"base": base.name}, rule, scaling="x / c_k", rescale=c)
    limit = _constant_limit(a_half, b_lim,
                            f"constant operator: diagonal {b_lim}, off-diagonal {a_half}; "
                            f"support [{b_lim - 2 * a_half}, {b_lim + 2 * a_half}]")
    return family, limit


def laguerre_coefficients(alpha: float) -> CoefficientSequence:
    """Orthonormal Laguerre: a_n = sqrt(n(n+alpha)), b_n = 2n+alpha+1."""
    return CoefficientSequence(lambda n: math.sqrt(n * (n + alpha)), lambda n: 2.0 * n + alpha + 1.0,
                               name=f"laguerre({alpha})")


def hermite_coefficients() -> CoefficientSequence:
    """Orthonormal Hermite for exp(-x^2)/sqrt(pi): a_n = sqrt(n/2), b_n = 0."""
    return CoefficientSequence(lambda n: math.sqrt(n / 2.0), lambda n: 0.0, name="hermite")


def wall_coefficients(b: float, q: float) -> CoefficientSequence:
    def a(n):
        qn = q ** n
        return qn * math.sqrt(b * (1.0 - qn) * (1.0 - b * q ** (n - 1)))

    def bb(n):
        qn = q ** n
        return qn * (b + q - (1.0 + q) * b * qn)

    return CoefficientSequence(a, bb, name=f"wall({b}, {q})")


def family_wall(b: float, c: float):
    """Wall polynomials w_n(x; b, c^{1/k})."""
    if not (0 < b < 1 and 0 < c < 1):
        raise ParameterDomainError(f"Wall family needs 0 < b < 1 and 0 < c < 1, got b={b}, c={c}")
    a_half = c * math.sqrt(b * (1 - c) * (1 - b * c))
    diag = (b + 1 - 2 * b * c) * c
    if a_half < 1e-3:
        warnings.warn(f"Wall family with c={c}: limit off-diagonal {a_half:.2e} nearly degenerate",
                      RuntimeWarning, stacklevel=2)
    family = MeasureFamily("wall", {"b": b, "c": c}, lambda k: wall_coefficients(b, c ** (1.0 / k)),
                           scaling="q = c^(1/k)")
    limit = _constant_limit(a_half, diag, "A/2 = c sqrt(b(1-c)(1-bc)), B = (b+1-2bc)c")
    return family, limit


def jacobi_coefficients(alpha: float, beta: float) -> CoefficientSequence:
    def a(n):
        s = 2 * n + alpha + beta
        num = 4.0 * n * (n + alpha) * (n + beta) * (n + alpha + beta)
        if n == 1:
            # (2n+alpha+beta-1) cancels (n+alpha+beta) at n = 1
            return math.sqrt(4.0 * (1 + alpha) * (1 + beta) / ((s ** 2) * (s + 1)))
        return math.sqrt(num / ((s - 1) * s * s * (s + 1)))

    def b(n):
        s = 2 * n + alpha + beta
        if beta == alpha:
            return 0.0
        if n == 0:
            # (beta^2 - alpha^2)/(alpha+beta) reduces to beta - alpha
            return (beta - alpha) / (alpha + beta + 2)
        return (beta * beta - alpha * alpha) / (s * (s + 2))

    return CoefficientSequence(a, b, name=f"jacobi({alpha}, {beta})")


def jacobi_growing_limit(a: float, b: float) -> Tuple[float, float]:
    s = (a + b + 2) ** 2
    return 2.0 * math.sqrt((a + 1) * (b + 1) * (a + b + 1)) / s, (b * b - a * a) / s


def family_jacobi_growing(a: float, b: float, alpha: float = 0.0, beta: float = 0.0):
    """Jacobi polynomials with parameters (a k + alpha, b k + beta)."""
    if not (a > 0 and b > 0):
        raise ParameterDomainError(f"need a, b > 0, got a={a}, b={b}")
    # factors are increasing in n and k, so n = k = 1 is the binding case
    al, be = a + alpha, b + beta
    if min(1 + al, 1 + be, 1 + al + be, al + be + 2) <= 0:
        raise ParameterDomainError(f"alpha={alpha}, beta={beta} make a recurrence factor nonpositive")
    family = MeasureFamily("jacobi", {"a": a, "b": b, "alpha": alpha, "beta": beta},
                           lambda k: jacobi_coefficients(a * k + alpha, b * k + beta),
                           scaling="x")
    a0, b0 = jacobi_growing_limit(a, b)
    limit = _constant_limit(a0, b0, "a0 = 2 sqrt((a+1)(b+1)(a+b+1))/(a+b+2)^2, b0 = (b^2-a^2)/(a+b+2)^2")
    return family, limit


def family_laguerre_growing(a: float, alpha: float = 0.0, probe: Sequence[int] = DEFAULT_PROBE):
    """Laguerre p_n^{a k + alpha}(k x): a_{n,k} = sqrt(n(n+ak+alpha))/k, b_{n,k} = (2n+ak+alpha+1)/k.

    The limit constants are extrapolated from the coefficients themselves.
    The literature value a + 1 for the off-diagonal limit is kept in
    ``limit.printed`` for comparison; the coefficients give sqrt(a + 1).
    """
    if a < 0 or alpha <= -1:
        raise ParameterDomainError(f"need a >= 0 and alpha > -1, got a={a}, alpha={alpha}")

    def rule(k):
        return CoefficientSequence(lambda n: math.sqrt(n * (n + a * k + alpha)) / k,
                                   lambda n: (2.0 * n + a * k + alpha + 1.0) / k,
                                   name=f"laguerre-growing[{k}]")

    family = MeasureFamily("laguerre", {"a": a, "alpha": alpha}, rule, scaling="k x")
    est = numeric_limit(family, 0, probe)
    a0, b0 = est.a, est.b
    printed = {"a": a + 1.0, "b": a + 2.0}
    note = (f"extrapolated a0 = {a0:.10g}, b0 = {b0:.10g}; "
            f"printed a0 = {printed['a']:g}, b0 = {printed['b']:g}")
    limit = LimitData(BilateralCoefficients.from_constant(a0, b0), note,
                      measure=constant_matrix_measure(a0, b0), printed=printed)
    return family, limit


def log_gamma_signed(x: float) -> Tuple[float, int]:
    """(log|Gamma(x)|, sign Gamma(x)); raises at the poles."""
    if x <= 0 and x == math.floor(x):
        raise ParameterDomainError(f"Gamma has a pole at {x}")
    sign = -1 if (x < 0 and math.floor(x) % 2 == 1) else 1
    return math.lgamma(x), sign


def dual_hahn_lattice(alpha: float, beta: float, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lattice x_j = j(j+alpha+beta+1) and probability weights pi_j, j = 0..N-1.

    Weights are accumulated in log space; at j = 0 the product
    Gamma(alpha+beta+1)(alpha+beta+1) is folded into Gamma(alpha+beta+2).
    """
    if alpha <= -1 or beta <= -1 or N < 1:
        raise ParameterDomainError(f"need alpha, beta > -1 and N >= 1, got {alpha}, {beta}, {N}")
    s = alpha + beta + 1.0
    j = np.arange(N)
    nodes = j * (j + s)
    logs = np.empty(N)
    signs = np.empty(N)
    for i in range(N):
        terms = [
            (math.lgamma(N) - math.lgamma(i + 1) - math.lgamma(N - i), 1),
            log_gamma_signed(beta + N),
            log_gamma_signed(i + alpha + 1),
        ]
        if i == 0:
            terms.append(log_gamma_signed(s + 1))
        else:
            terms.append(log_gamma_signed(i + s))
            terms.append((math.log(2 * i + s), 1))
        denom = [log_gamma_signed(N + s + i), log_gamma_signed(i + beta + 1), log_gamma_signed(alpha + 1)]
        logs[i] = sum(t[0] for t in terms) - sum(t[0] for t in denom)
        signs[i] = np.prod([t[1] for t in terms]) * np.prod([t[1] for t in denom])
    return nodes.astype(float), signs * np.exp(logs)


def dual_hahn_coefficients(alpha: float, beta: float, N: int, scale: float = 1.0,
                           shift: float = 0.0) -> CoefficientSequence:
    """Orthonormal dual Hahn data a_n^2 = D_n B_{n-1}, b_n = D_n + B_n, in x -> (x - shift)/scale."""

    def a(n):
        return math.sqrt(n * (N + beta - n) * (N - n) * (alpha + n)) / scale

    def b(n):
        return ((N - 1 - n) * (alpha + 1 + n) + n * (N + beta - n) - shift) / scale

    return CoefficientSequence(a, b, cutoff=N, name=f"dual-hahn({alpha}, {beta}, {N})")


def family_dual_hahn(alpha: float = 0.0, beta="fixed", scaling: str = "linear", beta_value: float = 1.0):
    """Dual Hahn polynomials with N = k in one of two scalings.

    ``beta="fixed"`` with ``scaling="linear"``: p_n(k x; alpha, beta, k); the
    limit is one-sided, the Laguerre L^beta Jacobi matrix on negative indices.
    ``beta="half"`` with ``scaling="hermite"``: p_n(k^{3/2} x + k^2/2; alpha, k/2, k);
    the limit is the Hermite Jacobi matrix on negative indices.
    """
    if alpha <= -1:
        raise ParameterDomainError(f"need alpha > -1, got {alpha}")
    if (beta, scaling) == ("fixed", "linear"):
        if beta_value <= -1:
            raise ParameterDomainError(f"need beta > -1, got {beta_value}")
        bv = float(beta_value)

        def params(k):
            return bv, float(k), 0.0

        def a0(j):
            return math.sqrt(-j * (bv - j))

        def b0(j):
            return -2.0 * j + bv - 1.0

        bil = BilateralCoefficients(a0, b0, one_sided=True, name=f"laguerre-J-({bv})")
        limit = LimitData(bil, f"one-sided: J- of Laguerre L^{bv}; a0_j^2 = -j(beta-j), b0_j = -2j+beta-1 (j<0)",
                          classical=("laguerre", bv))
        rate, label = 1.0, {"alpha": alpha, "beta": bv, "scaling": scaling}
        scale_text = "k x"
    elif (beta, scaling) == ("half", "hermite"):
        def params(k):
            return k / 2.0, float(k) ** 1.5, k * k / 2.0

        bil = BilateralCoefficients(lambda j: math.sqrt(-j / 2.0), lambda j: 0.0, one_sided=True,
                                    name="hermite-J-")
        limit = LimitData(bil, "one-sided: J- of Hermite; a0_j^2 = -j/2, b0_j = 0 (j<0)",
                          classical=("hermite",))
        rate, label = 0.5, {"alpha": alpha, "beta": "half", "scaling": scaling}
        scale_text = "k^(3/2) x + k^2/2"
    else:
        raise ParameterDomainError(
            f"unsupported dual Hahn mode beta={beta!r}, scaling={scaling!r}; "
            "use ('fixed', 'linear') or ('half', 'hermite')")

    def rule(k):
        bk, s, t = params(k)
        return dual_hahn_coefficients(alpha, bk, k, s, t)

    def support(k):
        bk, s, t = params(k)
        x, w = dual_hahn_lattice(alpha, bk, k)
        return (x - t) / s, w

    family = MeasureFamily("dual-hahn", label, rule, cutoff_rule="N = k", scaling=scale_text,
                           support=support, rate=rate)
    return family, limit


def build_family(name: str, **p):
    """Construct a family by name from plain parameters (CLI / JSON entry point)."""
    if name == "mab":
        a, b = float(p.get("a", 1.0)), float(p.get("b", 0.0))
        member = p.get("member", "exact")
        if member == "exact":
            return family_mab(a, b)
        if member == "perturbed":
            return family_mab(a, b, perturbed_member(a, b))
        raise ParameterDomainError(f"unknown M(a,b) member {member!r}")
    if name == "rescaled":
        base = p.get("base", "laguerre")
        if base == "laguerre":
            alpha = float(p.get("alpha", 0.0))
            if alpha <= -1:
                raise ParameterDomainError(f"need alpha > -1, got {alpha}")
            fam, lim = family_rescaled(laguerre_coefficients(alpha), lambda k: float(k))
        elif base == "hermite":
            fam, lim = family_rescaled(hermite_coefficients(), lambda k: math.sqrt(k))
        else:
            raise ParameterDomainError(f"unknown rescaled base {base!r}")
        fam.params = {"base": base, **({"alpha": float(p.get("alpha", 0.0))} if base == "laguerre" else {})}
        return fam, lim
    if name == "wall":
        return family_wall(float(p.get("b", 0.5)), float(p.get("c", 0.25)))
    if name == "jacobi":
        return family_jacobi_growing(float(p.get("a", 1.0)), float(p.get("b", 1.0)),
                                     float(p.get("alpha", 0.0)), float(p.get("beta", 0.0)))
    if name == "laguerre":
        return family_laguerre_growing(float(p.get("a", 1.0)), float(p.get("alpha", 0.0)))
    if name == "dual-hahn":
        beta = p.get("beta", 1.0)
        scaling = p.get("scaling", "hermite" if beta == "half" else "linear")
        if beta == "half":
            return family_dual_hahn(float(p.get("alpha", 0.0)), "half", scaling)
        return family_dual_hahn(float(p.get("alpha", 0.0)), "fixed", scaling, float(beta))
    raise ParameterDomainError(f"unknown family {name!r}")


def family_from_json(text: str):
    doc = json.loads(text)
    return build_family(doc["name"], **doc.get("params", {}))
