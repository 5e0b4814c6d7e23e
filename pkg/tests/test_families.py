import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import comb, eval_genlaguerre

from weaklimit.errors import ParameterDomainError
from weaklimit.families import (
    build_family,
    dual_hahn_coefficients,
    dual_hahn_lattice,
    family_dual_hahn,
    family_from_json,
    family_jacobi_growing,
    family_laguerre_growing,
    family_mab,
    family_rescaled,
    family_wall,
    jacobi_growing_limit,
    laguerre_coefficients,
    log_gamma_signed,
    numeric_limit,
    richardson,
)
from weaklimit.jacobi import gauss_quadrature, truncate
from weaklimit.recurrence import eval_orthonormal


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_richardson_exact_on_quadratics_in_h(c0, c1, c2):
    ns = [10, 20, 40, 80]
    vals = [c0 + c1 / n + c2 / n ** 2 for n in ns]
    est, err = richardson(ns, vals)
    assert est == pytest.approx(c0, abs=1e-9)
    assert err < 1e-8


def test_richardson_rate_half():
    ns = [100, 400, 1600]
    vals = [1.0 + 2.0 / math.sqrt(n) for n in ns]
    assert richardson(ns, vals, rate=0.5)[0] == pytest.approx(1.0, abs=1e-12)


def test_mab_exact_member_is_constant():
    fam, lim = family_mab(1.0, 0.0)
    c = fam.coefficients(17)
    assert c.a(5) == 0.5 and c.b(9) == 0.0
    est = numeric_limit(fam, 2)
    assert est == (0.5, 0.0, 0.0, True)
    assert lim.bilateral.constant == (0.5, 0.0)


def test_mab_perturbed_member_limit():
    fam, lim = build_family("mab", a=2.0, b=0.5, member="perturbed")
    est = numeric_limit(fam, 0)
    assert est.a == pytest.approx(1.0, abs=1e-10) and est.b == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("base,expect", [("laguerre", (1.0, 2.0)), ("hermite", (math.sqrt(0.5), 0.0))])
def test_rescaled_limits(base, expect):
    # Laguerre x/k: a_n/n -> 1, b_n/n -> 2; Hermite x/sqrt(k): a_n/sqrt(n) -> 1/sqrt(2)
    fam, lim = build_family("rescaled", base=base)
    assert lim.bilateral.a(0) == pytest.approx(expect[0], abs=1e-9)
    assert lim.bilateral.b(0) == pytest.approx(expect[1], abs=1e-9)
    est = numeric_limit(fam, -3)
    assert est.a == pytest.approx(expect[0], abs=1e-6)


def test_rescaled_rejects_bad_scaling():
    with pytest.raises(ParameterDomainError):
        family_rescaled(laguerre_coefficients(0.0), lambda k: 2.0 ** k)
    with pytest.raises(ParameterDomainError):
        family_rescaled(laguerre_coefficients(0.0), lambda k: 1.0 / k)
    # c_k = k^2 sends a_n/c_n to 0: degenerate
    with pytest.raises(ParameterDomainError):
        family_rescaled(laguerre_coefficients(0.0), lambda k: float(k) ** 2)


@pytest.mark.parametrize("b,c", [(0.5, 0.25), (0.2, 0.7)])
def test_wall_limit_constants(b, c):
    fam, lim = family_wall(b, c)
    est = numeric_limit(fam, 1)
    assert est.converged
    assert est.a == pytest.approx(c * math.sqrt(b * (1 - c) * (1 - b * c)), abs=1e-9)
    assert est.b == pytest.approx((b + 1 - 2 * b * c) * c, abs=1e-9)


def test_wall_domain_and_degeneracy_warning():
    with pytest.raises(ParameterDomainError):
        family_wall(1.5, 0.25)
    with pytest.raises(ParameterDomainError):
        family_wall(0.5, 0.0)
    with pytest.warns(RuntimeWarning):
        family_wall(0.5, 1e-4)


def test_jacobi_growing_limit():
    fam, lim = family_jacobi_growing(1.0, 1.0)
    assert lim.bilateral.a(0) == pytest.approx(math.sqrt(3) / 4)
    est = numeric_limit(fam, 0)
    assert est.a == pytest.approx(0.4330127, abs=1e-7) and abs(est.b) < 1e-10
    a0, b0 = jacobi_growing_limit(1.0, 3.0)
    est = numeric_limit(family_jacobi_growing(1.0, 3.0)[0], 2)
    assert (est.a, est.b) == pytest.approx((a0, b0), abs=1e-8)
    with pytest.raises(ParameterDomainError):
        family_jacobi_growing(0.0, 1.0)


def test_laguerre_growing_offdiagonal_is_sqrt():
    fam, lim = family_laguerre_growing(1.0)
    assert lim.bilateral.a(0) == pytest.approx(math.sqrt(2), abs=1e-9)
    assert lim.bilateral.b(0) == pytest.approx(3.0, abs=1e-9)
    assert lim.printed == {"a": 2.0, "b": 3.0}
    with pytest.raises(ParameterDomainError):
        family_laguerre_growing(-1.0)


def test_numeric_limit_validation():
    fam, _ = family_mab(1.0, 0.0)
    with pytest.raises(ValueError):
        numeric_limit(fam, 0, probe=(10, 5))
    with pytest.raises(ValueError):
        numeric_limit(fam, -20, probe=(10, 20))


@pytest.mark.parametrize("alpha,beta,N", [(0.0, 1.0, 6), (0.5, 2.0, 12), (-0.5, 0.3, 25), (1.0, 7.5, 30)])
def test_dual_hahn_lattice_is_the_spectrum(alpha, beta, N):
    x, w = dual_hahn_lattice(alpha, beta, N)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(w > 0)
    c = dual_hahn_coefficients(alpha, beta, N)
    J = truncate(c, N)
    evals = np.linalg.eigvalsh(J.to_dense())
    assert np.allclose(evals, x, rtol=1e-12, atol=1e-10)
    rule = gauss_quadrature(J)
    assert np.allclose(rule.weights, w, atol=1e-12)


def test_dual_hahn_two_point_measure():
    alpha, beta = 0.7, 1.3
    x, w = dual_hahn_lattice(alpha, beta, 2)
    c = dual_hahn_coefficients(alpha, beta, 2)
    # the two-point measure has mean b_0 and variance a_1^2
    mean = np.dot(w, x)
    var = np.dot(w, x ** 2) - mean ** 2
    assert mean == pytest.approx(c.b(0)) and var == pytest.approx(c.a(1) ** 2)


def test_dual_hahn_orthonormality_small_n():
    fam, _ = family_dual_hahn(0.0, "fixed", "linear", 1.0)
    x, w = fam.support(20)
    c = fam.coefficients(20)
    P = np.array([eval_orthonormal(c, j, x) for j in range(20)])
    assert np.allclose((P * w) @ P.T, np.eye(20), atol=1e-9)


def test_dual_hahn_modes_and_errors():
    fam, lim = family_dual_hahn(0.0, "half", "hermite")
    assert lim.classical == ("hermite",) and lim.bilateral.one_sided
    assert fam.rate == 0.5
    fam, lim = family_dual_hahn(0.0, "fixed", "linear", 2.0)
    assert lim.classical == ("laguerre", 2.0)
    assert lim.bilateral.a(-3) == pytest.approx(math.sqrt(15))
    assert lim.bilateral.b(-1) == pytest.approx(3.0)
    with pytest.raises(ParameterDomainError):
        family_dual_hahn(0.0, "half", "linear")
    with pytest.raises(ParameterDomainError):
        family_dual_hahn(-2.0)
    with pytest.raises(ParameterDomainError):
        dual_hahn_lattice(0.0, -1.0, 5)


@pytest.mark.parametrize("params", [dict(beta=1.0), dict(beta="half")])
def test_dual_hahn_numeric_limits(params):
    fam, lim = build_family("dual-hahn", **params)
    for j in (-1, -2, -3):
        est = numeric_limit(fam, j)
        tol = 1e-8 if params["beta"] == 1.0 else 1e-2
        assert est.a == pytest.approx(lim.bilateral.a(j), abs=tol)
        assert est.b == pytest.approx(lim.bilateral.b(j), abs=tol)


def test_log_gamma_signed():
    assert log_gamma_signed(5.0) == (pytest.approx(math.log(24)), 1)
    assert log_gamma_signed(-0.5)[1] == -1
    assert log_gamma_signed(-1.5)[1] == 1
    with pytest.raises(ParameterDomainError):
        log_gamma_signed(-2.0)


def test_json_roundtrip_and_unknowns():
    fam, _ = build_family("wall", b=0.5, c=0.25)
    again, _ = family_from_json(fam.to_json())
    assert again.descriptor() == fam.descriptor()
    assert json.loads(fam.to_json())["params"] == {"b": 0.5, "c": 0.25}
    with pytest.raises(ParameterDomainError):
        build_family("nope")
    with pytest.raises(ParameterDomainError):
        build_family("mab", member="other")
    with pytest.raises(ParameterDomainError):
        build_family("rescaled", base="other")


def test_binomial_norm_identity():
    # h_k = binom(k+beta, k) is the squared norm of L_k^beta under x^beta e^-x / Gamma(beta+1)
    beta = 1.5
    rule = gauss_quadrature(truncate(laguerre_coefficients(beta), 30))
    for k in range(5):
        h = np.dot(rule.weights, eval_genlaguerre(k, beta, rule.nodes) ** 2)
        assert h == pytest.approx(comb(k + beta, k), rel=1e-10)
