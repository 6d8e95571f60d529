"""Gauss rules for Pi_nu, rho and the angular measure."""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci_integrate
from scipy import special

from jacobi_heat.quadrature import (
    PointMassRule,
    QuadratureError,
    QuadratureRule,
    TensorRule,
    adaptive_doubling,
    gauss_jacobi_nodes,
    gauss_jacobi_rule,
    integrate,
    pi_measure_rule,
    pi_moment,
    rho_rule,
    trig_rule,
)
from jacobi_heat.specfun import jacobi_poly_matrix, log_gamma, log_jacobi_norm


def test_two_point_rule_for_uniform_measure():
    # nu = 1/2 is the uniform probability on (-1, 1): Gauss-Legendre with halved weights
    rule = gauss_jacobi_rule(0.5, 2)
    np.testing.assert_allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], rtol=1e-15)


@pytest.mark.parametrize("nu", [-0.4, 0.0, 0.7, 2.3])
def test_two_point_rule_solves_moment_equations(nu):
    rule = gauss_jacobi_rule(nu, 2)
    for k in range(4):
        assert np.sum(rule.weights * rule.nodes ** k) == pytest.approx(pi_moment(nu, k), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("nu", [-0.4, 0.0, 0.7, 2.3])
@pytest.mark.parametrize("degree", [1, 5, 24, 64])
def test_moments_exact_to_degree(nu, degree):
    rule = gauss_jacobi_rule(nu, degree)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-12)
    for k in range(2 * degree):
        got = integrate(rule, lambda u: u ** k)
        ref = pi_moment(nu, k)
        if k % 2:
            assert abs(got) <= 1e-13
        else:
            assert got == pytest.approx(ref, rel=1e-11)


def test_moment_formula_against_scipy_integral():
    for nu in (-0.4, 0.0, 0.7, 2.3):
        norm = special.gamma(nu + 1) / (math.sqrt(math.pi) * special.gamma(nu + 0.5))
        for k in (0, 2, 6):
            ref, _ = sci_integrate.quad(lambda u: norm * u ** k * (1 - u * u) ** (nu - 0.5), -1, 1, limit=200)
            assert pi_moment(nu, k) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("nu", [-0.4, 0.0, 0.7, 2.3])
def test_exactness_reproduces_orthogonality(nu):
    m = 12
    rule = gauss_jacobi_rule(nu, m)
    mat = jacobi_poly_matrix(nu - 0.5, nu - 0.5, rule.nodes, 2 * m - 1)
    gram = (mat * rule.weights) @ mat.T
    # exact norms: the Jacobi norms times the Pi_nu normalization
    scale = math.exp(log_gamma(nu + 1) - 0.5 * math.log(math.pi) - log_gamma(nu + 0.5))
    norms = scale * np.exp(log_jacobi_norm(nu - 0.5, nu - 0.5, np.arange(2 * m)))
    for k in range(2 * m):
        for j in range(2 * m - k):
            if j == k:
                assert gram[k, k] == pytest.approx(norms[k], rel=1e-10)
            else:
                assert abs(gram[k, j]) <= 1e-10 * math.sqrt(norms[k] * norms[j])


def test_nodes_inside_support_and_increasing():
    for a, b, m in [(-0.5, -0.5, 200), (3.0, -0.9, 100), (0.0, 0.0, 4096)]:
        x, w = gauss_jacobi_nodes(a, b, m)
        assert np.all(np.diff(x) > 0) and x[0] > -1 and x[-1] < 1
        assert np.all(w > 0)


def test_gauss_nodes_match_scipy():
    for a, b, m in [(-0.5, 0.5, 30), (2.3, 0.7, 64), (-0.9, 1.5, 17)]:
        x, w = gauss_jacobi_nodes(a, b, m)
        xr, wr = special.roots_jacobi(m, a, b)
        np.testing.assert_allclose(x, xr, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(w, wr, rtol=1e-10)


def test_rule_validation():
    with pytest.raises(ValueError):
        gauss_jacobi_rule(-0.5, 4)
    with pytest.raises(ValueError):
        gauss_jacobi_rule(0.3, 0)
    with pytest.raises(ValueError):
        QuadratureRule("Pi", (0.0,), 2, np.array([0.5, -0.5]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        pi_measure_rule(-0.6)


# --- point mass -----------------------------------------------------------------------

def test_point_mass_rule():
    rule = pi_measure_rule(-0.5)
    assert isinstance(rule, PointMassRule)
    assert list(rule.nodes) == [-1.0, 1.0] and list(rule.weights) == [0.5, 0.5]
    f = lambda s: s ** 3 + 2 * s ** 2 + 0.5
    assert integrate(rule, f) == pytest.approx(0.5 * (f(-1.0) + f(1.0)))
    for z in (0.0, 0.3, 5.0):
        assert integrate(rule, lambda s: np.exp(z * s)) == pytest.approx(math.cosh(z), rel=1e-15)


def test_normalization_at_zero_exponent():
    assert integrate(pi_measure_rule(0.5, 8), lambda s: np.exp(0.0 * s)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("f", [lambda s: np.exp(2 * s), lambda s: np.cos(3 * s), lambda s: 1 / (2 + s)])
def test_weak_limit_continuity(f):
    near = integrate(pi_measure_rule(-0.5 + 1e-6, 64), f)
    at = integrate(pi_measure_rule(-0.5), f)
    assert abs(near - at) <= 1e-4


# --- rho and angular rules ----------------------------------------------------------------

def test_integrate_examples():
    assert integrate(rho_rule(0.0, 0.0, 4), lambda x: np.ones_like(x)) == pytest.approx(2.0, rel=1e-14)
    assert integrate(pi_measure_rule(1.3, 4), lambda x: np.ones_like(x)) == pytest.approx(1.0, rel=1e-14)
    # sin(t/2) cos(t/2) = sin(t)/2 integrates to 1 on (0, pi)
    ref, _ = sci_integrate.quad(lambda t: math.sin(t / 2) * math.cos(t / 2), 0, math.pi)
    assert ref == pytest.approx(1.0)
    assert integrate(trig_rule(0.0, 0.0, 4), lambda t: np.ones_like(t)) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("a,b", [(-0.5, -0.5), (0.5, 1.5), (2.3, 0.7)])
def test_trig_rule_matches_beta_integrals(a, b):
    # with u = sin^2(t/2): int sin(t/2)^(2a+1) cos(t/2)^(2b+1) (1-u)^k dt = B(a+1, b+1+k)
    rule = trig_rule(a, b, 40)
    for k in range(4):
        ref = float(mpmath.beta(a + 1, b + 1 + k))
        got = integrate(rule, lambda t: np.cos(t / 2) ** (2 * k))
        assert got == pytest.approx(ref, rel=1e-13)
    assert rule.support == (0.0, math.pi)
    assert 0 < rule.nodes[0] and rule.nodes[-1] < math.pi


def test_tensor_rule():
    rule = TensorRule(pi_measure_rule(0.5, 6), pi_measure_rule(-0.5))
    # uniform u, two atoms in v
    got = integrate(rule, lambda u, v: u ** 2 * np.exp(v))
    assert got == pytest.approx((1 / 3) * math.cosh(1.0), rel=1e-14)


def test_integrate_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        integrate(rho_rule(0.0, 0.0, 4), lambda x: np.full_like(x, np.nan))


# --- adaptive doubling --------------------------------------------------------------------

def test_adaptive_smooth_stops_at_first_doubling():
    value, degree = adaptive_doubling(lambda m: pi_measure_rule(0.7, m), lambda u: u ** 4, 1e-12, 8)
    assert degree == 16
    assert value == pytest.approx(pi_moment(0.7, 4), rel=1e-13)


def test_adaptive_boundary_peak():
    f = lambda u: (1 - u) ** -0.4
    nu = 0.8
    norm = special.gamma(nu + 1) / (math.sqrt(math.pi) * special.gamma(nu + 0.5))
    ref, _ = sci_integrate.quad(lambda u: norm * (1 - u) ** (nu - 0.9) * (1 + u) ** (nu - 0.5), -1, 1, limit=500)
    # algebraic convergence: the error tracks the last change between doublings
    errors = []
    for tol in (1e-4, 1e-5, 1e-6):
        value, degree = adaptive_doubling(lambda m: pi_measure_rule(nu, m), f, tol, 8)
        assert degree > 16
        errors.append(abs(value - ref) / ref)
        assert errors[-1] <= tol
    assert errors[0] > errors[1] > errors[2]


def test_adaptive_errors():
    with pytest.raises(ValueError):
        adaptive_doubling(lambda m: pi_measure_rule(0.5, m), lambda u: u, 0.0)
    with pytest.raises(QuadratureError) as info:
        adaptive_doubling(lambda m: pi_measure_rule(0.5, m), lambda u: np.abs(u - 0.1234) ** 0.01, 1e-15, 8, 64)
    assert info.value.best is not None and info.value.difference > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-0.45, max_value=4.0), st.integers(min_value=1, max_value=40))
def test_rule_is_a_probability_measure(nu, degree):
    rule = gauss_jacobi_rule(nu, degree)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-12)
    assert abs(rule.weights @ rule.nodes) <= 1e-13
    np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)
