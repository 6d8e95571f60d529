"""Heat and Poisson kernels: series, closed forms and integral routes."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from mp_oracles import half_integer_kernel
from jacobi_heat.envelopes import fit_band
from jacobi_heat.kernels import (
    HeatPoint,
    KernelValue,
    PrecisionFloorError,
    SeriesTruncation,
    dirichlet_neumann_oracle,
    func_heat,
    heat_series,
    heat_series_grid,
    laguerre_kernel,
    poisson_integral,
    poisson_series,
    reduction_heat,
    sphere_s1_kernel,
    theta_sum,
    trig_heat,
    trig_heat_grid,
    trig_prefactor,
)
from jacobi_heat.quadrature import pi_measure_rule, integrate
from jacobi_heat.specfun import JacobiParams, jacobi_norm

HALF_PAIRS = [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]
ANGLE_GRID = np.arange(12) * math.pi / 11
TIMES = (0.01, 0.05, 0.2, 1.0)
SIX_TIMES = (0.01, 0.02, 0.05, 0.2, 1.0, 2.0)

unit = st.floats(min_value=-1.0, max_value=1.0)
angle = st.floats(min_value=0.0, max_value=math.pi)
in_range = st.floats(min_value=-0.5, max_value=3.0)


def _direct_series(a, b, x, y, t, n_terms=60):
    """Spectral sum with scipy polynomials and norms (independent of the package)."""
    n = np.arange(n_terms)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (2 ** (a + b + 1) / (2 * n + a + b + 1) * special.gamma(n + a + 1) * special.gamma(n + b + 1)
             / (special.gamma(n + a + b + 1) * special.gamma(n + 1)))
    if a + b == -1:
        h[0] = 2 ** (a + b + 1) * special.gamma(a + 1) * special.gamma(b + 1) / special.gamma(a + b + 2)
    terms = np.exp(-t * n * (n + a + b + 1)) * special.eval_jacobi(n, a, b, x) * special.eval_jacobi(n, a, b, y) / h
    return float(np.sum(terms))


# --- types -------------------------------------------------------------------------

def test_truncation_validation():
    with pytest.raises(ValueError):
        SeriesTruncation(max_terms=0)
    with pytest.raises(ValueError):
        SeriesTruncation(tail_tol=0.0)


def test_heat_point_validation():
    with pytest.raises(ValueError):
        HeatPoint(-0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        HeatPoint(1.0, 4.0, 1.0)
    with pytest.raises(ValueError):
        HeatPoint(1.0, 1.0, 0.0)
    p = HeatPoint(0.0, math.pi, 0.5)
    assert p.x == 1.0 and p.y == pytest.approx(-1.0)


# --- the series -------------------------------------------------------------------------

def test_large_time_limit():
    kv = heat_series(JacobiParams(0, 0), 1.0, 1.0, 1e6)
    assert kv.value == pytest.approx(0.5, abs=1e-12)
    assert kv.certified


def test_precision_floor():
    with pytest.raises(PrecisionFloorError):
        heat_series(JacobiParams(0, 0), 0.2, 0.3, 1e-7)
    with pytest.raises(ValueError):
        heat_series(JacobiParams(0, 0), 1.2, 0.3, 0.1)


def test_out_of_range_parameters_are_uncertified():
    kv = heat_series(JacobiParams(-0.7, 0.2), 0.2, 0.3, 0.1)
    assert not kv.certified
    assert kv.value > 0


@pytest.mark.parametrize("a,b", [(-0.5, -0.5), (0.0, 0.0), (0.5, 1.5), (2.3, 0.7), (-0.8, 0.3)])
def test_series_matches_direct_scipy_sum(a, b):
    for x, y, t in [(0.3, -0.2, 0.5), (1.0, 0.9, 0.2), (-1.0, -0.7, 1.0), (0.0, 0.0, 0.3)]:
        kv = heat_series(JacobiParams(a, b), x, y, t)
        assert kv.value == pytest.approx(_direct_series(a, b, x, y, t), rel=1e-11)


@settings(max_examples=60, deadline=None)
@given(in_range, in_range, unit, unit, st.floats(min_value=1e-3, max_value=5.0))
def test_series_symmetric(a, b, x, y, t):
    p = JacobiParams(a, b)
    assert heat_series(p, x, y, t).value == heat_series(p, y, x, t).value


def test_grid_symmetric_within_an_ulp():
    p = JacobiParams(0.5, 1.5)
    xs = np.cos(np.linspace(0, math.pi, 25))
    vals = heat_series_grid(p, xs, xs, 0.01).values
    scale = np.maximum(np.abs(vals), np.abs(vals.T))
    assert np.all(np.abs(vals - vals.T) <= 1e-15 * scale + 1e-300)


@pytest.mark.parametrize("a,b", [(-0.5, -0.5), (0.0, 0.0), (0.5, 1.5), (2.3, 0.7)])
def test_positive_where_resolved(a, b):
    xs = np.cos(np.linspace(0, math.pi, 33))
    for t in (1e-3, 0.01, 0.1, 1.0):
        kg = heat_series_grid(JacobiParams(a, b), xs, xs, t)
        assert kg.certified
        res = kg.resolved
        assert np.all(kg.values[res] - kg.tail_bound > 0)
        # unresolved points are rounding noise around a tiny positive value
        assert np.all(np.abs(kg.values[~res]) <= 1e3 * kg.rounding[~res])


def test_kernel_value_resolution_flag():
    assert KernelValue(1.0, 0.0, 3, True, 1e-16).resolved
    assert not KernelValue(1e-14, 0.0, 3, True, 1e-16).resolved


# --- trigonometric settings ------------------------------------------------------------

def test_trig_consistency_at_midpoint():
    p = JacobiParams(0, 0)
    point = HeatPoint(math.pi / 2, math.pi / 2, 1.0)
    assert trig_heat(p, point).value == pytest.approx(2 * math.exp(-0.25) * heat_series(p, 0.0, 0.0, 1.0).value,
                                                      rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(in_range, in_range, angle, angle, st.floats(min_value=1e-2, max_value=3.0))
def test_trig_nonnegative_where_resolved(a, b, th, ph, t):
    kv = trig_heat(JacobiParams(a, b), HeatPoint(th, ph, t))
    if kv.resolved:
        assert kv.value > 0


def test_trig_matches_direct_normalized_sum():
    # (-1/2,-1/2): sum exp(-t n^2) P-cal_n P-cal_n, P-cal_n = 2^(s/2) h_n^(-1/2) P_n(cos)
    a = b = -0.5
    t = 0.1
    x = math.cos(1.0)
    n = np.arange(80)
    h = np.array([jacobi_norm(JacobiParams(a, b), k) for k in n])
    pn = special.eval_jacobi(n, a, b, x)
    direct = float(np.sum(np.exp(-t * n ** 2) * pn * pn / h))
    assert trig_heat(JacobiParams(a, b), HeatPoint(1.0, 1.0, t)).value == pytest.approx(direct, rel=1e-13)


def test_func_setting_limits_and_identity():
    assert func_heat(JacobiParams(0.3, 0.0), HeatPoint(0.0, 1.0, 0.1)).value == 0.0
    p = JacobiParams(-0.5, -0.5)
    point = HeatPoint(0.4, 2.0, 0.07)
    assert func_heat(p, point).value == trig_heat(p, point).value


def test_func_setting_matches_orthonormal_functions():
    a, b = 0.5, 1.5
    s = a + b + 1
    th, ph, t = 1.1, 2.2, 0.3
    n = np.arange(60)
    h = (2 ** s / (2 * n + s) * special.gamma(n + a + 1) * special.gamma(n + b + 1)
         / (special.gamma(n + s) * special.gamma(n + 1)))

    def phi(th):
        return (math.sin(th / 2) ** (a + 0.5) * math.cos(th / 2) ** (b + 0.5) * 2 ** (s / 2) / np.sqrt(h)
                * special.eval_jacobi(n, a, b, math.cos(th)))

    direct = float(np.sum(np.exp(-t * (n + s / 2) ** 2) * phi(th) * phi(ph)))
    assert func_heat(JacobiParams(a, b), HeatPoint(th, ph, t)).value == pytest.approx(direct, rel=1e-12)


def test_prefactor_endpoint_limits():
    assert trig_prefactor(JacobiParams(0.5, 0.5), 0.0, 1.0) == 0.0
    assert trig_prefactor(JacobiParams(-0.5, 0.5), 0.0, math.pi) == 0.0
    assert trig_prefactor(JacobiParams(-0.5, -0.5), 0.0, math.pi) == 1.0
    assert math.isinf(trig_prefactor(JacobiParams(-0.7, 0.0), 0.0, 1.0))


# --- closed form for half-integer parameters ----------------------------------------------

@pytest.mark.parametrize("a,b", HALF_PAIRS)
def test_oracle_matches_high_precision_images(a, b):
    p = JacobiParams(a, b)
    for t in TIMES:
        for th in ANGLE_GRID:
            for ph in ANGLE_GRID:
                ref = float(half_integer_kernel(a, b, th, ph, t))
                assert dirichlet_neumann_oracle(p, HeatPoint(th, ph, t)) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(HALF_PAIRS),
       st.one_of(st.floats(min_value=0.0, max_value=math.pi),
                 st.floats(min_value=1e-14, max_value=1e-2),
                 st.floats(min_value=1e-14, max_value=1e-2).map(lambda d: math.pi - d)),
       st.one_of(st.floats(min_value=0.0, max_value=math.pi),
                 st.floats(min_value=1e-14, max_value=1e-2).map(lambda d: math.pi - d)),
       st.floats(min_value=-4.0, max_value=0.7).map(lambda e: 10.0 ** e))
def test_oracle_near_endpoints(pair, th, ph, t):
    ref = float(half_integer_kernel(*pair, th, ph, t))
    if ref < 1e-290:
        return
    got = dirichlet_neumann_oracle(JacobiParams(*pair), HeatPoint(th, ph, t))
    # conditioning of exp(-(theta - phi)^2 / 4t) sets the floor
    tol = 1e-13 * (1.0 + (th - ph) ** 2 / (4 * t))
    assert got == pytest.approx(ref, rel=tol)


@pytest.mark.parametrize("a,b", HALF_PAIRS)
def test_oracle_matches_fifty_term_sum(a, b):
    t = 0.5
    for th, ph in [(0.3, 2.0), (1.0, 1.0), (0.0, 2.5), (math.pi, 0.7)]:
        direct = 2 ** (a + b + 1) * math.exp(-t * (a + b + 1) ** 2 / 4) * _direct_series(
            a, b, math.cos(th), math.cos(ph), t, 50)
        assert dirichlet_neumann_oracle(JacobiParams(a, b), HeatPoint(th, ph, t)) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("a,b", HALF_PAIRS)
def test_oracle_representations_meet_at_unit_time(a, b):
    p = JacobiParams(a, b)
    for th, ph in [(0.3, 2.0), (0.0, 0.0), (math.pi, 1e-3), (1.2, 1.2)]:
        below = dirichlet_neumann_oracle(p, HeatPoint(th, ph, 1.0 - 1e-13))
        at = dirichlet_neumann_oracle(p, HeatPoint(th, ph, 1.0))
        assert below == pytest.approx(at, rel=1e-12)


def test_oracle_example_value():
    t = 1.0
    expected = (1 + 2 * sum(math.exp(-n * n) for n in range(1, 30))) / math.pi
    assert dirichlet_neumann_oracle(JacobiParams(-0.5, -0.5), HeatPoint(0.0, 0.0, t)) == pytest.approx(expected,
                                                                                                        rel=1e-14)
    p = JacobiParams(-0.5, -0.5)
    assert trig_heat(p, HeatPoint(0.7, 1.3, 0.05)).value == pytest.approx(
        dirichlet_neumann_oracle(p, HeatPoint(0.7, 1.3, 0.05)), rel=1e-10)


def test_oracle_rejects_other_parameters():
    with pytest.raises(ValueError):
        dirichlet_neumann_oracle(JacobiParams(0, 0), HeatPoint(1, 1, 1))


@pytest.mark.parametrize("a,b", HALF_PAIRS)
def test_series_agrees_with_oracle_within_resolution(a, b):
    p = JacobiParams(a, b)
    for t in SIX_TIMES:
        kg = trig_heat_grid(p, ANGLE_GRID, ANGLE_GRID, t)
        for i, th in enumerate(ANGLE_GRID):
            for j, ph in enumerate(ANGLE_GRID):
                ref = dirichlet_neumann_oracle(p, HeatPoint(th, ph, t))
                assert abs(kg.values[i, j] - ref) <= 1e-10 * abs(ref) + kg.rounding[i, j]


def test_theta_sum_two_representations():
    u = np.linspace(-7, 7, 29)
    for half in (False, True):
        for d in (0, 1, 2):
            near = theta_sum(u, 1.0 - 1e-14, half, d)
            at = theta_sum(u, 1.0, half, d)
            np.testing.assert_allclose(near, at, rtol=1e-11, atol=1e-12)
    with pytest.raises(ValueError):
        theta_sum(0.0, 1.0, derivative=3)


# --- circle and Laguerre ----------------------------------------------------------------------

def test_circle_kernel():
    assert sphere_s1_kernel(1.0, 50.0) == pytest.approx(1 / math.pi, rel=1e-14)
    xs = np.linspace(-1, 1, 25)
    for t in (0.01, 0.1, 1.0):
        for x in xs:
            assert abs(sphere_s1_kernel(x, t) - heat_series(JacobiParams(-0.5, -0.5), x, 1.0, t).value) <= 1e-10
    with pytest.raises(ValueError):
        sphere_s1_kernel(1.5, 1.0)
    with pytest.raises(ValueError):
        sphere_s1_kernel(0.5, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-0.9, max_value=3.0), st.floats(min_value=0.01, max_value=3.0),
       st.floats(min_value=0.01, max_value=3.0), st.floats(min_value=0.01, max_value=3.0))
def test_laguerre_symmetric(alpha, x, y, t):
    assert laguerre_kernel(alpha, x, y, t) == pytest.approx(laguerre_kernel(alpha, y, x, t), rel=1e-14)


def test_laguerre_small_argument():
    alpha, x, y, t = 0.7, 0.01, 0.02, 0.5
    two_sinh = 2 * math.sinh(t)
    lead = (math.exp(-0.25 / math.tanh(t) * (x * x + y * y)) / two_sinh * two_sinh ** (-alpha)
            / (2 ** alpha * math.gamma(alpha + 1)))
    z = x * y / two_sinh
    assert z <= 1e-3
    assert laguerre_kernel(alpha, x, y, t) == pytest.approx(lead, rel=2 * z * z)


def test_laguerre_against_scipy():
    for alpha, x, y, t in [(0.0, 1.0, 2.0, 0.3), (1.5, 0.2, 0.3, 0.01), (-0.5, 2.0, 2.1, 1.0)]:
        ref = (math.exp(-0.25 / math.tanh(t) * (x * x + y * y)) / (2 * math.sinh(t)) * (x * y) ** (-alpha)
               * special.iv(alpha, x * y / (2 * math.sinh(t))))
        assert laguerre_kernel(alpha, x, y, t) == pytest.approx(ref, rel=1e-10)
    with pytest.raises(ValueError):
        laguerre_kernel(-1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0])
def test_laguerre_comparability_window(alpha):
    pts = np.linspace(0.02, 0.75 * math.pi, 30)
    r, d = [], []
    for t in np.geomspace(1e-3, 1.0, 10):
        for x in pts:
            for y in pts:
                k = laguerre_kernel(alpha, x, y, t)
                if k <= 1e-280:
                    continue
                shape = (t + x * y) ** (-alpha - 0.5) * t ** -0.5
                r.append(math.log(k / shape))
                d.append((x - y) ** 2 / t)
    C, c1, c2, _, _ = fit_band(np.array(r), np.array(d))
    assert C <= 1e3
    assert c1 >= c2 > 0


# --- Poisson ----------------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(in_range, in_range, angle, angle, st.floats(min_value=0.05, max_value=5.0))
def test_poisson_symmetric(a, b, th, ph, t):
    p = JacobiParams(a, b)
    assert poisson_series(p, HeatPoint(th, ph, t)).value == poisson_series(p, HeatPoint(ph, th, t)).value


def test_poisson_large_time_dominant_term():
    p = JacobiParams(0.5, 1.5)
    t = 40.0
    h0 = jacobi_norm(p, 0)
    dominant = math.exp(-t * p.s / 2) * 2 ** p.s / h0
    assert poisson_series(p, HeatPoint(0.3, 2.0, t)).value == pytest.approx(dominant, rel=1e-12)


def test_poisson_integral_point_masses():
    # both measures are two atoms: a four-term sum with c = 1 / pi
    th, ph, t = 0.8, 2.1, 0.4
    total = 0.0
    for u in (-1, 1):
        for v in (-1, 1):
            q = 1 - u * math.sin(th / 2) * math.sin(ph / 2) - v * math.cos(th / 2) * math.cos(ph / 2)
            total += 0.25 / (math.cosh(t / 2) - 1 + q)
    expected = math.sinh(t / 2) * total / math.pi
    assert poisson_integral(JacobiParams(-0.5, -0.5), HeatPoint(th, ph, t)) == pytest.approx(expected, rel=1e-13)
    # the classical Poisson kernel on the circle
    assert poisson_series(JacobiParams(-0.5, -0.5), HeatPoint(th, ph, t)).value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5, 1.5), (2.3, 0.7)])
def test_poisson_series_matches_integral(a, b):
    p = JacobiParams(a, b)
    for th, ph, t in [(0.4, 0.5, 0.1), (1.5, 3.0, 0.2), (0.1, 2.9, 1.0), (2.0, 2.0, 2.0)]:
        point = HeatPoint(th, ph, t)
        assert poisson_series(p, point).value == pytest.approx(poisson_integral(p, point), rel=1e-6)


def test_poisson_integral_decreases_in_time():
    p = JacobiParams(0.5, 0.5)
    vals = [poisson_integral(p, HeatPoint(1.0, 1.0, t)) for t in (0.1, 0.2, 0.4, 0.8)]
    assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))


def test_poisson_integral_rejects_out_of_range():
    with pytest.raises(ValueError):
        poisson_integral(JacobiParams(-0.7, 0.0), HeatPoint(1.0, 1.0, 1.0))


# --- reduction route -----------------------------------------------------------------------------

@pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5, 1.5), (-0.5, 0.3)])
def test_reduction_matches_series(a, b):
    rng = np.random.default_rng(11)
    p = JacobiParams(a, b)
    for _ in range(10):
        th, ph, t = rng.uniform(0, math.pi), rng.uniform(0, math.pi), rng.uniform(0.01, 1.0)
        series = heat_series(p, math.cos(th), math.cos(ph), t).value
        assert reduction_heat(p, HeatPoint(th, ph, t)) == pytest.approx(series, rel=1e-6)


def test_reduction_at_the_corner_uses_only_the_cosine_slot():
    a, b, t = 0.5, 1.0, 0.2
    lam = a + b + 0.5
    ultra = JacobiParams(lam, lam)
    from jacobi_heat.kernels import reduction_constant
    inner = integrate(pi_measure_rule(b, 64), lambda v: np.array([heat_series(ultra, z, 1.0, t / 4).value for z in v]))
    expected = reduction_constant(JacobiParams(a, b)) * inner
    assert reduction_heat(JacobiParams(a, b), HeatPoint(0.0, 0.0, t)) == pytest.approx(expected, rel=1e-8)


def test_reduction_four_atoms():
    p = JacobiParams(-0.5, -0.5)
    th, ph, t = 0.5, 1.9, 0.3
    assert reduction_heat(p, HeatPoint(th, ph, t)) == pytest.approx(
        heat_series(p, math.cos(th), math.cos(ph), t).value, rel=1e-9)


def test_reduction_rejects_out_of_range():
    with pytest.raises(ValueError):
        reduction_heat(JacobiParams(-0.7, 0.0), HeatPoint(1.0, 1.0, 1.0))
