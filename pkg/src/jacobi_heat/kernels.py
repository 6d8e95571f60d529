"""Heat and Poisson kernels for Jacobi expansions.

Three normalizations are in play:

* pure setting: G_t(x, y) = sum_n exp(-t n(n+s)) P_n(x) P_n(y) / h_n on [-1, 1],
  with s = alpha + beta + 1;
* trigonometric polynomial setting (calligraphic G, H): the same kernel in the
  angle variables, G_trig = 2^s exp(-t s^2/4) G(cos theta, cos phi);
* trigonometric function setting (blackboard G, H): G_trig multiplied by
  (sin(theta/2) sin(phi/2))^(alpha+1/2) (cos(theta/2) cos(phi/2))^(beta+1/2).

Series values carry a tail bound built from the endpoint maximum of |P_n|
and a floating point estimate.  The oscillating series cannot resolve values
far below eps * sum|terms|, which is why the closed-form and integral paths
below exist as independent routes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import TensorRule, adaptive_doubling, pi_measure_rule
from .specfun import (
    JacobiParams,
    log_bessel_i,
    log_gamma,
    log_jacobi_norm,
    log_sup_bound,
)

__all__ = [
    "T_FLOOR",
    "PrecisionFloorError",
    "SeriesTruncation",
    "DEFAULT_TRUNCATION",
    "KernelValue",
    "KernelGrid",
    "HeatPoint",
    "SeriesPlan",
    "plan_series",
    "heat_series",
    "heat_series_grid",
    "heat_series_pairs",
    "trig_prefactor",
    "trig_heat",
    "trig_heat_grid",
    "func_heat",
    "poisson_series",
    "poisson_series_grid",
    "poisson_integral",
    "poisson_kernel_grid",
    "reduction_constant",
    "reduction_heat",
    "theta_sum",
    "dirichlet_neumann_oracle",
    "sphere_s1_kernel",
    "laguerre_kernel",
]

T_FLOOR = 1e-6
EPS = np.finfo(float).eps
# a value counts as resolved when it exceeds its rounding estimate by this factor
RESOLVE_FACTOR = 1e3


class PrecisionFloorError(ValueError):
    """t is below the series cost/precision floor."""


@dataclass(frozen=True)
class SeriesTruncation:
    max_terms: int = 200_000
    tail_tol: float = 1e-13

    def __post_init__(self):
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")


DEFAULT_TRUNCATION = SeriesTruncation()


@dataclass(frozen=True)
class KernelValue:
    """A kernel value with its certified truncation bound.

    ``rounding`` is an estimate (not a bound) of the floating point error of
    the partial sum, eps * sqrt(N+1) * sum |terms|.
    """

    value: float
    tail_bound: float
    terms_used: int
    certified: bool
    rounding: float = 0.0

    @property
    def resolved(self) -> bool:
        return abs(self.value) > RESOLVE_FACTOR * self.rounding


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Kernel values on an outer-product grid (rows: first variable)."""

    values: np.ndarray
    tail_bound: float
    terms_used: int
    certified: bool
    rounding: np.ndarray

    @property
    def resolved(self) -> np.ndarray:
        return np.abs(self.values) > RESOLVE_FACTOR * self.rounding


@dataclass(frozen=True)
class HeatPoint:
    theta: float
    phi: float
    t: float

    def __post_init__(self):
        th, ph, t = float(self.theta), float(self.phi), float(self.t)
        if not (0.0 <= th <= math.pi and 0.0 <= ph <= math.pi):
            raise ValueError(f"theta and phi must lie in [0, pi]; got ({th}, {ph})")
        if not (t > 0 and math.isfinite(t)):
            raise ValueError(f"t must be positive and finite; got {t}")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", ph)
        object.__setattr__(self, "t", t)

    @property
    def x(self) -> float:
        return math.cos(self.theta)

    @property
    def y(self) -> float:
        return math.cos(self.phi)


# ---------------------------------------------------------------------------
# truncation planning


@dataclass(frozen=True, eq=False)
class SeriesPlan:
    """Coefficients c_0..c_N of a spectral sum and its tail certificate."""

    coef: np.ndarray
    tail_bound: float
    certified: bool

    @property
    def terms(self) -> int:
        return len(self.coef)


def _ratio_factor(n, shift_num, shift_den):
    # max(1, (n + shift_num) / (n + shift_den)); bounds a monotone factor for all larger n
    return np.maximum(1.0, (n + shift_num) / (n + shift_den))


def plan_series(params: JacobiParams, t: float, kind: str = "heat",
                trunc: SeriesTruncation = DEFAULT_TRUNCATION,
                t_floor: float = T_FLOOR) -> SeriesPlan:
    """Choose N and the coefficients for the heat ("heat") or Poisson ("poisson") sum.

    Terms are bounded by a_n = w_n sup_n^2 / h_n with sup_n = binom(n+q, n),
    q = max(alpha, beta, -1/2).  For n >= M the ratio a_{n+1}/a_n is at most
    r_M, the product of the exponential ratio at M with every monotone
    rational factor evaluated at M (or 1 when that factor is below 1), so the
    tail after N = M - 1 is at most a_M / (1 - r_M).  The heat series also
    requires r_M <= 1/2, giving the bound 2 a_M.
    """
    t = float(t)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if kind == "heat" and t < t_floor:
        raise PrecisionFloorError(
            f"series cost/precision floor: t={t:g} is below the floor {t_floor:g}")
    if kind not in ("heat", "poisson"):
        raise ValueError(f"unknown series kind {kind!r}")
    return _plan(params.alpha, params.beta, t, kind, int(trunc.max_terms), float(trunc.tail_tol))


def _log_tail_bounds(a, b, t, kind, m):
    """log of the tail bound after N = M - 1 terms for each candidate M (inf if the ratio test fails)."""
    s = a + b + 1.0
    q = max(a, b, -0.5)
    if kind == "heat":
        log_w = -t * m * (m + s)
        log_wr = -t * (2.0 * m + 1.0 + s)
    else:
        log_w = -t * np.abs(m + 0.5 * s)
        log_wr = np.full_like(m, -t)
    log_a = log_w + 2.0 * log_sup_bound(q, m) - log_jacobi_norm(a, b, m)
    sup_ratio = _ratio_factor(m, 1.0 + q, 1.0) ** 2
    # h_n / h_{n+1} = (2n+2+s)/(2n+s) * (n+s)/(n+a+1) * (n+1)/(n+b+1)
    norm_ratio = (_ratio_factor(2.0 * m, 2.0 + s, s) * _ratio_factor(m, s, a + 1.0)
                  * _ratio_factor(m, 1.0, b + 1.0))
    r = np.exp(log_wr) * sup_ratio * norm_ratio
    if kind == "heat":
        return np.where(r <= 0.5, log_a + math.log(2.0), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r < 1.0, log_a - np.log1p(-np.minimum(r, 1.0)), np.inf)


@lru_cache(maxsize=1024)
def _plan(a, b, t, kind, max_terms, tail_tol):
    s = a + b + 1.0
    if kind == "heat":
        n0 = math.ceil(8.0 / math.sqrt(t)) + 32
    else:
        n0 = math.ceil(8.0 / t) + 32
    start = min(n0, max_terms)
    width = 256
    log_tol = math.log(tail_tol)
    found = None
    log_tail = np.array([np.inf])
    # scan candidate M = N + 1 in growing windows
    while start <= max_terms:
        m = np.arange(start, min(start + width, max_terms + 1), dtype=float)
        log_tail = _log_tail_bounds(a, b, t, kind, m)
        hits = np.nonzero(log_tail <= log_tol)[0]
        if len(hits):
            found = int(hits[0])
            break
        start += width
        width *= 2
    if found is None:
        n_terms = max_terms
        tail = float(np.exp(_log_tail_bounds(a, b, t, kind, np.array([float(max_terms)]))[0]))
    else:
        n_terms = int(m[found])  # N + 1 terms: n = 0..N
        tail = float(np.exp(log_tail[found]))

    n = np.arange(n_terms, dtype=float)
    if kind == "heat":
        log_c = -t * n * (n + s) - log_jacobi_norm(a, b, n)
    else:
        # trigonometric normalization: P_n-cal = 2^(s/2) h_n^(-1/2) P_n
        log_c = -t * np.abs(n + 0.5 * s) + s * math.log(2.0) - log_jacobi_norm(a, b, n)
        tail *= 2.0 ** s
    coef = np.exp(log_c)
    coef.setflags(write=False)
    certified = bool(a >= -0.5 and b >= -0.5 and found is not None)
    return SeriesPlan(coef, tail, certified)


# ---------------------------------------------------------------------------
# spectral sums

_BLOCK = 1024


def _poly_blocks(a, b, x, n_terms, block=_BLOCK):
    """Yield consecutive row blocks of P_n^{a,b}(x), n = 0..n_terms-1."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    p = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    ab2 = a * a - b * b
    n = 0
    while n < n_terms:
        k = min(block, n_terms - n)
        out = np.empty((k,) + x.shape)
        for i in range(k):
            deg = n + i
            if deg == 0:
                out[i] = 1.0
                continue
            if deg == 1:
                out[i] = p
                continue
            c = 2.0 * deg + a + b
            p_new = (((c - 1.0) * ab2 + (c - 1.0) * c * (c - 2.0) * x) * p
                     - 2.0 * (deg + a - 1.0) * (deg + b - 1.0) * c * p_prev) / (
                        2.0 * deg * (deg + a + b) * (c - 2.0))
            p_prev, p = p, p_new
            out[i] = p
        yield n, out
        n += k


def _outer_sum(a, b, xs, ys, coef):
    """sum_n c_n P_n(x_i) P_n(y_j) and the matching sum of absolute terms."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    same = xs.shape == ys.shape and np.array_equal(xs, ys)
    total = np.zeros((len(xs), len(ys)))
    total_abs = np.zeros((len(xs), len(ys)))
    gen_y = None if same else _poly_blocks(a, b, ys, len(coef))
    for n0, px in _poly_blocks(a, b, xs, len(coef)):
        py = px if same else next(gen_y)[1]
        c = coef[n0:n0 + len(px), None]
        total += px.T @ (c * py)
        total_abs += np.abs(px).T @ (c * np.abs(py))
    if same:
        total = 0.5 * (total + total.T)
    return total, total_abs


def _pair_sum(a, b, x, y, coef):
    """sum_n c_n P_n(x) P_n(y) elementwise over broadcast x, y (exactly symmetric)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    total = np.zeros(x.shape)
    total_abs = np.zeros(x.shape)
    for (n0, px), (_, py) in zip(_poly_blocks(a, b, x, len(coef)), _poly_blocks(a, b, y, len(coef))):
        for i in range(len(px)):
            term = coef[n0 + i] * (px[i] * py[i])
            total += term
            total_abs += np.abs(term)
    return total, total_abs


def _rounding(total_abs, n_terms):
    return EPS * math.sqrt(n_terms) * total_abs


def _check_unit(*arrays):
    for arr in arrays:
        arr = np.asarray(arr, dtype=float)
        if np.any(~(np.abs(arr) <= 1.0)):
            raise ValueError("algebraic arguments must lie in [-1, 1]")


def heat_series(params: JacobiParams, x: float, y: float, t: float,
                trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR) -> KernelValue:
    """G_t^{alpha,beta}(x, y) in the pure polynomial setting."""
    _check_unit(x, y)
    plan = plan_series(params, t, "heat", trunc, t_floor)
    total, total_abs = _pair_sum(params.alpha, params.beta, float(x), float(y), plan.coef)
    return KernelValue(float(total), plan.tail_bound, plan.terms, plan.certified,
                       float(_rounding(total_abs, plan.terms)))


def heat_series_pairs(params: JacobiParams, x, y, t: float,
                      trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR):
    """Elementwise G_t(x_k, y_k) over broadcast arrays; returns (values, plan, rounding)."""
    _check_unit(x, y)
    plan = plan_series(params, t, "heat", trunc, t_floor)
    total, total_abs = _pair_sum(params.alpha, params.beta, x, y, plan.coef)
    return total, plan, _rounding(total_abs, plan.terms)


def heat_series_grid(params: JacobiParams, xs, ys, t: float,
                     trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR) -> KernelGrid:
    """G_t(x_i, y_j) for all pairs of two coordinate vectors."""
    _check_unit(xs, ys)
    plan = plan_series(params, t, "heat", trunc, t_floor)
    total, total_abs = _outer_sum(params.alpha, params.beta, xs, ys, plan.coef)
    return KernelGrid(total, plan.tail_bound, plan.terms, plan.certified,
                      _rounding(total_abs, plan.terms))


# ---------------------------------------------------------------------------
# trigonometric settings


def trig_prefactor(params: JacobiParams, theta, phi):
    """(sin(theta/2) sin(phi/2))^(alpha+1/2) (cos(theta/2) cos(phi/2))^(beta+1/2).

    Endpoint values are the limits: 0 for a positive exponent, 1 for a zero
    exponent and +inf for a negative one.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ea, eb = params.alpha + 0.5, params.beta + 0.5
    ss = np.sin(0.5 * theta) * np.sin(0.5 * phi)
    cc = np.cos(0.5 * theta) * np.cos(0.5 * phi)
    # cos(pi/2) is 6e-17 in floating point; treat the endpoint exactly
    cc = np.where((theta == math.pi) | (phi == math.pi), 0.0, cc)
    with np.errstate(divide="ignore"):
        out = np.power(ss, ea) * np.power(cc, eb)
    return out if out.ndim else float(out)


def _trig_factor(params, t):
    s = params.s
    return 2.0 ** s * math.exp(-t * 0.25 * s * s)


def trig_heat(params: JacobiParams, point: HeatPoint,
              trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR) -> KernelValue:
    """Heat kernel of the trigonometric polynomial setting at (theta, phi)."""
    kv = heat_series(params, point.x, point.y, point.t, trunc, t_floor)
    f = _trig_factor(params, point.t)
    return KernelValue(f * kv.value, f * kv.tail_bound, kv.terms_used, kv.certified, f * kv.rounding)


def trig_heat_grid(params: JacobiParams, thetas, phis, t: float,
                   trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR) -> KernelGrid:
    grid = heat_series_grid(params, np.cos(thetas), np.cos(phis), t, trunc, t_floor)
    f = _trig_factor(params, t)
    return KernelGrid(f * grid.values, f * grid.tail_bound, grid.terms_used, grid.certified,
                      f * grid.rounding)


def func_heat(params: JacobiParams, point: HeatPoint,
              trunc: SeriesTruncation = DEFAULT_TRUNCATION, t_floor: float = T_FLOOR) -> KernelValue:
    """Heat kernel of the trigonometric function setting (orthonormal in d theta)."""
    kv = trig_heat(params, point, trunc, t_floor)
    w = trig_prefactor(params, point.theta, point.phi)
    if w == 0.0:
        return KernelValue(0.0, 0.0, kv.terms_used, kv.certified, 0.0)
    if math.isinf(w):
        return KernelValue(math.inf, math.inf, kv.terms_used, False, math.inf)
    return KernelValue(w * kv.value, w * kv.tail_bound, kv.terms_used, kv.certified, w * kv.rounding)


# ---------------------------------------------------------------------------
# Poisson kernels (trigonometric polynomial normalization)


def poisson_series(params: JacobiParams, point: HeatPoint,
                   trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> KernelValue:
    """sum_n exp(-t |n + s/2|) P_n-cal(theta) P_n-cal(phi) with a geometric tail bound."""
    plan = plan_series(params, point.t, "poisson", trunc)
    total, total_abs = _pair_sum(params.alpha, params.beta, point.x, point.y, plan.coef)
    return KernelValue(float(total), plan.tail_bound, plan.terms, plan.certified,
                       float(_rounding(total_abs, plan.terms)))


def poisson_series_grid(params: JacobiParams, thetas, phis, t: float,
                        trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> KernelGrid:
    plan = plan_series(params, t, "poisson", trunc)
    total, total_abs = _outer_sum(params.alpha, params.beta, np.cos(thetas), np.cos(phis), plan.coef)
    return KernelGrid(total, plan.tail_bound, plan.terms, plan.certified,
                      _rounding(total_abs, plan.terms))


def _log_trig_mass(params):
    # m_{a,b}(0, pi) = Gamma(a+1) Gamma(b+1) / Gamma(a+b+2)
    a, b = params.alpha, params.beta
    return log_gamma(a + 1.0) + log_gamma(b + 1.0) - log_gamma(a + b + 2.0)


def _require_range(params, what):
    if not params.in_theorem_range:
        raise ValueError(f"{what} needs alpha, beta >= -1/2; got ({params.alpha}, {params.beta})")


def poisson_integral(params: JacobiParams, point: HeatPoint, rel_tol: float = 1e-8,
                     start_degree: int = 64, max_degree: int = 4096) -> float:
    """Poisson kernel from its positive double-integral representation.

    c sinh(t/2) iint (cosh(t/2) - 1 + q)^(-alpha-beta-2) dPi_alpha(u) dPi_beta(v),
    q = 1 - u sin(theta/2) sin(phi/2) - v cos(theta/2) cos(phi/2),
    c = 2^(-alpha-beta-1) / m_{alpha,beta}(0, pi).
    """
    _require_range(params, "poisson_integral")
    a, b = params.alpha, params.beta
    t = point.t
    sp = math.sin(0.5 * point.theta) * math.sin(0.5 * point.phi)
    cp = math.cos(0.5 * point.theta) * math.cos(0.5 * point.phi)
    # q = (1-u) sp + (1-v) cp + 2 sin^2((theta-phi)/4), free of cancellation near u = v = 1
    base = 2.0 * math.sin(0.25 * (point.theta - point.phi)) ** 2 + 2.0 * math.sinh(0.25 * t) ** 2
    power = a + b + 2.0

    def integrand(u, v):
        return ((1.0 - u) * sp + (1.0 - v) * cp + base) ** (-power)

    def family(m):
        return TensorRule(pi_measure_rule(a, m), pi_measure_rule(b, m))

    value, _ = adaptive_doubling(family, integrand, rel_tol, start_degree, max_degree)
    log_c = -(a + b + 1.0) * math.log(2.0) - _log_trig_mass(params)
    return math.exp(log_c) * math.sinh(0.5 * t) * value


def poisson_kernel_grid(params: JacobiParams, thetas, phis, t: float,
                        trunc: SeriesTruncation = DEFAULT_TRUNCATION, rel_tol: float = 1e-8):
    """Poisson kernel on a grid: the series where it resolves, the integral elsewhere.

    Returns (values, used_integral mask).  Falls back to the series only when
    the parameters are outside the range of the integral representation.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    grid = poisson_series_grid(params, thetas, phis, t, trunc)
    values = grid.values.copy()
    need = ~grid.resolved | (grid.tail_bound * RESOLVE_FACTOR > np.abs(values))
    if not params.in_theorem_range:
        return values, np.zeros_like(need)
    for i, j in zip(*np.nonzero(need)):
        values[i, j] = poisson_integral(params, HeatPoint(thetas[i], phis[j], t), rel_tol)
    return values, need


# ---------------------------------------------------------------------------
# reduction to the ultraspherical kernel at the endpoint


def reduction_constant(params: JacobiParams) -> float:
    """sqrt(pi) Gamma(a+b+3/2) / (2^(a+b+1) Gamma(a+1) Gamma(b+1))."""
    a, b = params.alpha, params.beta
    return math.exp(0.5 * math.log(math.pi) + log_gamma(a + b + 1.5) - (a + b + 1.0) * math.log(2.0)
                    - log_gamma(a + 1.0) - log_gamma(b + 1.0))


def reduction_heat(params: JacobiParams, point: HeatPoint,
                   trunc: SeriesTruncation = DEFAULT_TRUNCATION, rel_tol: float = 1e-9,
                   start_degree: int = 32, max_degree: int = 1024) -> float:
    """G_t(cos theta, cos phi) through the ultraspherical kernel G_{t/4}^{lambda}(z, 1).

    lambda = alpha + beta + 1/2 and z = u sin(theta/2) sin(phi/2) + v cos(theta/2) cos(phi/2),
    integrated against dPi_alpha(u) dPi_beta(v).
    """
    _require_range(params, "reduction_heat")
    a, b = params.alpha, params.beta
    lam = a + b + 0.5
    ultra = JacobiParams(lam, lam)
    plan = plan_series(ultra, 0.25 * point.t, "heat", trunc, T_FLOOR / 4.0)
    # P_n^{lambda}(1) = binom(n+lambda, n)
    n = np.arange(plan.terms, dtype=float)
    at_one = np.exp(log_gamma(n + lam + 1.0) - log_gamma(n + 1.0) - log_gamma(lam + 1.0))
    coef = plan.coef * at_one
    sp = math.sin(0.5 * point.theta) * math.sin(0.5 * point.phi)
    cp = math.cos(0.5 * point.theta) * math.cos(0.5 * point.phi)

    def integrand(u, v):
        z = np.clip(u * sp + v * cp, -1.0, 1.0)
        shape = np.broadcast(u, v).shape
        flat = np.broadcast_to(z, shape).ravel()
        total = np.zeros_like(flat)
        for n0, pz in _poly_blocks(lam, lam, flat, len(coef)):
            total += coef[n0:n0 + len(pz)] @ pz
        return total.reshape(shape)

    def family(m):
        return TensorRule(pi_measure_rule(a, m), pi_measure_rule(b, m))

    value, _ = adaptive_doubling(family, integrand, rel_tol, start_degree, max_degree)
    return reduction_constant(params) * value


# ---------------------------------------------------------------------------
# closed forms for alpha, beta in {-1/2, 1/2}


def theta_sum(u, t: float, half: bool = False, derivative: int = 0):
    """Wrapped Gaussian sum_{k in Z} exp(-t kappa^2) cos(kappa u), kappa = k (+1/2 if half).

    For t < 1 the Poisson-summed form sqrt(pi/t) sum_k (+-1)^k exp(-(u - 2 pi k)^2/(4t))
    is used (alternating signs for the half-integer frequencies); for t >= 1
    the cosine series converges after a few terms.  ``derivative`` in
    {0, 1, 2} returns the corresponding u-derivative.
    """
    u = np.asarray(u, dtype=float)
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")
    if t < 1.0:
        kmax = int(math.ceil((math.sqrt(3000.0 * t) + 4.0 * math.pi) / (2.0 * math.pi))) + 1
        k = np.arange(-kmax, kmax + 1)
        sign = np.where(k % 2 == 0, 1.0, -1.0) if half else np.ones(len(k))
        yk = u[..., None] - 2.0 * math.pi * k
        g = np.exp(-yk * yk / (4.0 * t))
        if derivative == 1:
            g = g * (-yk / (2.0 * t))
        elif derivative == 2:
            g = g * (yk * yk / (4.0 * t * t) - 1.0 / (2.0 * t))
        out = math.sqrt(math.pi / t) * (g @ sign)
    else:
        kmax = int(math.ceil(math.sqrt(45.0 / t))) + 2
        kappa = np.arange(-kmax, kmax + 1) + (0.5 if half else 0.0)
        e = np.exp(-t * kappa * kappa)
        arg = u[..., None] * kappa
        if derivative == 0:
            out = np.cos(arg) @ e
        elif derivative == 1:
            out = -np.sin(arg) @ (e * kappa)
        else:
            out = -np.cos(arg) @ (e * kappa * kappa)
    return out if out.ndim else float(out)


_HALVES = (-0.5, 0.5)


# angles this close to 0 or pi are moved onto the endpoint; in x = cos(theta)
# that is a shift below 5e-19, far under the kernel's sensitivity
_SNAP = 1e-9


# pi - math.pi; a float angle near pi is math.pi - delta, at true distance delta + _PI_TAIL
_PI_TAIL = 1.2246467991473532e-16


def _snap(x: float) -> float:
    if x < _SNAP:
        return 0.0
    if math.pi - x < _SNAP:
        return math.pi
    return x


def _reflect(x: float) -> float:
    """pi - x including the part of pi that math.pi drops; the endpoint maps to 0."""
    return 0.0 if x == math.pi else (math.pi - x) + _PI_TAIL


def _endpoint_limit(a, b, th, ph, t):
    """Closed form through derivatives of the theta sums when a prefactor vanishes exactly."""
    half = a != b
    sign = -1.0 if a == 0.5 else 1.0

    # slope of the prefactor at an endpoint where it vanishes, else None
    def vanishing(x):
        if a == 0.5 and x == 0.0:
            return 0.5  # d/dx of sin(x/2) at 0
        if b == 0.5 and x == math.pi:
            return -0.5  # d/dx of cos(x/2) at pi
        return None

    dth, dph = vanishing(th), vanishing(ph)
    # derivatives of A(theta - phi) and A(theta + phi): d/dtheta -> (1, 1), d/dphi -> (-1, 1)
    order = (dth is not None) + (dph is not None)
    minus = theta_sum(th - ph, t, half, order)
    plus = theta_sum(th + ph, t, half, order)
    c_minus = (-1.0 if dph is not None else 1.0)
    value = (c_minus * minus + sign * plus) / (2.0 * math.pi)
    denom = 1.0
    for x, d in ((th, dth), (ph, dph)):
        if d is not None:
            denom *= d  # the other trigonometric factor equals 1 at this endpoint
        else:
            denom *= (1.0 if a == -0.5 else math.sin(0.5 * x)) * (1.0 if b == -0.5 else math.cos(0.5 * x))
    return value / denom


def _mode_ratio(a, b, x, freq):
    """Eigenfunction of the function setting divided by its prefactor, at frequencies ``freq``.

    Near pi the angle is reflected, u = pi - x, so that the vanishing factor
    and the eigenfunction are both formed from the small number u.
    """
    if a == -0.5 and b == -0.5:
        return np.cos(freq * x)
    if a == 0.5 and b == -0.5:
        if x == 0.0:
            return 2.0 * freq
        return np.sin(freq * x) / math.sin(0.5 * x)
    n = np.arange(len(freq))
    parity = np.where(n % 2 == 0, 1.0, -1.0)
    if a == -0.5:  # cos(nu x) / cos(x/2), nu = n + 1/2
        if x < 0.5 * math.pi:
            return np.cos(freq * x) / math.cos(0.5 * x)
        u = _reflect(x)
        return parity * (2.0 * freq if u == 0.0 else np.sin(freq * u) / math.sin(0.5 * u))
    # sin(k x) / (sin(x/2) cos(x/2)) = 2 sin(k x) / sin x, k = n + 1
    if x < 0.5 * math.pi:
        return 2.0 * freq if x == 0.0 else 2.0 * np.sin(freq * x) / math.sin(x)
    u = _reflect(x)
    # sin(k (pi - u)) = (-1)^(k+1) sin(k u) = (-1)^n sin(k u)
    return parity * (2.0 * freq if u == 0.0 else 2.0 * np.sin(freq * u) / math.sin(u))


def _oracle_direct(a, b, th, ph, t):
    """sum_n exp(-t nu_n^2) psi_n(theta) psi_n(phi), psi_n = phi_n / prefactor, for t >= 1."""
    kmax = int(math.ceil(math.sqrt(45.0 / t))) + 2
    n = np.arange(kmax + 1, dtype=float)
    if a == b == -0.5:
        freq, norm = n, np.where(n == 0, 1.0 / math.pi, 2.0 / math.pi)
    elif a == b == 0.5:
        freq, norm = n + 1.0, np.full(len(n), 2.0 / math.pi)
    else:
        freq, norm = n + 0.5, np.full(len(n), 2.0 / math.pi)
    weights = norm * np.exp(-t * freq * freq)
    return float(np.sum(weights * _mode_ratio(a, b, th, freq) * _mode_ratio(a, b, ph, freq)))


def _paired_ratio(x, y, t):
    """(g(x - y) - g(x + y)) / sin(y/2), g(v) = exp(-v^2/(4t)), without cancellation.

    g(x - y) - g(x + y) = sign(xy) g(|x| - |y|) (1 - exp(-|xy|/t)); the limit at y = 0 is 2x g(x)/t.
    """
    if y == 0.0:
        return 2.0 * x * np.exp(-x * x / (4.0 * t)) / t
    prod = x * y
    core = np.exp(-(np.abs(x) - abs(y)) ** 2 / (4.0 * t)) * -np.expm1(-np.abs(prod) / t)
    return np.sign(prod) * core / math.sin(0.5 * y)


def _log_cosh(z):
    z = np.abs(z)
    return z + np.log1p(np.exp(-2.0 * z)) - math.log(2.0)


def _log_sinh(z):
    # z > 0
    return z + np.log(-np.expm1(-2.0 * z)) - math.log(2.0)


def _double_paired_ratio(w, y, t, c):
    """R(c - w) - R(c + w) with R(x) = (g(x - y) - g(x + y)) / sin(y/2), for 0 <= y <= w < |c|.

    When c w/(2t) > 1 the two terms differ by at least a factor e^2 and are
    subtracted directly.  Otherwise they nearly cancel; the four Gaussians form
    a second difference and, with p = w + y, q = w - y, the value is
    E(p) - E(q), E(r) = g(c - r) + g(c + r) = 2 exp(-(c^2 + r^2)/(4t)) cosh(c r/(2t)),
    evaluated as E(q) expm1(d), d = log E(p) - log E(q)
    = -w y/t + log1p(2 sinh(c w/2t) sinh(c y/2t) / cosh(c q/2t)) > 0.
    At y = 0 that limit is 4 E'(w).
    """
    c = np.abs(np.asarray(c, dtype=float))
    out = _paired_ratio(c - w, y, t) - _paired_ratio(c + w, y, t)
    near = c * w / (2.0 * t) <= 1.0
    if not np.any(near):
        return out
    c = c[near]
    a1 = c * w / (2.0 * t)
    if y == 0.0:
        log_e = -(c * c + w * w) / (4.0 * t) + _log_cosh(a1)
        out[near] = 4.0 / t * np.exp(log_e) * (c * np.tanh(a1) - w)
        return out
    q = w - y
    a2, a3 = c * y / (2.0 * t), c * q / (2.0 * t)
    with np.errstate(divide="ignore"):
        log_x = math.log(2.0) + _log_sinh(a1) + _log_sinh(a2) - _log_cosh(a3)
    d = -w * y / t + np.logaddexp(0.0, log_x)
    log_base = math.log(2.0) - (c * c + q * q) / (4.0 * t) + _log_cosh(a3)
    out[near] = np.exp(log_base) * np.expm1(d) / math.sin(0.5 * y)
    return out


def _oracle_images(a, b, th, ph, t):
    """Image sum (Poisson-summed theta functions) for t < 1, paired at the Dirichlet endpoints."""
    mmax = int(math.ceil((math.sqrt(3000.0 * t) + 4.0 * math.pi) / (2.0 * math.pi))) + 1
    m = np.arange(-mmax, mmax + 1)
    scale = math.sqrt(math.pi / t) / (2.0 * math.pi)
    if a == b == -0.5:
        images = np.concatenate([th - ph - 2.0 * math.pi * m, th + ph - 2.0 * math.pi * m])
        return float(scale * np.sum(np.exp(-images * images / (4.0 * t))))
    if a == -0.5:
        # Neumann at 0, Dirichlet at pi: the reflection theta -> pi - theta swaps the roles
        a, b, th, ph = 0.5, -0.5, _reflect(th), _reflect(ph)
    if a == 0.5 and b == -0.5:
        # Dirichlet at 0 only; pair in the angle closer to it
        if th < ph:
            th, ph = ph, th
        # images k and -k combined: R(th - 2 pi k) + R(th + 2 pi k) = -(R(2 pi k - th) - R(2 pi k + th))
        k = m[m >= 1]
        signs = np.where(k % 2 == 0, 1.0, -1.0)
        total = _paired_ratio(th, ph, t) - np.sum(signs * _double_paired_ratio(th, ph, t, 2.0 * math.pi * k))
        return float(scale * total / math.sin(0.5 * th))
    # Dirichlet at both ends: pair at the endpoint nearest to either angle
    dist = (th, math.pi - th, ph, math.pi - ph)
    k = int(np.argmin(dist))
    if k in (1, 3):
        th, ph = _reflect(th), _reflect(ph)
    if k in (0, 1):
        th, ph = ph, th
    if th <= 0.5 * math.pi:
        k = m[m >= 1]
        total = _paired_ratio(th, ph, t) - np.sum(_double_paired_ratio(th, ph, t, 2.0 * math.pi * k))
    else:
        # theta is nearer to pi, where the kernel also vanishes: images m and 1 - m
        # nearly cancel, so combine them (x_m = c - w, x_(1-m) = -(c + w), c = pi - 2 pi m)
        w = _reflect(th)
        pos = m[m >= 1]
        total = np.sum(_double_paired_ratio(w, ph, t, math.pi - 2.0 * math.pi * pos))
        total += np.sum(_paired_ratio(th - 2.0 * math.pi * m[m < 1 - mmax], ph, t))
    # prefactor sin(phi/2) cos(phi/2) (1/2) sin(theta); sin(phi/2) is already divided out
    return float(scale * total / (math.cos(0.5 * ph) * 0.5 * math.sin(th)))


def dirichlet_neumann_oracle(params: JacobiParams, point: HeatPoint) -> float:
    """Heat kernel of the trigonometric polynomial setting for alpha, beta in {-1/2, 1/2}.

    In the function setting the four kernels are
    (1/2pi)[A(theta - phi) + sign A(theta + phi)] with A the integer-frequency
    theta sum when alpha = beta and the half-integer one otherwise, and
    sign = -1 exactly when alpha = 1/2 (Dirichlet condition at theta = 0).
    The trigonometric-polynomial kernel is that divided by the prefactor.
    To keep full relative accuracy near a Dirichlet endpoint the division is
    never done on a cancelled difference:

    * t >= 1: the eigenfunction expansion, each eigenfunction divided by its
      prefactor in closed form (a Chebyshev-type ratio, reflected near pi);
    * t < 1: the image sum with each image pair g(x - y) - g(x + y) written
      through expm1 in the angle nearest to a Dirichlet endpoint, and images
      that cancel in the other angle combined into second differences;
    * both angles exactly at Dirichlet endpoints (after snapping within
      1e-9): the limit through derivatives of the theta sums.

    Distances to pi include the part of pi that ``math.pi`` rounds away.
    """
    a, b = params.alpha, params.beta
    if a not in _HALVES or b not in _HALVES:
        raise ValueError(f"the closed form exists only for alpha, beta in {{-1/2, 1/2}}; got ({a}, {b})")
    th, ph, t = _snap(point.theta), _snap(point.phi), point.t
    if t >= 1.0:
        return _oracle_direct(a, b, th, ph, t)
    at_end = lambda x: (a == 0.5 and x == 0.0) or (b == 0.5 and x == math.pi)  # noqa: E731
    if at_end(th) and at_end(ph):
        return _endpoint_limit(a, b, th, ph, t)
    return _oracle_images(a, b, th, ph, t)


def sphere_s1_kernel(x: float, t: float) -> float:
    """2 K_t^1 at spherical distance arccos x: (1/pi) sum_k exp(-t k^2) cos(k arccos x)."""
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [-1, 1], got {x}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return theta_sum(math.acos(x), t) / math.pi


# ---------------------------------------------------------------------------
# Laguerre


def laguerre_kernel(alpha: float, x: float, y: float, t: float) -> float:
    """(1/(2 sinh t)) exp(-coth(t)(x^2+y^2)/4) (xy)^(-alpha) I_alpha(xy/(2 sinh t)), in log space."""
    alpha, x, y, t = float(alpha), float(x), float(y), float(t)
    if not alpha > -1:
        raise ValueError(f"alpha must exceed -1, got {alpha}")
    if not (x > 0 and y > 0 and t > 0):
        raise ValueError("x, y and t must be positive")
    # log(2 sinh t) = t + log(1 - exp(-2t))
    log_2sinh = t + math.log(-math.expm1(-2.0 * t))
    z = x * y * math.exp(-log_2sinh)
    coth = 1.0 / math.tanh(t)
    log_k = (-log_2sinh - 0.25 * coth * (x * x + y * y) - alpha * math.log(x * y)
             + log_bessel_i(alpha, z))
    return math.exp(log_k)
