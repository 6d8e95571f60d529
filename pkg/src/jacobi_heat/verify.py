"""Named numerical checks of every identity and estimate the library implements.

Each ``check_*`` returns a :class:`CheckResult` with a pass flag, the worst
residual or ratio found, where it occurred and a short anchor naming the
statement being tested.  :func:`run_all` runs the suite deterministically.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelopes import (
    GridSpec,
    FitInfeasibleError,
    comparison_factor,
    fit_band,
    fit_constants,
    ft_diagnostic,
    log_envelope_base,
    _poisson_envelope,
    thread_count,
)
from .kernels import (
    HeatPoint,
    KernelGrid,
    RESOLVE_FACTOR,
    dirichlet_neumann_oracle,
    func_heat,
    heat_series,
    heat_series_grid,
    heat_series_pairs,
    plan_series,
    poisson_integral,
    poisson_kernel_grid,
    poisson_series,
    poisson_series_grid,
    reduction_constant,
    reduction_heat,
    sphere_s1_kernel,
    trig_prefactor,
)
from .quadrature import QuadratureError, adaptive_doubling, pi_measure_rule, rho_rule
from .tables import restore_floats
from .specfun import JacobiParams, jacobi_norm, jacobi_poly_matrix, log_bessel_i, log_gamma, log_jacobi_norm

__all__ = [
    "CheckResult",
    "ANCHORS",
    "DEFAULT_PARAMS",
    "DEFAULT_SEED",
    "PARAM_CHECKS",
    "GLOBAL_CHECKS",
    "check_mass",
    "check_semigroup",
    "check_reduction",
    "check_sphere_transfer",
    "check_comparison",
    "check_envelope",
    "check_endpoint",
    "check_lemma_bes",
    "check_iteration",
    "check_int_est",
    "check_poisson",
    "check_poisson_consistency",
    "check_kernel_relation",
    "check_rough",
    "check_large_time",
    "run_all",
]

DEFAULT_SEED = 20240607
DEFAULT_PARAMS = (
    JacobiParams(-0.5, -0.5),
    JacobiParams(0.0, 0.0),
    JacobiParams(0.5, 1.5),
    JacobiParams(2.3, 0.7),
)
# largest admissible fitted constant (and bracket width) for the bound checks
C_MAX = 1e3

ANCHORS = {
    "mass": "the heat semigroup preserves constants",
    "semigroup": "semigroup property of the heat kernel",
    "reduction": "reduction formula to the ultraspherical kernel at the endpoint",
    "sphere_transfer": "ultraspherical kernel at the endpoint equals the circle heat kernel",
    "comparison": "comparison principle for shifted type parameters",
    "envelope": "two-sided Gaussian bounds for short times",
    "endpoint": "Gaussian bounds for the ultraspherical kernel at the endpoint",
    "lemma_bes": "Laplace-type integral against Pi_nu",
    "iteration": "endpoint bounds pass from lambda to lambda/2 - 1/4",
    "int_est": "two-sided estimate of the singular integral against Pi_nu",
    "poisson": "sharp bounds for the Poisson kernel",
    "poisson_consistency": "positive double-integral representation of the Poisson kernel",
    "kernel_relation": "relations between the three normalizations of the kernels",
    "rough": "rough power-of-t bound from the polynomial sup bound",
    "large_time": "convergence to 1/h_0 for large time",
}


def _clean(value):
    """Convert numpy scalars and containers to plain JSON-friendly Python objects."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    return value


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    params: Optional[JacobiParams]
    passed: bool
    worst: float
    worst_point: object
    details: dict = field(default_factory=dict)
    anchor: str = ""

    def to_dict(self) -> dict:
        return _clean({
            "check": self.check_name,
            "params": None if self.params is None else self.params.as_dict(),
            "pass": bool(self.passed),
            "worst_ratio_or_residual": self.worst,
            "worst_point": self.worst_point,
            "details": self.details,
            "anchor": self.anchor,
        })

    @classmethod
    def from_dict(cls, data: dict) -> "CheckResult":
        data = restore_floats(data)
        params = data["params"]
        return cls(data["check"], None if params is None else JacobiParams(**params), data["pass"],
                   float(data["worst_ratio_or_residual"]), data["worst_point"], data["details"],
                   data["anchor"])


def _result(name, params, passed, worst, point, details):
    return CheckResult(name, params, bool(passed), float(worst), _clean(point), _clean(details),
                       ANCHORS[name])


def _point(theta, phi, t):
    return {"theta": float(theta), "phi": float(phi), "t": float(t)}


# ---------------------------------------------------------------------------
# identities


def check_mass(params: JacobiParams, t_values=(0.01, 0.1, 1.0), xs=(-0.9, 0.0, 0.9),
               tol: float = 1e-8, min_degree: int = 128) -> CheckResult:
    """int G_t(x, y) d rho(y) = 1; the rule is exact once its degree exceeds half the series length."""
    worst, where = 0.0, None
    for t in t_values:
        plan = plan_series(params, t)
        rule = rho_rule(params.alpha, params.beta, max(min_degree, plan.terms // 2 + 1))
        xs_arr = np.asarray(xs, dtype=float)
        grid = heat_series_grid(params, xs_arr, rule.nodes, t)
        masses = grid.values @ rule.weights
        for x, m in zip(xs_arr, masses):
            err = abs(m - 1.0)
            if err >= worst:
                worst, where = err, {"x": float(x), "t": float(t), "mass": float(m)}
    return _result("mass", params, worst <= tol, worst, where, {"tol": tol})


def check_semigroup(params: JacobiParams, pairs=((0.2, -0.5), (0.9, 0.9), (-0.7, 0.3), (1.0, 0.6)),
                    t_values=(0.05, 0.1, 0.5), degree: int = 256, tol: float = 1e-6) -> CheckResult:
    """G_{2t}(x, y) = int G_t(x, z) G_t(z, y) d rho(z), relative residual."""
    rule = rho_rule(params.alpha, params.beta, degree)
    oracle = params.alpha == params.beta == -0.5
    worst, where = 0.0, None
    oracle_worst = 0.0
    for t in t_values:
        xs = np.array([p[0] for p in pairs])
        ys = np.array([p[1] for p in pairs])
        left = heat_series_grid(params, xs, rule.nodes, t).values
        right = heat_series_grid(params, ys, rule.nodes, t).values
        composed = (left * right) @ rule.weights
        direct, _, _ = heat_series_pairs(params, xs, ys, 2.0 * t)
        for k, (x, y) in enumerate(pairs):
            err = abs(composed[k] - direct[k]) / abs(direct[k])
            if err >= worst:
                worst, where = err, {"x": x, "y": y, "t": t}
            if oracle:
                # the closed form composed with itself, independent of the series
                th_nodes = np.arccos(rule.nodes)
                ox = np.array([dirichlet_neumann_oracle(params, HeatPoint(math.acos(x), a, t)) for a in th_nodes])
                oy = np.array([dirichlet_neumann_oracle(params, HeatPoint(math.acos(y), a, t)) for a in th_nodes])
                o2 = dirichlet_neumann_oracle(params, HeatPoint(math.acos(x), math.acos(y), 2.0 * t))
                oracle_worst = max(oracle_worst, abs((ox * oy) @ rule.weights - o2) / abs(o2))
    details = {"tol": tol, "degree": degree}
    if oracle:
        details["closed_form_residual"] = oracle_worst
        worst = max(worst, oracle_worst)
    return _result("semigroup", params, worst <= tol, worst, where, details)


def check_reduction(params: JacobiParams, seed: int = DEFAULT_SEED, n_points: int = 10,
                    t_range=(0.01, 1.0), tol: float = 1e-6) -> CheckResult:
    """Series value against the reduction-formula integral at seeded random points."""
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, math.pi, n_points)
    phis = rng.uniform(0.0, math.pi, n_points)
    ts = rng.uniform(t_range[0], t_range[1], n_points)
    worst, where = 0.0, None
    records = []
    converged = True
    for th, ph, t in zip(thetas, phis, ts):
        point = HeatPoint(th, ph, t)
        series = heat_series(params, point.x, point.y, t)
        note = "converged"
        try:
            red = reduction_heat(params, point)
        except QuadratureError as exc:
            red = reduction_constant(params) * exc.best
            note = "quadrature did not converge"
            converged = False
        err = abs(red - series.value) / abs(series.value) if series.value else math.inf
        records.append({**_point(th, ph, t), "series": series.value, "reduction": red,
                        "relative_error": err, "series_resolved": series.resolved, "status": note})
        if err >= worst or where is None:
            worst, where = err, _point(th, ph, t)
    worst_finite = worst if math.isfinite(worst) else 1e300
    return _result("reduction", params, converged and worst <= tol, worst_finite, where,
                   {"tol": tol, "seed": seed, "all_converged": converged, "points": records})


def check_sphere_transfer(xs=None, t_values=(0.01, 0.1, 1.0), tol: float = 1e-10) -> CheckResult:
    """G_t^{-1/2,-1/2}(x, 1) = 2 K_t on the circle, absolute difference."""
    xs = np.linspace(-1.0, 1.0, 25) if xs is None else np.asarray(xs, dtype=float)
    params = JacobiParams(-0.5, -0.5)
    worst, where = 0.0, None
    for t in t_values:
        vals, _, _ = heat_series_pairs(params, xs, np.ones_like(xs), t)
        for x, v in zip(xs, vals):
            err = abs(v - sphere_s1_kernel(x, t))
            if err >= worst:
                worst, where = err, {"x": float(x), "t": float(t)}
    return _result("sphere_transfer", None, worst <= tol, worst, where, {"tol": tol})


def check_kernel_relation(params: JacobiParams,
                          points=((0.3, 1.1, 0.05), (1.0, 1.0, 0.3), (2.5, 0.4, 1.0), (0.0, 1.7, 0.2),
                                  (3.0, 2.9, 0.1)),
                          tol: float = 1e-10) -> CheckResult:
    """Function-setting heat and Poisson kernels two ways.

    Route one rescales the pure-setting series (heat) or the polynomial-setting
    series (Poisson) by the prefactor; route two sums
    exp(-t lambda_n) phi_n(theta) phi_n(phi) with the orthonormal functions
    phi_n = (sin)^(a+1/2)(cos)^(b+1/2) 2^(s/2) h_n^(-1/2) P_n and
    lambda_n = (n + s/2)^2 (heat) or |n + s/2| (Poisson).
    """
    a, b, s = params.alpha, params.beta, params.s
    worst, where = 0.0, None
    records = []
    for th, ph, t in points:
        point = HeatPoint(th, ph, t)
        w = trig_prefactor(params, th, ph)
        heat_scaled = func_heat(params, point)
        pois_scaled = w * poisson_series(params, point).value
        n_terms = max(plan_series(params, t).terms, plan_series(params, t, "poisson").terms)
        n = np.arange(n_terms, dtype=float)
        polys = jacobi_poly_matrix(a, b, np.array([point.x, point.y]), n_terms - 1)
        log_norm = 0.5 * (s * math.log(2.0) - log_jacobi_norm(a, b, n))
        half = np.exp(log_norm)
        phi_prod = w * (half * polys[:, 0]) * (half * polys[:, 1])
        heat_direct = float(np.sum(np.exp(-t * (n + 0.5 * s) ** 2) * phi_prod))
        pois_direct = float(np.sum(np.exp(-t * np.abs(n + 0.5 * s)) * phi_prod))
        for kind, one, two in (("heat", heat_scaled.value, heat_direct), ("poisson", pois_scaled, pois_direct)):
            scale = max(abs(one), abs(two))
            err = 0.0 if scale == 0.0 else abs(one - two) / scale
            records.append({**_point(th, ph, t), "kernel": kind, "relative_error": err})
            if err >= worst:
                worst, where = err, {**_point(th, ph, t), "kernel": kind}
    return _result("kernel_relation", params, worst <= tol, worst, where, {"tol": tol, "points": records})


# ---------------------------------------------------------------------------
# inequalities and bounds on grids


def _admissible(params, eps, delta):
    return params.alpha >= -0.5 * eps and params.beta >= -0.5 * delta


def check_comparison(params: JacobiParams, grid: GridSpec = GridSpec(),
                     shifts=((1.0, 0.0), (0.0, 1.0), (0.5, 0.5)), slack: float = 1e-9) -> CheckResult:
    """Phi(x) Phi(y) G^{a+eps,b+delta} <= exp(k t) G^{a,b}, and monotonicity of the function-setting kernel.

    ``scale`` in the slack is the sum of absolute series terms of the larger
    side, i.e. the magnitude the floating point sums were formed from.
    Monotonicity in the type parameters is asserted when alpha, beta >= 0.
    """
    thetas, phis = grid.thetas(), grid.phis()
    xs, ys = np.cos(thetas), np.cos(phis)
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    monotone = params.alpha >= 0 and params.beta >= 0
    worst, where = -math.inf, None
    skipped = []
    n_checked = 0
    for t in grid.t_values:
        base = heat_series_grid(params, xs, ys, t)
        base_scale = base.rounding / _rounding_unit(base.terms_used)
        for eps, delta in shifts:
            if not _admissible(params, eps, delta):
                if [eps, delta] not in skipped:
                    skipped.append([eps, delta])
                continue
            shifted_params = params.shifted(eps, delta)
            shifted = heat_series_grid(shifted_params, xs, ys, t)
            phi = np.outer(comparison_factor(eps, delta, xs), comparison_factor(eps, delta, ys))
            growth = math.exp(0.5 * (eps + delta) * (params.s + 0.5 * (eps + delta)) * t)
            lhs = phi * shifted.values
            rhs = growth * base.values
            scale = np.maximum(phi * shifted.rounding / _rounding_unit(shifted.terms_used),
                               growth * base_scale)
            excess = (lhs - rhs) / np.maximum(scale, np.finfo(float).tiny)
            n_checked += excess.size
            k = np.unravel_index(np.argmax(excess), excess.shape)
            if excess[k] > worst:
                worst, where = float(excess[k]), {**_point(th[k], ph[k], t), "eps": eps, "delta": delta,
                                                   "setting": "pure"}
            if monotone:
                # G-function^{a+eps,b+delta} <= G-function^{a,b}
                f_shift = (trig_prefactor(shifted_params, th, ph) * 2.0 ** shifted_params.s
                           * math.exp(-0.25 * t * shifted_params.s ** 2))
                f_base = trig_prefactor(params, th, ph) * 2.0 ** params.s * math.exp(-0.25 * t * params.s ** 2)
                lhs_f, rhs_f = f_shift * shifted.values, f_base * base.values
                scale_f = np.maximum(f_shift * shifted.rounding / _rounding_unit(shifted.terms_used),
                                     f_base * base_scale)
                excess_f = (lhs_f - rhs_f) / np.maximum(scale_f, np.finfo(float).tiny)
                n_checked += excess_f.size
                k = np.unravel_index(np.argmax(excess_f), excess_f.shape)
                if excess_f[k] > worst:
                    worst, where = float(excess_f[k]), {**_point(th[k], ph[k], t), "eps": eps,
                                                        "delta": delta, "setting": "function"}
    # worst is (lhs - rhs) / scale; the inequality holds with slack when it is <= slack
    if n_checked == 0:
        worst = 0.0
    passed = worst <= slack
    return _result("comparison", params, passed, worst, where,
                   {"slack": slack, "points_checked": n_checked, "skipped_shifts": skipped,
                    "vacuous": n_checked == 0, "monotonicity_checked": monotone,
                    "measure": "(lhs - rhs) / scale, scale = sum of absolute series terms"})


def _rounding_unit(n_terms):
    # KernelGrid.rounding = eps sqrt(N) sum|terms|; recover sum|terms|
    return np.finfo(float).eps * math.sqrt(n_terms)


def check_envelope(params: JacobiParams, grid: GridSpec = GridSpec(), c_max: float = C_MAX) -> CheckResult:
    """Feasibility of the two-sided Gaussian envelope fit with C <= c_max."""
    try:
        consts, report = fit_constants(params, grid)
    except FitInfeasibleError as exc:
        rep = exc.report
        return _result("envelope", params, False, rep.constants.C if rep else math.inf,
                       rep.worst_upper if rep else None, {"error": str(exc)})
    passed = consts.C <= c_max
    details = report.summary()
    if params.alpha == params.beta == -0.5:
        details["quarter_inside"] = bool(consts.c2 <= 0.25 <= consts.c1)
        passed = passed and details["quarter_inside"]
    # diagnostics: sine/cosine envelope against the printed one, and F_t against its surrogate
    thetas, phis = grid.thetas(), grid.phis()
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    ratios, ft_ratios = [], []
    for t in grid.t_values:
        ratios.append(log_envelope_base(params, th, ph, t, "main") - log_envelope_base(params, th, ph, t, "trig"))
        for i in range(0, len(thetas), 4):
            for j in range(0, len(phis), 4):
                f, sur = ft_diagnostic(HeatPoint(thetas[i], phis[j], t))
                if math.isfinite(f) and math.isfinite(sur):
                    ft_ratios.append(f / sur)
    ratios = np.exp(np.concatenate([r.ravel() for r in ratios]))
    details["main_over_trig_envelope"] = [float(ratios.min()), float(ratios.max())]
    details["ft_over_surrogate"] = [float(min(ft_ratios)), float(max(ft_ratios))]
    details["c_max"] = c_max
    return _result("envelope", params, passed, consts.C, report.worst_upper, details)


def _endpoint_fit(lam, thetas, t_values, values_fn):
    """Fit t^(lam+1) K(theta, t) between C^-1 exp(-c1 theta^2/t) and C exp(-c2 theta^2/t)."""
    r, d = [], []
    excluded = 0
    for t in t_values:
        vals, resolved = values_fn(t)
        keep = resolved & (vals > 0)
        excluded += int(np.sum(~keep))
        r.append(np.log(vals[keep]) + (lam + 1.0) * math.log(t))
        d.append(thetas[keep] ** 2 / t)
    r, d = np.concatenate(r), np.concatenate(d)
    C, c1, c2, _, _ = fit_band(r, d)
    return {"C": C, "c1": c1, "c2": c2, "excluded": excluded, "d_max": float(d.max())}


def _endpoint_series(lam, thetas):
    params = JacobiParams(lam, lam)

    def values(t):
        kg = heat_series_grid(params, np.cos(thetas), np.array([1.0]), t)
        return kg.values[:, 0], kg.resolved[:, 0]

    return values


def check_endpoint(lambdas=(-0.5, 0.0, 0.5, 1.0), grid: GridSpec = GridSpec(),
                   c_max: float = C_MAX) -> CheckResult:
    """G_t^lambda(cos theta, 1) is comparable to t^-(lambda+1) exp(-c theta^2/t) from both sides."""
    thetas = grid.thetas()
    fits = {}
    worst, where = 0.0, None
    for lam in lambdas:
        fit = _endpoint_fit(lam, thetas, grid.t_values, _endpoint_series(lam, thetas))
        fits[str(lam)] = fit
        if fit["C"] >= worst:
            worst, where = fit["C"], {"lambda": lam}
    return _result("endpoint", None, worst <= c_max, worst, where, {"fits": fits, "c_max": c_max})


def check_rough(params: JacobiParams, grid: GridSpec = GridSpec(), c_max: float = C_MAX) -> CheckResult:
    """max over the grid of G_t t^(2 gamma + 2) stays below c_max."""
    thetas, phis = grid.thetas(), grid.phis()
    power = 2.0 * params.gamma + 2.0
    worst, where = 0.0, None
    for t in grid.t_values:
        kg = heat_series_grid(params, np.cos(thetas), np.cos(phis), t)
        scaled = np.abs(kg.values) * t ** power
        k = np.unravel_index(np.argmax(scaled), scaled.shape)
        if scaled[k] >= worst:
            worst, where = float(scaled[k]), _point(thetas[k[0]], phis[k[1]], t)
    return _result("rough", params, worst <= c_max, worst, where, {"exponent": power, "c_max": c_max})


def check_large_time(params: JacobiParams, seed: int = DEFAULT_SEED, n_points: int = 5,
                     ks=range(0, 7), tol: float = 1e-10) -> CheckResult:
    """|G_t - 1/h_0| along t = 2^k: non-increasing, and at most tol at the last rung.

    The deviation is summed directly from the n >= 1 terms, so it is not
    lost to cancellation against 1/h_0.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1.0, 1.0, n_points)
    ys = rng.uniform(-1.0, 1.0, n_points)
    a, b = params.alpha, params.beta
    ladders = []
    monotone = True
    last = 0.0
    where = None
    for x, y in zip(xs, ys):
        devs = []
        for k in ks:
            plan = plan_series(params, 2.0 ** k)
            n_terms = max(plan.terms, 2)
            polys = jacobi_poly_matrix(a, b, np.array([x, y]), n_terms - 1)
            terms = plan.coef[1:n_terms] * polys[1:n_terms, 0] * polys[1:n_terms, 1] if plan.terms > 1 else np.zeros(1)
            devs.append(abs(float(np.sum(terms))) + plan.tail_bound)
        ok = all(d2 <= d1 for d1, d2 in zip(devs, devs[1:]))
        monotone &= ok
        ladders.append({"x": float(x), "y": float(y), "deviations": devs, "non_increasing": ok})
        if devs[-1] >= last:
            last, where = devs[-1], {"x": float(x), "y": float(y), "t": 2.0 ** ks[-1]}
    return _result("large_time", params, monotone and last <= tol, last, where,
                   {"tol": tol, "limit": 1.0 / jacobi_norm(params, 0), "ladders": ladders,
                    "deviation": "|sum_{n>=1} terms| + certified tail"})


# ---------------------------------------------------------------------------
# auxiliary estimates


def _laplace_closed_form(nu, z):
    """e^-z int e^(zs) d Pi_nu(s) = Gamma(nu+1) (2/z)^nu I_nu(z) e^-z."""
    if z == 0.0:
        return 1.0
    if nu == -0.5:
        return 0.5 * (1.0 + math.exp(-2.0 * z))
    return math.exp(log_gamma(nu + 1.0) + nu * math.log(2.0 / z) + log_bessel_i(nu, z) - z)


def check_lemma_bes(nus=(-0.5, 0.0, 0.7, 2.3), zs=(0.0, 1.0, 10.0, 1e2, 1e3, 1e4),
                    width: float = C_MAX, route_tol: float = 1e-8) -> CheckResult:
    """int e^(zs) d Pi_nu / ((1+z)^(-nu-1/2) e^z) stays in a bracket [lo, hi] with hi/lo <= width.

    The integral is computed by quadrature and by the Bessel closed form; the
    two must agree to route_tol.
    """
    rows = []
    route_err = 0.0
    ratios = []
    for nu in nus:
        for z in zs:
            f = (lambda s, z=z: np.exp(z * (s - 1.0)))
            try:
                quad, _ = adaptive_doubling(lambda m, nu=nu: pi_measure_rule(nu, m), f, 1e-12, 16, 4096)
            except QuadratureError as exc:
                quad = exc.best
            closed = _laplace_closed_form(nu, z)
            err = abs(quad - closed) / closed
            route_err = max(route_err, err)
            ratio = closed * (1.0 + z) ** (nu + 0.5)
            ratios.append(ratio)
            rows.append({"nu": nu, "z": z, "ratio": ratio, "route_difference": err})
    lo, hi = min(ratios), max(ratios)
    spread = hi / lo
    return _result("lemma_bes", None, spread <= width and route_err <= route_tol, spread,
                   {"bracket": [lo, hi]}, {"rows": rows, "route_tol": route_tol, "width": width,
                                           "max_route_difference": route_err})


def check_int_est(seed: int = DEFAULT_SEED, n_samples: int = 200, width: float = C_MAX,
                  rel_tol: float = 1e-6) -> CheckResult:
    """int d Pi_nu / ((D-Bs)^kappa (A-Bs)^gamma) against (D-B)^-kappa A^-(nu+1/2) (A-B)^-(gamma-nu-1/2).

    Parameters are drawn with kappa in [0, 3], nu in [-1/2, 3],
    gamma - nu - 1/2 in [1/4, 3], B log-uniform in [1e-2, 1e2] and the gaps
    (A-B)/B, (D-A)/B log-uniform in [1e-4, 1e2].
    """
    rng = np.random.default_rng(seed)
    ratios, rows = [], []
    unconverged = 0
    for _ in range(n_samples):
        kappa = rng.uniform(0.0, 3.0)
        nu = rng.uniform(-0.5, 3.0)
        gam = nu + 0.5 + rng.uniform(0.25, 3.0)
        B = 10.0 ** rng.uniform(-2.0, 2.0)
        A = B * (1.0 + 10.0 ** rng.uniform(-4.0, 2.0))
        D = A + B * 10.0 ** rng.uniform(-4.0, 2.0)

        def f(s, A=A, B=B, D=D, kappa=kappa, gam=gam):
            return (D - B * s) ** (-kappa) * (A - B * s) ** (-gam)

        try:
            value, _ = adaptive_doubling(lambda m, nu=nu: pi_measure_rule(nu, m), f, rel_tol, 16, 4096)
        except QuadratureError as exc:
            value = exc.best
            unconverged += 1
        rhs = (D - B) ** (-kappa) * A ** (-nu - 0.5) * (A - B) ** (-(gam - nu - 0.5))
        ratios.append(value / rhs)
        rows.append({"kappa": kappa, "gamma": gam, "nu": nu, "A": A, "B": B, "D": D, "ratio": value / rhs})
    lo, hi = min(ratios), max(ratios)
    i_lo, i_hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return _result("int_est", None, hi / lo <= width and unconverged == 0, hi / lo,
                   {"lowest": rows[i_lo], "highest": rows[i_hi]},
                   {"bracket": [lo, hi], "seed": seed, "n_samples": n_samples, "unconverged": unconverged,
                    "width": width})


def check_iteration(lam: float = 1.5, grid: GridSpec = GridSpec(theta_steps=96, phi_steps=96),
                    theta_steps: int = 24, t_values=None, c_max: float = C_MAX,
                    rel_slack: float = 1e-6) -> CheckResult:
    """Push the fitted endpoint bounds at lambda through the reduction integral to lambda' = lambda/2 - 1/4.

    With (C, c1, c2) fitted for G^lambda(cos theta, 1), the identity
    G_t^{lambda'}(cos theta, 1) = const int G_{t/4}^lambda(v cos(theta/2), 1) d Pi_{lambda'}(v)
    turns them into explicit bounds C^-1 const I(c1) <= G^{lambda'} <= C const I(c2),
    I(c) = int (t/4)^-(lambda+1) exp(-c arccos(v cos(theta/2))^2 / (t/4)) d Pi_{lambda'}(v).
    The check requires (i) the series value of G^{lambda'} to lie between the
    two bounds wherever theta^2/t stays inside the distance range the fit at
    lambda was made on (tolerance rel_slack |G| plus ten rounding estimates)
    and (ii) const I(c1) and const I(c2) to reproduce the endpoint shape at
    lambda' with constants at most c_max.  The implied constants at lambda'
    are C times those of (ii).
    """
    lam2 = 0.5 * lam - 0.25
    thetas_fit = grid.thetas()
    fit = _endpoint_fit(lam, thetas_fit, grid.t_values, _endpoint_series(lam, thetas_fit))
    C, c1, c2 = fit["C"], fit["c1"], fit["c2"]
    const = reduction_constant(JacobiParams(lam2, lam2))
    if t_values is None:
        # t/4 must stay inside the fitted time range
        t_values = tuple(4.0 * t for t in grid.t_values[::3])
    thetas = np.arange(theta_steps + 1) * (math.pi / theta_steps)
    worst_violation, where = 0.0, None
    n_asserted = 0
    shape_low, shape_up = [], []
    series_params = JacobiParams(lam2, lam2)
    for t in t_values:
        tq = 0.25 * t
        kg = heat_series_grid(series_params, np.cos(thetas), np.array([1.0]), t)
        lows, ups = [], []
        for th, g, rnd in zip(thetas, kg.values[:, 0], kg.rounding[:, 0]):
            ch = math.cos(0.5 * th)

            def gauss(v, c, ch=ch):
                ang = np.arccos(np.clip(v * ch, -1.0, 1.0))
                return tq ** (-lam - 1.0) * np.exp(-c * ang ** 2 / tq)

            up, _ = adaptive_doubling(lambda m: pi_measure_rule(lam2, m), lambda v: gauss(v, c2), 1e-10, 32, 4096)
            lo, _ = adaptive_doubling(lambda m: pi_measure_rule(lam2, m), lambda v: gauss(v, c1), 1e-10, 32, 4096)
            up, lo = const * up, const * lo
            lows.append(lo)
            ups.append(up)
            if th * th / t <= fit["d_max"]:
                n_asserted += 1
                allowed = rel_slack * abs(g) + 10.0 * rnd
                excess = max(lo / C - g, g - C * up, 0.0)
                if excess / allowed >= worst_violation:
                    worst_violation, where = excess / allowed, {"theta": float(th), "t": float(t)}
        shape_low.append(np.array(lows))
        shape_up.append(np.array(ups))
    ones = np.ones(len(thetas), dtype=bool)
    it_low, it_up = iter(shape_low), iter(shape_up)
    fit_low = _endpoint_fit(lam2, thetas, t_values, lambda t: (next(it_low), ones))
    fit_up = _endpoint_fit(lam2, thetas, t_values, lambda t: (next(it_up), ones))
    shape_c = max(fit_low["C"], fit_up["C"])
    passed = worst_violation <= 1.0 and shape_c <= c_max
    return _result("iteration", None, passed, shape_c, where,
                   {"lambda": lam, "lambda_prime": lam2, "fit_lambda": fit,
                    "fit_integrated_lower": fit_low, "fit_integrated_upper": fit_up,
                    "implied_C_lambda_prime": C * shape_c,
                    "sandwich_excess_over_tolerance": worst_violation, "sandwich_points": n_asserted,
                    "rel_slack": rel_slack, "c_max": c_max})


# ---------------------------------------------------------------------------
# Poisson kernel


def check_poisson(params: JacobiParams, grid: GridSpec = GridSpec(), large_t=None,
                  angle_steps: int = 12, c_max: float = C_MAX) -> CheckResult:
    """Poisson kernel over the printed envelope for t <= 1, and exp(t s/2) H for t in [1, 20].

    Each bracket constant is C = max(max ratio, 1/min ratio), as literally stated.
    The details also record sqrt(max/min), the constant that would remain if
    the envelope were allowed a free normalization.
    """
    thetas, phis = grid.thetas(), grid.phis()
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    lo, hi = math.inf, 0.0
    where_lo = where_hi = None
    n_integral = 0
    for t in grid.t_values:
        values, used = poisson_kernel_grid(params, thetas, phis, t)
        n_integral += int(np.sum(used))
        ratio = values / _poisson_envelope(params, th, ph, t)
        k_lo = np.unravel_index(np.argmin(ratio), ratio.shape)
        k_hi = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[k_lo] < lo:
            lo, where_lo = float(ratio[k_lo]), _point(th[k_lo], ph[k_lo], t)
        if ratio[k_hi] > hi:
            hi, where_hi = float(ratio[k_hi]), _point(th[k_hi], ph[k_hi], t)
    c_small = max(1.0, hi, 1.0 / lo) if lo > 0 else math.inf
    large_t = np.geomspace(1.0, 20.0, 12) if large_t is None else np.asarray(large_t, dtype=float)
    angles = np.arange(angle_steps + 1) * (math.pi / angle_steps)
    big_lo, big_hi = math.inf, 0.0
    for t in large_t:
        kg = poisson_series_grid(params, angles, angles, t)
        scaled = kg.values * math.exp(0.5 * t * params.s)
        big_lo, big_hi = min(big_lo, float(scaled.min())), max(big_hi, float(scaled.max()))
    c_large = max(1.0, big_hi, 1.0 / big_lo) if big_lo > 0 else math.inf
    worst = max(c_small, c_large)
    finite_worst = worst if math.isfinite(worst) else 1e300
    return _result("poisson", params, worst <= c_max, finite_worst,
                   {"lowest": where_lo, "highest": where_hi},
                   {"short_time_bracket": [lo, hi], "C_short_time": c_small,
                    "large_time_bracket": [big_lo, big_hi], "C_large_time": c_large,
                    "scale_free_spread_short_time": math.sqrt(hi / lo) if lo > 0 else math.inf,
                    "scale_free_spread_large_time": math.sqrt(big_hi / big_lo) if big_lo > 0 else math.inf,
                    "integral_fallbacks": n_integral, "c_max": c_max})


def check_poisson_consistency(params: JacobiParams, steps: int = 20,
                              t_values=(0.1, 0.2, 0.5, 1.0, 2.0), tol: float = 1e-6) -> CheckResult:
    """Poisson series against its double-integral representation on cell midpoints."""
    if not params.in_theorem_range:
        return _result("poisson_consistency", params, False, math.nan, None,
                       {"error": "the integral representation needs alpha, beta >= -1/2"})
    angles = (np.arange(steps) + 0.5) * (math.pi / steps)
    worst, where = 0.0, None
    for t in t_values:
        kg = poisson_series_grid(params, angles, angles, t)
        for i, th in enumerate(angles):
            for j in range(i, steps):
                integral = poisson_integral(params, HeatPoint(th, angles[j], t))
                err = abs(kg.values[i, j] - integral) / integral
                if err >= worst:
                    worst, where = err, _point(th, angles[j], t)
    return _result("poisson_consistency", params, worst <= tol, worst, where,
                   {"tol": tol, "grid": [steps, steps, len(t_values)]})


# ---------------------------------------------------------------------------
# suite

PARAM_CHECKS = {
    "mass": check_mass,
    "semigroup": check_semigroup,
    "reduction": check_reduction,
    "comparison": check_comparison,
    "envelope": check_envelope,
    "poisson": check_poisson,
    "poisson_consistency": check_poisson_consistency,
    "kernel_relation": check_kernel_relation,
    "rough": check_rough,
    "large_time": check_large_time,
}
GLOBAL_CHECKS = {
    "sphere_transfer": check_sphere_transfer,
    "endpoint": check_endpoint,
    "lemma_bes": check_lemma_bes,
    "iteration": check_iteration,
    "int_est": check_int_est,
}
_SEEDED = {"reduction", "large_time", "int_est"}


def _task(name, params, seed):
    fn = PARAM_CHECKS.get(name) or GLOBAL_CHECKS[name]
    args = () if params is None else (params,)
    kwargs = {"seed": seed} if name in _SEEDED else {}
    return fn(*args, **kwargs)


def run_all(params_list=DEFAULT_PARAMS, seed: int = DEFAULT_SEED, checks=None) -> list:
    """Run the suite; parameter checks once per pair, the others once.

    Results come back in a fixed order (parameter pairs in input order, then
    the parameter-free checks), independent of thread scheduling.  An empty
    ``params_list`` gives an empty list.
    """
    params_list = list(params_list)
    if not params_list:
        return []
    names = list(PARAM_CHECKS) + list(GLOBAL_CHECKS) if checks is None else list(checks)
    unknown = [n for n in names if n not in PARAM_CHECKS and n not in GLOBAL_CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    tasks = [(n, p) for p in params_list for n in names if n in PARAM_CHECKS]
    tasks += [(n, None) for n in names if n in GLOBAL_CHECKS]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        futures = [pool.submit(_task, n, p, seed) for n, p in tasks]
        return [f.result() for f in futures]
