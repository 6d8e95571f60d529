"""Closed-form bound functions for the heat and Poisson kernels and constant fitting.

The two-sided short-time bounds have the shape

    C^-1 E_0 exp(-c1 d) <= G_t <= C E_0 exp(-c2 d),    d = (theta - phi)^2 / t,

where E_0 collects the algebraic factors.  :func:`fit_constants` makes the
existential constants explicit on a finite grid.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .kernels import T_FLOOR, HeatPoint, KernelGrid, heat_series_grid
from .specfun import JacobiParams

__all__ = [
    "EnvelopeConstants",
    "GridSpec",
    "ReportRow",
    "FitReport",
    "FitInfeasibleError",
    "main_envelope",
    "trig_envelope",
    "poisson_envelope",
    "rough_bound",
    "comparison_factor",
    "ft_diagnostic",
    "log_envelope_base",
    "fit_band",
    "fit_constants",
    "series_kernel",
    "thread_count",
    "C_INFEASIBLE",
    "DEFAULT_C_RANGE",
]

# fits needing a larger C are reported as infeasible
C_INFEASIBLE = 1e6
DEFAULT_C_RANGE = (1e-3, 10.0)
# constants within this factor of the optimal C are acceptable when widening (c2, c1)
BAND_FACTOR = 2.0


def thread_count() -> int:
    """Worker threads allowed by JACOBI_HEAT_THREADS (0 or unset: one per CPU)."""
    raw = os.environ.get("JACOBI_HEAT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"JACOBI_HEAT_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError("JACOBI_HEAT_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class EnvelopeConstants:
    C: float
    c1: float
    c2: float
    horizon_T: float

    def __post_init__(self):
        if not (self.c1 >= self.c2 > 0):
            raise ValueError(f"need c1 >= c2 > 0; got c1={self.c1}, c2={self.c2}")
        if not self.C >= 1:
            raise ValueError(f"need C >= 1; got {self.C}")
        if not self.horizon_T > 0:
            raise ValueError("horizon_T must be positive")

    def as_dict(self) -> dict:
        return {"C": self.C, "c1": self.c1, "c2": self.c2, "horizon_T": self.horizon_T}


@dataclass(frozen=True)
class GridSpec:
    """theta_k = k pi / theta_steps, k = 0..theta_steps (same for phi), times t_values.

    ``theta_values``/``phi_values`` override the uniform angles when given.
    """

    theta_steps: int = 48
    phi_steps: int = 48
    t_values: tuple = tuple(np.geomspace(1e-3, 1.0, 25).tolist())
    theta_values: Optional[tuple] = None
    phi_values: Optional[tuple] = None

    def __post_init__(self):
        if int(self.theta_steps) < 1 or int(self.phi_steps) < 1:
            raise ValueError("grid steps must be >= 1")
        ts = tuple(float(t) for t in self.t_values)
        if not ts or any(not (t > 0 and math.isfinite(t)) for t in ts):
            raise ValueError("t_values must be a non-empty list of positive numbers")
        object.__setattr__(self, "t_values", ts)
        for name in ("theta_values", "phi_values"):
            vals = getattr(self, name)
            if vals is not None:
                vals = tuple(float(v) for v in vals)
                if not vals or any(not 0.0 <= v <= math.pi for v in vals):
                    raise ValueError(f"{name} must lie in [0, pi]")
                object.__setattr__(self, name, vals)

    def thetas(self) -> np.ndarray:
        if self.theta_values is not None:
            return np.array(self.theta_values)
        return _angles(self.theta_steps)

    def phis(self) -> np.ndarray:
        if self.phi_values is not None:
            return np.array(self.phi_values)
        return _angles(self.phi_steps)

    def check_floor(self, t_floor: float = T_FLOOR):
        if min(self.t_values) < t_floor:
            raise ValueError(f"grid contains t below the series floor {t_floor:g}")

    def as_dict(self) -> dict:
        return {"theta_steps": int(self.theta_steps), "phi_steps": int(self.phi_steps),
                "t_values": list(self.t_values),
                "theta_values": None if self.theta_values is None else list(self.theta_values),
                "phi_values": None if self.phi_values is None else list(self.phi_values)}


def _angles(steps):
    k = np.arange(int(steps) + 1)
    out = k * (math.pi / int(steps))
    out[-1] = math.pi
    return out


@dataclass(frozen=True)
class ReportRow:
    """One grid point of an envelope report; columns in declaration order."""

    alpha: float
    beta: float
    theta: float
    phi: float
    t: float
    kernel: float
    envelope: float
    ratio: float
    tail_bound: float
    certified: bool

    COLUMNS = ("alpha", "beta", "theta", "phi", "t", "kernel", "envelope", "ratio",
               "tail_bound", "certified")


# ---------------------------------------------------------------------------
# bound functions


def _point_arrays(point):
    return float(point.theta), float(point.phi), float(point.t)


def log_envelope_base(params: JacobiParams, theta, phi, t, kind: str = "main"):
    """log of the algebraic part E_0 (the envelope without its Gaussian factor).

    kind "main": [t + theta phi]^(-a-1/2) [t + (pi-theta)(pi-phi)]^(-b-1/2) t^(-1/2);
    kind "trig": the same with sin(theta/2) sin(phi/2) and cos(theta/2) cos(phi/2).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    t = np.asarray(t, dtype=float)
    ea, eb = params.alpha + 0.5, params.beta + 0.5
    if kind == "main":
        left, right = theta * phi, (math.pi - theta) * (math.pi - phi)
    elif kind == "trig":
        left = np.sin(0.5 * theta) * np.sin(0.5 * phi)
        # cos(pi/2) rounds to 6e-17; use the exact endpoint value
        right = np.where((theta == math.pi) | (phi == math.pi), 0.0,
                         np.cos(0.5 * theta) * np.cos(0.5 * phi))
    else:
        raise ValueError(f"unknown envelope kind {kind!r}")
    return -ea * np.log(t + left) - eb * np.log(t + right) - 0.5 * np.log(t)


def _gauss(theta, phi, t, c):
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    return math.exp(-c * (theta - phi) ** 2 / t)


def main_envelope(params: JacobiParams, point: HeatPoint, c: float) -> float:
    """[t + theta phi]^(-a-1/2) [t + (pi-theta)(pi-phi)]^(-b-1/2) t^(-1/2) exp(-c (theta-phi)^2 / t)."""
    th, ph, t = _point_arrays(point)
    return math.exp(float(log_envelope_base(params, th, ph, t, "main"))) * _gauss(th, ph, t, c)


def trig_envelope(params: JacobiParams, point: HeatPoint, c: float) -> float:
    """Sine/cosine variant of :func:`main_envelope`."""
    th, ph, t = _point_arrays(point)
    return math.exp(float(log_envelope_base(params, th, ph, t, "trig"))) * _gauss(th, ph, t, c)


def poisson_envelope(params: JacobiParams, point: HeatPoint) -> float:
    """(t^2+theta^2+phi^2)^(-a-1/2) (t^2+(pi-theta)^2+(pi-phi)^2)^(-b-1/2) t / (t^2+(theta-phi)^2)."""
    th, ph, t = _point_arrays(point)
    return float(_poisson_envelope(params, th, ph, t))


def _poisson_envelope(params, theta, phi, t):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    t2 = t * t
    left = t2 + theta ** 2 + phi ** 2
    right = t2 + (math.pi - theta) ** 2 + (math.pi - phi) ** 2
    return (left ** (-params.alpha - 0.5) * right ** (-params.beta - 0.5)
            * t / (t2 + (theta - phi) ** 2))


def rough_bound(params: JacobiParams, t: float) -> float:
    """t^-(2 gamma + 2), gamma = max(alpha, beta, -1/2)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return float(t) ** (-(2.0 * params.gamma + 2.0))


def comparison_factor(eps: float, delta: float, x):
    """(1-x)^(eps/2) (1+x)^(delta/2), with (1 +- x)^0 = 1 at x = -+1."""
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("x must lie in [-1, 1]")
    # numpy defines 0.0 ** 0.0 = 1, matching the convention
    out = np.power(1.0 - x, 0.5 * eps) * np.power(1.0 + x, 0.5 * delta)
    return out if out.ndim else float(out)


def ft_diagnostic(point: HeatPoint):
    """(F_t, surrogate) with F_t = min(1 + t/(sin sin), 1 + t/(cos cos)) of the half angles
    and the comparable expression 1 + t / cos((theta - phi)/2).  Vanishing denominators give inf.
    """
    th, ph, t = _point_arrays(point)
    ss = math.sin(0.5 * th) * math.sin(0.5 * ph)
    cc = 0.0 if math.pi in (th, ph) else math.cos(0.5 * th) * math.cos(0.5 * ph)
    cd = 0.0 if abs(th - ph) == math.pi else math.cos(0.5 * (th - ph))

    def one_plus(den):
        return math.inf if den <= 0.0 else 1.0 + t / den

    return min(one_plus(ss), one_plus(cc)), one_plus(cd)


# ---------------------------------------------------------------------------
# constant fitting


class FitInfeasibleError(ValueError):
    """No admissible constants with C <= C_INFEASIBLE; ``report`` holds the attempt."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class FitReport:
    constants: EnvelopeConstants
    params: JacobiParams
    n_points: int
    n_excluded: int
    certified: bool
    conjectural_range: bool
    worst_upper: dict
    worst_lower: dict
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "C": self.constants.C, "c1": self.constants.c1, "c2": self.constants.c2,
            "horizon_T": self.constants.horizon_T,
            "params": self.params.as_dict(),
            "n_points": self.n_points, "n_excluded": self.n_excluded,
            "certified": self.certified,
            "range": "conjectural range" if self.conjectural_range else "theorem range",
            "worst_points": {"upper": self.worst_upper, "lower": self.worst_lower},
            "notes": list(self.notes),
        }


def _bisect(pred, lo, hi, iters=200):
    """(last False, first True) bracket, in log-space, of a predicate False at lo and True at hi."""
    lo, hi = math.log(lo), math.log(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(math.exp(mid)):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-13:
            break
    return math.exp(lo), math.exp(hi)


def fit_band(log_ratio0, dist, c_range=(1e-3, 10.0), band_factor: float = BAND_FACTOR):
    """Fit C, c1 >= c2 for bounds C^-1 E0 e^(-c1 d) <= K <= C E0 e^(-c2 d).

    With r_i = log(K_i / E0_i) and d_i >= 0, the upper bound at c needs
    log C >= U(c) = max_i (r_i + c d_i), increasing and convex in c, and the
    lower bound needs log C >= L(c) = max_i (-r_i - c d_i), decreasing and
    convex.  C* = min over c in ``c_range`` of max(U, L), attained where U
    and L cross (or at an end of the range).  Every c with
    max(U, L) <= log(band_factor C*) is acceptable; c2 and c1 are the
    smallest and largest of them, located by bisection.  The reported
    C = max(1, e^U(c2), e^L(c1)).

    Returns (C, c1, c2, index of the worst upper point, index of the worst lower point).
    """
    r = np.asarray(log_ratio0, dtype=float).ravel()
    d = np.asarray(dist, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("no points to fit")
    c_lo, c_hi = map(float, c_range)
    if not 0 < c_lo <= c_hi:
        raise ValueError("c_range must satisfy 0 < low <= high")

    def upper(c):
        return float(np.max(r + c * d))

    def lower(c):
        return float(np.max(-r - c * d))

    # U - L is increasing: the minimizer of max(U, L) is its sign change
    if upper(c_lo) >= lower(c_lo):
        c_star = c_lo
    elif upper(c_hi) <= lower(c_hi):
        c_star = c_hi
    else:
        c_star = _bisect(lambda c: upper(c) >= lower(c), c_lo, c_hi)[1]
    thr = max(upper(c_star), lower(c_star)) + math.log(band_factor)
    c2 = c_lo if lower(c_lo) <= thr else _bisect(lambda c: lower(c) <= thr, c_lo, c_star)[1]
    c1 = c_hi if upper(c_hi) <= thr else _bisect(lambda c: upper(c) > thr, c_star, c_hi)[0]
    c1 = max(c1, c2)
    log_c = max(0.0, upper(c2), lower(c1))
    worst_up = int(np.argmax(r + c2 * d))
    worst_lo = int(np.argmax(-r - c1 * d))
    return math.exp(log_c), c1, c2, worst_up, worst_lo


def series_kernel(params: JacobiParams, thetas, phis, t: float) -> KernelGrid:
    """Default kernel for fitting: G_t(cos theta_i, cos phi_j) by the certified series."""
    return heat_series_grid(params, np.cos(thetas), np.cos(phis), t)


def _evaluate(kernel_fn, params, thetas, phis, t_values):
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(lambda t: kernel_fn(params, thetas, phis, t), t_values))


def fit_constants(params: JacobiParams, grid: GridSpec = GridSpec(),
                  kernel_fn: Optional[Callable] = None, envelope: str = "main",
                  c_range=DEFAULT_C_RANGE, horizon_T: Optional[float] = None,
                  with_rows: bool = False):
    """Fit (C, c1, c2) so that C^-1 E(c1) <= kernel <= C E(c2) on every resolved grid point.

    ``kernel_fn(params, thetas, phis, t)`` returns a KernelGrid; points the
    series cannot resolve from rounding noise (and nonpositive values) are
    excluded and counted.  Parameters outside the theorem range still fit,
    with the report flagged as conjectural.  Raises FitInfeasibleError when
    the fitted C exceeds C_INFEASIBLE.  Returns (EnvelopeConstants, FitReport).
    """
    grid.check_floor()
    kernel_fn = kernel_fn or series_kernel
    thetas, phis = grid.thetas(), grid.phis()
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    results = _evaluate(kernel_fn, params, thetas, phis, grid.t_values)

    r_all, d_all, keep_all, meta = [], [], [], []
    certified = True
    rows = []
    for t, kg in zip(grid.t_values, results):
        values = np.asarray(kg.values, dtype=float)
        keep = np.asarray(kg.resolved) & (values > 0)
        certified &= bool(kg.certified)
        log_e0 = log_envelope_base(params, th, ph, t, envelope)
        dist = (th - ph) ** 2 / t
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.log(values) - log_e0
        r_all.append(r[keep])
        d_all.append(dist[keep])
        keep_all.append(keep)
        meta.append((t, values, log_e0, dist, kg.tail_bound))

    r = np.concatenate(r_all)
    d = np.concatenate(d_all)
    n_total = sum(k.size for k in keep_all)
    n_kept = r.size
    if n_kept == 0:
        raise FitInfeasibleError("no grid point is resolved by the kernel evaluator")
    C, c1, c2, iu, il = fit_band(r, d, c_range)

    # grid coordinates of the kept points, in the order of r and d
    coords = [(t, values, i, j) for (t, values, _, _, _), keep in zip(meta, keep_all)
              for i, j in zip(*np.nonzero(keep))]

    def describe(k, c):
        t, values, i, j = coords[k]
        return {"theta": float(thetas[i]), "phi": float(phis[j]), "t": float(t),
                "kernel": float(values[i, j]), "log_ratio": float(r[k] + c * d[k])}

    horizon = float(horizon_T if horizon_T is not None else max(grid.t_values))
    notes = []
    conjectural = not params.in_theorem_range
    if conjectural:
        notes.append("conjectural range: alpha or beta below -1/2")
    if n_total - n_kept:
        notes.append(f"{n_total - n_kept} grid points below the series resolution were excluded")

    if with_rows:
        for t, values, log_e0, dist, tail in meta:
            log_env = log_e0 - c2 * dist
            # ratio through logs so an underflowed envelope does not give inf;
            # unresolved noise points may still overflow, they are excluded from the fit
            with np.errstate(all="ignore"):
                env = np.exp(log_env)
                ratio = np.where(values > 0, np.exp(np.log(np.abs(values)) - log_env), values / env)
            for i in range(len(thetas)):
                for j in range(len(phis)):
                    rows.append(ReportRow(params.alpha, params.beta, float(thetas[i]), float(phis[j]),
                                          float(t), float(values[i, j]), float(env[i, j]),
                                          float(ratio[i, j]), float(tail),
                                          bool(certified and params.in_theorem_range)))

    consts = EnvelopeConstants(C, c1, c2, horizon)
    report = FitReport(consts, params, n_kept, n_total - n_kept,
                       bool(certified and params.in_theorem_range), conjectural,
                       describe(iu, c2), describe(il, c1), rows, notes)
    if C > C_INFEASIBLE:
        raise FitInfeasibleError(f"fitted C = {C:.3e} exceeds {C_INFEASIBLE:g}", report)
    return consts, report
