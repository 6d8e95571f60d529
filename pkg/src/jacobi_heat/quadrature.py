"""Gauss-Jacobi rules for the measures Pi_nu, rho_{a,b} and m_{a,b}.

Nodes come from Newton's method on a difference form of the three-term
recurrence, started from the classical asymptotic root guesses; the
Jacobi-matrix eigenvalues serve only as a fallback starting point.  Every
rule is cached and immutable (arrays are read-only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .specfun import log_gamma, log_gamma_ratio

__all__ = [
    "QuadratureRule",
    "PointMassRule",
    "TensorRule",
    "QuadratureError",
    "gauss_jacobi_nodes",
    "gauss_jacobi_rule",
    "pi_measure_rule",
    "rho_rule",
    "trig_rule",
    "integrate",
    "adaptive_doubling",
    "pi_moment",
    "DEFAULT_DEGREE",
    "MAX_DEGREE",
]

DEFAULT_DEGREE = 64
MAX_DEGREE = 4096


class QuadratureError(RuntimeError):
    """Root finding or adaptive refinement failed.

    ``best`` holds the last estimate and ``difference`` the last change
    between successive refinements when the failure came from
    :func:`adaptive_doubling`.
    """

    def __init__(self, message, best=None, difference=None, degree=None):
        super().__init__(message)
        self.best = best
        self.difference = difference
        self.degree = degree


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    measure_kind: str  # "Pi", "Rho" or "TrigM"
    params: tuple
    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.degree < 1 or len(self.nodes) != self.degree or len(self.weights) != self.degree:
            raise ValueError("degree must match the number of nodes and weights")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def support(self):
        return (0.0, math.pi) if self.measure_kind == "TrigM" else (-1.0, 1.0)


@dataclass(frozen=True, eq=False)
class PointMassRule:
    """Pi_{-1/2} = (delta_{-1} + delta_{+1}) / 2."""

    nodes: np.ndarray = None
    weights: np.ndarray = None
    measure_kind: str = "Pi"
    params: tuple = (-0.5,)

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.array([-1.0, 1.0]))
        object.__setattr__(self, "weights", np.array([0.5, 0.5]))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def degree(self):
        return 2


@dataclass(frozen=True, eq=False)
class TensorRule:
    """Product of two one-dimensional rules; f is called as f(u, v)."""

    first: object
    second: object

    @property
    def degree(self):
        return max(self.first.degree, self.second.degree)


Rule = Union[QuadratureRule, PointMassRule, TensorRule]


def _endpoint_pair(a, b, m, z):
    """P_m and P_{m-1} at x = 1 - 2z, for z in [0, 1/2].

    The plain recurrence subtracts nearly equal numbers next to x = 1.  Here
    P_n = P_n(1) q_n and the differences d_n = q_n - q_{n-1} are propagated
    instead (Reinsch's modification), so that small z enters multiplicatively.
    """
    q_prev = np.ones_like(z)
    if m == 0:
        return q_prev, np.zeros_like(z)
    d = -(a + b + 2.0) / (a + 1.0) * z
    q = q_prev + d
    u_prev, u = 1.0, a + 1.0  # P_n(1) = binom(n+a, n)
    for n in range(2, m + 1):
        c = 2.0 * n + a + b
        a1 = 2.0 * n * (n + a + b) * (c - 2.0)
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c
        gamma = a4 / a1 * n * (n - 1.0) / ((n + a) * (n + a - 1.0))
        d = gamma * d - 2.0 * z * (a3 / a1) * (n / (n + a)) * q
        q_prev, q = q, q + d
        u_prev, u = u, u * (n + a) / n
    return u * q, u_prev * q_prev


def _pair(a, b, m, zr, zl):
    """P_m and P_{m-1} at nodes described by (1-x)/2 and (1+x)/2."""
    right = zr <= zl
    p = np.empty_like(zr)
    p_prev = np.empty_like(zr)
    if np.any(right):
        p[right], p_prev[right] = _endpoint_pair(a, b, m, zr[right])
    if np.any(~right):
        # P_n^{a,b}(-x) = (-1)^n P_n^{b,a}(x)
        lp, lp_prev = _endpoint_pair(b, a, m, zl[~right])
        sign = -1.0 if m % 2 else 1.0
        p[~right], p_prev[~right] = sign * lp, -sign * lp_prev
    return p, p_prev


def _derivative(a, b, m, zr, zl, p, p_prev):
    # (2m+a+b)(1-x^2) P_m' = m[(a-b) - (2m+a+b)x] P_m + 2(m+a)(m+b) P_{m-1}
    c = 2.0 * m + a + b
    x = zl - zr
    return (m * ((a - b) - c * x) * p + 2.0 * (m + a) * (m + b) * p_prev) / (4.0 * c * zr * zl)


def _newton(a, b, m, zr, zl):
    """Polish roots of P_m^{a,b} given as z_right = (1-x)/2 and z_left = (1+x)/2.

    Both distances are carried through the iteration so that every node keeps
    full relative accuracy in 1 -/+ x, not just the rounded double x.
    Returns (x, z_right, z_left, last_step), sorted by x.
    """
    step = np.inf
    for _ in range(100):
        p, p_prev = _pair(a, b, m, zr, zl)
        dx = p / _derivative(a, b, m, zr, zl, p, p_prev)
        zr = zr + 0.5 * dx
        zl = zl - 0.5 * dx
        step = float(np.max(np.abs(dx)))
        if step < 1e-15:
            step = 0.0
            break
    x = np.where(zr < zl, 1.0 - 2.0 * zr, 2.0 * zl - 1.0)
    order = np.argsort(x)
    return x[order], zr[order], zl[order], step


def _roots_ok(x):
    return np.all(np.diff(x) > 0) and x[0] > -1 and x[-1] < 1


def _golub_welsch_guess(a, b, m):
    # eigenvalues of the Jacobi matrix; only a fallback, so dense eigh is fine
    n = np.arange(m, dtype=float)
    c = 2.0 * n + a + b
    denom = c * (c + 2.0)
    safe = np.where(denom != 0, denom, 1.0)
    diag = np.where(denom != 0, (b * b - a * a) / safe, (b - a) / (a + b + 2.0))
    k = n[1:]
    ck = 2.0 * k + a + b
    off = np.sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) / (ck * ck * (ck + 1.0) * (ck - 1.0)))
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return np.linalg.eigvalsh(mat)


def gauss_jacobi_nodes(a: float, b: float, m: int):
    """Nodes and weights of the m-point Gauss rule for (1-x)^a (1+x)^b on (-1, 1).

    Returned in increasing order.  Weights are the unnormalized Christoffel
    numbers (they sum to h_0).
    """
    x, w, _ = _gauss_jacobi(float(a), float(b), int(m))
    return x, w


@lru_cache(maxsize=256)
def _gauss_jacobi(a, b, m):
    # also returns the half-distances (1-x)/2 to the right endpoint, at full relative accuracy
    if a <= -1 or b <= -1 or m < 1:
        raise ValueError(f"invalid Gauss-Jacobi request a={a}, b={b}, m={m}")
    log_h0 = ((a + b + 1.0) * math.log(2.0) + log_gamma(a + 1.0)
              + log_gamma(b + 1.0) - log_gamma(a + b + 2.0))
    if m == 1:
        x = np.array([(b - a) / (a + b + 2.0)])
        return x, np.array([math.exp(log_h0)]), 0.5 * (1.0 - x)

    k = np.arange(m, 0, -1)
    theta = (k + 0.5 * a - 0.25) * math.pi / (m + 0.5 * (a + b + 1.0))
    x, zr, zl, last_step = _newton(a, b, m, np.sin(0.5 * theta) ** 2, np.cos(0.5 * theta) ** 2)
    if last_step or not _roots_ok(x):
        # the asymptotic guesses can be poor for large parameters and small m
        guess = _golub_welsch_guess(a, b, m)
        x, zr, zl, last_step = _newton(a, b, m, 0.5 * (1.0 - guess), 0.5 * (1.0 + guess))
    if last_step or not _roots_ok(x):
        raise QuadratureError(
            f"Gauss-Jacobi root finding failed (a={a}, b={b}, m={m}); last max Newton step "
            f"{last_step:.3e}, min gap {np.min(np.diff(x)):.3e}, range [{x[0]}, {x[-1]}]")

    # w_k = 2^(a+b+1) G(m+a+1) G(m+b+1) / [G(m+a+b+1) m! (1-x_k^2) P_m'(x_k)^2]
    p, p_prev = _pair(a, b, m, zr, zl)
    dp = _derivative(a, b, m, zr, zl, p, p_prev)
    log_g = ((a + b + 1.0) * math.log(2.0) + log_gamma_ratio(m + 1.0, a)
             + log_gamma_ratio(m + 1.0, b) - log_gamma_ratio(m + 1.0, a + b))
    w = math.exp(log_g) / (4.0 * zr * zl * dp * dp)
    return x, w, zr


def pi_moment(nu: float, k: int) -> float:
    """k-th moment of Pi_nu (zero for odd k)."""
    if k % 2:
        return 0.0
    j = k // 2
    if nu == -0.5:
        return 1.0
    return math.exp(log_gamma(nu + 1.0) + log_gamma(j + 0.5) - 0.5 * math.log(math.pi) - log_gamma(nu + j + 1.0))


@lru_cache(maxsize=256)
def gauss_jacobi_rule(nu: float, degree: int) -> QuadratureRule:
    """Gauss rule for the probability measure Pi_nu, nu > -1/2."""
    nu = float(nu)
    if not nu > -0.5:
        raise ValueError(f"gauss_jacobi_rule needs nu > -1/2, got {nu}")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    x, w = gauss_jacobi_nodes(nu - 0.5, nu - 0.5, degree)
    # (1-u)^(nu-1/2)(1+u)^(nu-1/2) = (1-u^2)^(nu-1/2); Pi_nu normalization
    norm = math.exp(log_gamma(nu + 1.0) - 0.5 * math.log(math.pi) - log_gamma(nu + 0.5))
    return QuadratureRule("Pi", (nu,), degree, x.copy(), w * norm)


_POINT_MASS = PointMassRule()


def pi_measure_rule(nu: float, degree: int = DEFAULT_DEGREE):
    nu = float(nu)
    if nu < -0.5:
        raise ValueError(f"Pi_nu is defined for nu >= -1/2, got {nu}")
    if nu == -0.5:
        return _POINT_MASS
    return gauss_jacobi_rule(nu, degree)


@lru_cache(maxsize=256)
def rho_rule(alpha: float, beta: float, degree: int) -> QuadratureRule:
    """Gauss rule for d rho = (1-x)^alpha (1+x)^beta dx on (-1, 1)."""
    x, w = gauss_jacobi_nodes(alpha, beta, degree)
    return QuadratureRule("Rho", (float(alpha), float(beta)), degree, x.copy(), w.copy())


@lru_cache(maxsize=256)
def trig_rule(alpha: float, beta: float, degree: int) -> QuadratureRule:
    """Rule for d m = sin(t/2)^(2a+1) cos(t/2)^(2b+1) dt on (0, pi).

    Under x = cos(theta), d m = 2^(-a-b-1) d rho, so this is the rho rule
    mapped to the angle variable.
    """
    _, w, zr = _gauss_jacobi(float(alpha), float(beta), int(degree))
    # theta = 2 asin(sqrt((1-x)/2)) keeps the angles near 0 accurate
    theta = 2.0 * np.arcsin(np.sqrt(zr[::-1]))
    return QuadratureRule("TrigM", (float(alpha), float(beta)), degree,
                          theta.copy(), w[::-1] * 2.0 ** (-alpha - beta - 1.0))


def _checked(values):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("integrand is not finite at every quadrature node")
    return values


def integrate(rule: Rule, f: Callable) -> float:
    """Sum of w_i f(node_i); f is vectorized over the nodes."""
    if isinstance(rule, TensorRule):
        u, wu = rule.first.nodes, rule.first.weights
        v, wv = rule.second.nodes, rule.second.weights
        total = 0.0
        block = max(1, (1 << 21) // len(v))
        for i in range(0, len(u), block):
            vals = np.broadcast_to(f(u[i:i + block, None], v[None, :]), (len(u[i:i + block]), len(v)))
            vals = _checked(vals)
            total += float(wu[i:i + block] @ (vals @ wv))
        return total
    vals = _checked(np.broadcast_to(f(rule.nodes), rule.nodes.shape))
    return float(rule.weights @ vals)


def adaptive_doubling(rule_family: Callable[[int], Rule], f: Callable, rel_tol: float,
                      start_degree: int = DEFAULT_DEGREE, max_degree: int = MAX_DEGREE):
    """Integrate with degrees m, 2m, 4m, ... until two successive values agree.

    Returns ``(value, degree_used)``.  Exceeding ``max_degree`` raises
    QuadratureError carrying the best estimate and the last difference.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    m = start_degree
    prev = integrate(rule_family(m), f)
    diff = math.inf
    while 2 * m <= max_degree:
        m *= 2
        cur = integrate(rule_family(m), f)
        diff = abs(cur - prev)
        if diff <= rel_tol * abs(cur):
            return cur, m
        prev = cur
    raise QuadratureError(
        f"adaptive doubling did not reach rel_tol={rel_tol:g} by degree {m}; "
        f"last relative change {diff / abs(prev) if prev else math.inf:.3e}",
        best=prev, difference=diff, degree=m)
