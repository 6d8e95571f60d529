"""Scalar special functions and Jacobi polynomial primitives.

Everything here works on plain floats or numpy arrays and is pure.  Large
gamma ratios (norms, binomials) are always formed as ``exp`` of a difference
of logs so that degrees up to ~1e4 stay representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiParams",
    "PolySequence",
    "log_gamma",
    "log_gamma_ratio",
    "bessel_i",
    "log_bessel_i",
    "jacobi_poly_seq",
    "jacobi_poly_matrix",
    "jacobi_norm",
    "log_jacobi_norm",
    "jacobi_sup_bound",
    "log_sup_bound",
]


@dataclass(frozen=True)
class JacobiParams:
    """Type parameters (alpha, beta) of a Jacobi system."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)) or a <= -1 or b <= -1:
            raise ValueError(f"Jacobi parameters must satisfy alpha, beta > -1; got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def in_theorem_range(self) -> bool:
        return self.alpha >= -0.5 and self.beta >= -0.5

    @property
    def s(self) -> float:
        """alpha + beta + 1, the shift appearing in every eigenvalue."""
        return self.alpha + self.beta + 1.0

    @property
    def gamma(self) -> float:
        """max(alpha, beta, -1/2); exponent in the polynomial sup bound."""
        return max(self.alpha, self.beta, -0.5)

    def swapped(self) -> "JacobiParams":
        return JacobiParams(self.beta, self.alpha)

    def shifted(self, eps: float = 0.0, delta: float = 0.0) -> "JacobiParams":
        return JacobiParams(self.alpha + eps, self.beta + delta)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class PolySequence:
    params: JacobiParams
    argument: float
    values: tuple

    def __post_init__(self):
        if self.values[0] != 1.0:
            raise ValueError("P_0 must equal 1")


# ---------------------------------------------------------------------------
# log-gamma

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_EULER = 0.57721566490153286061

# zeta(k) for k = 2..30, used by the Taylor expansion of lgamma(1+z) around z = 0
_ZETA = (
    1.6449340668482264, 1.2020569031595943, 1.0823232337111382, 1.0369277551433699,
    1.0173430619844491, 1.0083492773819228, 1.0040773561979443, 1.0020083928260822,
    1.0009945751278181, 1.0004941886041195, 1.0002460865533080, 1.0001227133475785,
    1.0000612481350587, 1.0000305882363070, 1.0000152822594087, 1.0000076371976379,
    1.0000038172932650, 1.0000019082127166, 1.0000009539620339, 1.0000004769329868,
    1.0000002384505027, 1.0000001192199260, 1.0000000596081891, 1.0000000298035035,
    1.0000000149015548, 1.0000000074507118, 1.0000000037252903, 1.0000000018626597,
    1.0000000009313274,
)
_NEAR_ROOT = 0.2


def _lgamma1p_series(z):
    # lgamma(1+z) = -euler*z + sum_{k>=2} (-1)^k zeta(k) z^k / k,  |z| < 1
    acc = np.zeros_like(z)
    zk = z * z
    for k, zeta in enumerate(_ZETA, start=2):
        acc = acc + (zeta / k) * zk * (1.0 if k % 2 == 0 else -1.0)
        zk = zk * z
    return acc - _EULER * z


def _lanczos_lgamma(x):
    z = x - 1.0
    series = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        series = series + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(x):
    """ln Gamma(x) for x > 0, scalar or array.

    Lanczos approximation away from the zeros of lgamma; near x = 1 and
    x = 2 a Taylor expansion keeps the relative error small.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("log_gamma is defined here only for x > 0")
    xs = np.atleast_1d(arr)
    out = np.empty_like(xs)

    near1 = np.abs(xs - 1.0) < _NEAR_ROOT
    near2 = np.abs(xs - 2.0) < _NEAR_ROOT
    small = (xs < 0.5) & ~near1
    rest = ~(near1 | near2 | small)

    out[near1] = _lgamma1p_series(xs[near1] - 1.0)
    z2 = xs[near2] - 2.0
    out[near2] = np.log1p(z2) + _lgamma1p_series(z2)
    # reflection-free shift for 0 < x < 0.5: Gamma(x) = Gamma(x+1)/x
    xsm = xs[small]
    shifted = xsm + 1.0
    inner = np.where(np.abs(shifted - 1.0) < _NEAR_ROOT,
                     _lgamma1p_series(xsm),
                     _lanczos_lgamma(shifted))
    out[small] = inner - np.log(xsm)
    out[rest] = _lanczos_lgamma(xs[rest])

    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


# B_{2k} / (2k (2k-1)), k = 1..8
_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0,
             -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0)
_RATIO_SWITCH = 12.0


def log_gamma_ratio(x, a):
    """ln Gamma(x + a) - ln Gamma(x) without forming the two large logs.

    For large x the Stirling series is differenced term by term, which keeps
    the absolute error near machine epsilon times the size of the result
    rather than of ln Gamma(x) itself.
    """
    x = np.asarray(x, dtype=float)
    a = float(a)
    xs = np.atleast_1d(x)
    if np.any(~(xs > 0)) or np.any(~(xs + a > 0)):
        raise ValueError("log_gamma_ratio needs x > 0 and x + a > 0")
    out = np.empty_like(xs)
    big = (xs >= _RATIO_SWITCH) & (xs + a >= _RATIO_SWITCH)
    if np.any(~big):
        out[~big] = log_gamma(xs[~big] + a) - log_gamma(xs[~big])
    if np.any(big):
        y = xs[big]
        y2 = y + a
        # (y+a-1/2) ln(y+a) - (y-1/2) ln y - a
        val = (y - 0.5) * np.log1p(a / y) + a * np.log(y2) - a
        for k, coef in enumerate(_STIRLING, start=1):
            val = val + coef * (y2 ** (1 - 2 * k) - y ** (1 - 2 * k))
        out[big] = val
    if x.ndim == 0:
        return float(out[0])
    return out.reshape(x.shape)


# ---------------------------------------------------------------------------
# modified Bessel I

_BESSEL_SWITCH = 20.0


def _log_bessel_series(nu, z):
    # log of sum_k (z/2)^(2k+nu) / (k! Gamma(k+nu+1)), computed relative to k = 0
    log_t0 = nu * math.log(z / 2.0) - log_gamma(nu + 1.0)
    q = (z / 2.0) ** 2
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term < 1e-17 * total:
            break
    return log_t0 + math.log(total)


def _log_bessel_asymptotic(nu, z):
    mu = 4.0 * nu * nu
    term, total = 1.0, 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) >= prev or abs(term) < 1e-17 * abs(total):
            if abs(term) < prev:
                total += term
            break
        total += term
        prev = abs(term)
    return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(total)


def _check_bessel_args(nu, z):
    if not nu > -1:
        raise ValueError(f"bessel_i needs nu > -1, got {nu}")
    if not z >= 0:
        raise ValueError(f"bessel_i needs z >= 0, got {z}")


def log_bessel_i(nu: float, z: float) -> float:
    """ln I_nu(z) for z > 0 (or z = 0 with nu = 0)."""
    nu, z = float(nu), float(z)
    _check_bessel_args(nu, z)
    if z == 0.0:
        if nu == 0.0:
            return 0.0
        return -math.inf if nu > 0 else math.inf
    if z > max(_BESSEL_SWITCH, 2.0 * nu * nu):
        return _log_bessel_asymptotic(nu, z)
    return _log_bessel_series(nu, z)


def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function of the first kind I_nu(z), z >= 0.

    Ascending series for z <= 20 and the large-argument expansion above.
    Raises OverflowError instead of returning inf when the value is not
    representable.
    """
    nu, z = float(nu), float(z)
    _check_bessel_args(nu, z)
    if z == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        raise OverflowError(f"I_{nu}(0) is infinite for -1 < nu < 0")
    lg = log_bessel_i(nu, z)
    if lg > 709.78:
        raise OverflowError(f"I_{nu}({z}) exceeds the double range (log value {lg:.6g})")
    return math.exp(lg)


# ---------------------------------------------------------------------------
# Jacobi polynomials


def jacobi_poly_matrix(alpha: float, beta: float, x, n_max: int) -> np.ndarray:
    """Rows P_0..P_{n_max} evaluated at every entry of ``x``.

    Three-term recurrence in n; shape is ``(n_max + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    a, b = float(alpha), float(beta)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    ab2 = a * a - b * b
    for n in range(2, n_max + 1):
        c = 2.0 * n + a + b
        a1 = 2.0 * n * (n + a + b) * (c - 2.0)
        a2 = (c - 1.0) * ab2
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c
        out[n] = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1
    return out


def jacobi_poly_seq(params: JacobiParams, x: float, n_max: int) -> PolySequence:
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [-1, 1], got {x}")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    vals = jacobi_poly_matrix(params.alpha, params.beta, float(x), n_max)
    return PolySequence(params, float(x), tuple(float(v) for v in vals))


def log_jacobi_norm(alpha: float, beta: float, n) -> np.ndarray:
    """ln h_n for integer n (scalar or array).

    The n = 0 value uses 2^(a+b+1) Gamma(a+1) Gamma(b+1) / Gamma(a+b+2), which
    is also the correct replacement when a + b = -1.
    """
    n = np.asarray(n, dtype=float)
    a, b = float(alpha), float(beta)
    s = a + b + 1.0
    h0 = s * math.log(2.0) + log_gamma(a + 1.0) + log_gamma(b + 1.0) - log_gamma(s + 1.0)
    nn = np.atleast_1d(n)
    out = np.full(nn.shape, h0)
    pos = nn > 0
    if np.any(pos):
        m = nn[pos]
        out[pos] = (s * math.log(2.0) + log_gamma_ratio(m + 1.0, a) + log_gamma_ratio(m + 1.0, b)
                    - np.log(2.0 * m + s) - log_gamma_ratio(m + 1.0, a + b))
    if n.ndim == 0:
        return float(out[0])
    return out.reshape(n.shape)


def jacobi_norm(params: JacobiParams, n: int) -> float:
    """h_n = integral of P_n^2 (1-x)^alpha (1+x)^beta over [-1, 1]."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.exp(log_jacobi_norm(params.alpha, params.beta, n))


def log_sup_bound(q: float, n) -> np.ndarray:
    """ln binom(n+q, n); the sup of |P_n| on [-1,1] when max(alpha, beta) = q >= -1/2."""
    n = np.asarray(n, dtype=float)
    return log_gamma_ratio(n + 1.0, q) - log_gamma(q + 1.0)


def jacobi_sup_bound(params: JacobiParams, n: int) -> float:
    if not params.in_theorem_range:
        raise ValueError(f"sup bound is certified only for alpha, beta >= -1/2; got {params}")
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    return math.exp(log_sup_bound(max(params.alpha, params.beta), n))
