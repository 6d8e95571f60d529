"""High-precision reference values computed with mpmath, independent of the package code."""
import mpmath

_DPS = 120
_NUDGE = mpmath.mpf("1e-40")


def _wrapped(u, t, half, k_max):
    # sqrt(pi/t) sum_k (+-1)^k exp(-(u - 2 pi k)^2 / (4t)), the Poisson-summed theta sum
    total = mpmath.mpf(0)
    for k in range(-k_max, k_max + 1):
        term = mpmath.exp(-(u - 2 * mpmath.pi * k) ** 2 / (4 * t))
        total += -term if (half and k % 2) else term
    return mpmath.sqrt(mpmath.pi / t) * total


def half_integer_kernel(a, b, theta, phi, t):
    """Trigonometric-polynomial heat kernel for a, b in {-1/2, 1/2} through image sums.

    Angles exactly at 0 are nudged inward by 1e-40 so that the prefactor
    division has a well-defined limit.
    """
    with mpmath.workdps(_DPS):
        th = mpmath.mpf(theta) if theta != 0 else _NUDGE
        ph = mpmath.mpf(phi) if phi != 0 else _NUDGE
        t = mpmath.mpf(t)
        k_max = int(mpmath.ceil(mpmath.sqrt(4 * t * 700) / (2 * mpmath.pi))) + 3
        half = a != b
        sign = -1 if a == 0.5 else 1
        value = (_wrapped(th - ph, t, half, k_max) + sign * _wrapped(th + ph, t, half, k_max)) / (2 * mpmath.pi)
        pref = ((mpmath.sin(th / 2) * mpmath.sin(ph / 2)) ** (a + 0.5)
                * (mpmath.cos(th / 2) * mpmath.cos(ph / 2)) ** (b + 0.5))
        return value / pref


def spectral_sum(a, b, x, y, t, n_terms):
    """sum_n exp(-t n(n+a+b+1)) P_n(x) P_n(y) / h_n at high precision."""
    with mpmath.workdps(60):
        a, b, x, y, t = map(mpmath.mpf, (a, b, x, y, t))
        total = mpmath.mpf(0)
        for n in range(n_terms):
            h = (2 ** (a + b + 1) / (2 * n + a + b + 1) * mpmath.gamma(n + a + 1) * mpmath.gamma(n + b + 1)
                 / (mpmath.gamma(n + a + b + 1) * mpmath.factorial(n))) if n or a + b != -1 else (
                2 ** (a + b + 1) * mpmath.gamma(a + 1) * mpmath.gamma(b + 1) / mpmath.gamma(a + b + 2))
            total += mpmath.exp(-t * n * (n + a + b + 1)) * mpmath.jacobi(n, a, b, x) * mpmath.jacobi(n, a, b, y) / h
        return total
