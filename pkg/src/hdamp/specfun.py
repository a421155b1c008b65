"""Gegenbauer (ultraspherical) polynomials C_l^lambda.

Evaluation by the three-term recurrence for real or complex arguments, a
log-scaled variant for the exponentially growing regime x > 1, a
high-precision hypergeometric series used as an independent oracle, zeros
on (-1, 1) expressed as angles, and the weighted orthogonality integral.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

L_MAX_DEFAULT = 10**6
SERIES_L_MAX = 200
ORTHO_L_MAX = 64

# renormalisation threshold of the scaled recurrence
_RESCALE = 2.0**512
_LOG_RESCALE = 512 * math.log(2.0)


class MagnitudeOverflow(OverflowError):
    """Raised when an unscaled Gegenbauer value leaves double range."""


@dataclass(frozen=True)
class DimensionSpec:
    """Spacetime dimension D and the Gegenbauer index lambda = (D - 3)/2."""

    D: int

    def __post_init__(self):
        if isinstance(self.D, bool) or int(self.D) != self.D:
            raise ValueError(f"D must be an integer, got {self.D!r}")
        if self.D < 4:
            raise ValueError(f"D must be >= 4, got {self.D}")
        object.__setattr__(self, "D", int(self.D))

    @property
    def lam(self) -> float:
        return 0.5 * (self.D - 3)

    @classmethod
    def from_lambda(cls, lam: float) -> "DimensionSpec":
        D = 2 * lam + 3
        if abs(D - round(D)) > 1e-12:
            raise ValueError(f"lambda={lam} does not correspond to an integer D")
        return cls(int(round(D)))


@dataclass(frozen=True)
class ScaledValue:
    """A number stored as natural log of its modulus plus a phase (or sign)."""

    log_magnitude: float
    phase_or_sign: float = 0.0

    @property
    def value(self) -> complex:
        return cmath.exp(complex(self.log_magnitude, self.phase_or_sign))

    def __float__(self) -> float:
        return math.exp(self.log_magnitude) * math.cos(self.phase_or_sign)


def _check_degree(l, l_max):
    if int(l) != l or l < 0:
        raise ValueError(f"degree must be a non-negative integer, got {l!r}")
    if l > l_max:
        raise ValueError(f"degree {l} exceeds configured maximum {l_max}")
    return int(l)


def _as_operand(x):
    """Python scalar for scalar input (fast loop), float/complex ndarray otherwise."""
    if np.ndim(x) == 0:
        x = complex(x) if np.iscomplexobj(x) else float(x)
        return x, True
    arr = np.asarray(x)
    return arr.astype(np.result_type(arr.dtype, np.float64)), False


def gegenbauer_eval(l, lam, x, l_max=L_MAX_DEFAULT):
    """Evaluate C_l^lam(x) with the forward three-term recurrence.

    ``x`` may be a real or complex scalar or array. Raises
    :class:`MagnitudeOverflow` if the result is not representable; use
    :func:`gegenbauer_eval_scaled` in that regime.
    """
    l = _check_degree(l, l_max)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    x, scalar = _as_operand(x)
    if l == 0:
        return 1.0 if scalar else np.ones_like(x)
    prev = 1.0
    cur = 2.0 * lam * x
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(2, l + 1):
            prev, cur = cur, (2.0 * (k + lam - 1.0) * x * cur - (k + 2.0 * lam - 2.0) * prev) / k
    if not np.all(np.isfinite(cur)):
        raise MagnitudeOverflow(
            f"magnitude overflow in C_{l}^{lam}, use gegenbauer_eval_scaled")
    return cur


def scaled_sequence(l_max, lam, x):
    """Yield ``(l, mantissa, log_scale)`` with C_l^lam(x) = mantissa * exp(log_scale).

    Works elementwise on arrays of real or complex ``x``. Whenever a value
    exceeds 2**512 in modulus, the running pair is divided by that modulus
    and its log accumulated, so ``log_scale`` is nondecreasing in ``l``.
    """
    x = np.asarray(x)
    x = x.astype(np.result_type(x.dtype, np.float64))
    log_scale = np.zeros(x.shape)
    prev = np.ones_like(x)
    yield 0, prev.copy(), log_scale.copy()
    if l_max == 0:
        return
    cur = 2.0 * lam * x
    yield 1, cur.copy(), log_scale.copy()
    for k in range(2, l_max + 1):
        prev, cur = cur, (2.0 * (k + lam - 1.0) * x * cur - (k + 2.0 * lam - 2.0) * prev) / k
        mag = np.abs(cur)
        big = mag > _RESCALE
        if np.any(big):
            norm = np.where(big, mag, 1.0)
            prev = prev / norm
            cur = cur / norm
            log_scale = log_scale + np.log(norm)
        yield k, cur, log_scale


def gegenbauer_eval_scaled(l, lam, x, l_max=L_MAX_DEFAULT) -> ScaledValue:
    """ln C_l^lam(x) for real x > 1, free of overflow.

    In this region every C_l^lam(x) is positive for lam > 0, so the phase
    field is always 0.
    """
    l = _check_degree(l, l_max)
    if np.iscomplexobj(x) or not x > 1.0:
        raise ValueError(f"gegenbauer_eval_scaled needs real x > 1, got {x!r}; "
                         "use gegenbauer_eval in the oscillatory region")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    x = float(x)
    if l == 0:
        return ScaledValue(0.0, 0.0)
    log_scale = 0.0
    prev, cur = 1.0, 2.0 * lam * x
    for k in range(2, l + 1):
        prev, cur = cur, (2.0 * (k + lam - 1.0) * x * cur - (k + 2.0 * lam - 2.0) * prev) / k
        if cur > _RESCALE:
            prev /= cur
            log_scale += math.log(cur)
            cur = 1.0
    return ScaledValue(log_scale + math.log(cur), 0.0)


@lru_cache(maxsize=512)
def _series_coefficients_mp(l, lam, dps):
    with mpmath.workdps(dps):
        lam_mp = mpmath.mpf(lam)
        front = mpmath.loggamma(lam_mp + 0.5) - mpmath.loggamma(2 * lam_mp)
        return tuple(
            mpmath.exp(front + mpmath.loggamma(2 * lam_mp + l + k)
                       - mpmath.loggamma(k + 1) - mpmath.loggamma(l - k + 1)
                       - mpmath.loggamma(lam_mp + k + 0.5))
            for k in range(l + 1))


@lru_cache(maxsize=512)
def _series_log10(l, lam):
    return np.array([float(mpmath.log10(b)) for b in _series_coefficients_mp(l, lam, 30)])


def series_coefficients(l, lam):
    """Coefficients b_k of (-z)^k in the hypergeometric expansion of C_l^lam."""
    l = _check_degree(l, SERIES_L_MAX)
    return np.array([float(b) for b in _series_coefficients_mp(l, float(lam), 30)])


def gegenbauer_series(l, lam, z):
    """Evaluate C_l^lam(1 - 2z) from its finite hypergeometric series in ``z``.

    C_l^lam(x) = Gamma(lam+1/2)/Gamma(2lam)
                 * sum_k Gamma(2lam+l+k) / (k! (l-k)! Gamma(lam+k+1/2)) (-z)^k,
    with z = (1 - x)/2. The sum alternates for x < 1 and cancels badly, so it
    is carried out in mpmath with enough digits to cover the largest term.
    Intended as an independent oracle, hence the cap l <= 200.
    """
    l = _check_degree(l, SERIES_L_MAX)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    lam = float(lam)
    if np.ndim(z) > 0:
        arr = np.asarray(z)
        out = [gegenbauer_series(l, lam, zi) for zi in arr.ravel()]
        return np.array(out).reshape(arr.shape)
    is_complex = np.iscomplexobj(z)
    zc = complex(z)
    # digits needed: largest term magnitude plus 30 guard digits
    logs = _series_log10(l, lam)
    az = abs(zc)
    peak = logs[0] if az == 0 else max(logs + np.arange(l + 1) * math.log10(az))
    dps = 30 + 10 * math.ceil(max(peak, 0.0) / 10)
    coeffs = _series_coefficients_mp(l, lam, dps)
    with mpmath.workdps(dps):
        w = -mpmath.mpc(zc.real, zc.imag) if is_complex else -mpmath.mpf(zc.real)
        acc = mpmath.mpf(0)
        for b in reversed(coeffs):
            acc = acc * w + b
        return complex(acc) if is_complex else float(acc)


def gegenbauer_at_one(l, lam):
    """C_l^lam(1) = Gamma(l + 2lam) / (Gamma(2lam) l!) via log-Gamma."""
    return math.exp(math.lgamma(l + 2 * lam) - math.lgamma(2 * lam) - math.lgamma(l + 1))


def gegenbauer_norm(n, lam):
    """Closed-form weighted norm of C_n^lam on [-1, 1]."""
    return math.pi * math.exp(
        (1 - 2 * lam) * math.log(2) + math.lgamma(n + 2 * lam)
        - math.lgamma(n + 1) - 2 * math.lgamma(lam)) / (n + lam)


def _derivative(l, lam, x):
    # d/dx C_l^lam = 2 lam C_{l-1}^{lam+1}
    if l == 0:
        return 0.0 * x
    return 2.0 * lam * gegenbauer_eval(l - 1, lam + 1.0, x)


def gegenbauer_zero_angles(l, lam):
    """Angles theta_1 < ... < theta_l in (0, pi) with C_l^lam(cos theta) = 0.

    Sign changes are bracketed on a Chebyshev-angle grid of 8l points and
    each bracket refined by Newton in theta, falling back to bisection
    whenever a step leaves the bracket.
    """
    l = _check_degree(l, L_MAX_DEFAULT)
    if l < 1:
        raise ValueError("need l >= 1")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    n_grid = 8 * l
    while True:
        theta = (np.arange(n_grid) + 0.5) * np.pi / n_grid
        vals = gegenbauer_eval(l, lam, np.cos(theta))
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if len(idx) == l:
            break
        n_grid *= 2
        if n_grid > 256 * l:
            raise RuntimeError(f"could not bracket all {l} zeros of C_{l}^{lam}")
    roots = []
    for i in idx:
        roots.append(_refine_angle(l, lam, theta[i], theta[i + 1], vals[i]))
    return np.array(roots)


def _refine_angle(l, lam, a, b, fa):
    def g(th):
        return gegenbauer_eval(l, lam, math.cos(th))

    th = 0.5 * (a + b)
    for _ in range(200):
        gt = g(th)
        if gt == 0.0:
            return th
        if np.sign(gt) == np.sign(fa):
            a, fa = th, gt
        else:
            b = th
        if b - a < 1e-13:
            break
        dg = -math.sin(th) * _derivative(l, lam, math.cos(th))
        step = gt / dg if dg != 0.0 else math.inf
        new = th - step
        if not a < new < b:
            new = 0.5 * (a + b)
        elif abs(step) < 1e-16:
            return new
        th = new
    return 0.5 * (a + b)


def orthogonality_integral(m, n, lam):
    """Weighted inner product of C_m^lam and C_n^lam on [-1, 1].

    The weight is (1 - x^2)^(lam - 1/2). The substitution x = cos(theta)
    turns it into sin(theta)^(2 lam), which removes the endpoint
    singularity of the weight for lam < 1.
    """
    m = _check_degree(m, ORTHO_L_MAX)
    n = _check_degree(n, ORTHO_L_MAX)
    if lam < 0.5:
        raise ValueError(f"lambda < 1/2 is unsupported, got {lam}")

    def integrand(th):
        c = math.cos(th)
        return gegenbauer_eval(m, lam, c) * gegenbauer_eval(n, lam, c) * math.sin(th) ** (2 * lam)

    # off-diagonal values are zero, so the absolute floor sets the accuracy;
    # tie it to the norms so large-lambda integrals are not over-resolved
    scale = math.sqrt(gegenbauer_norm(m, lam) * gegenbauer_norm(n, lam))
    with warnings.catch_warnings():
        # roundoff warnings are expected once the result sits at the floor
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-13 * scale, epsrel=1e-13, limit=400)
    return val
