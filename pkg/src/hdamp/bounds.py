"""Closed-form high-energy bounds and a log-log scaling fitter.

Every logarithm of the energy goes through :func:`log_s`, i.e. ln s always
means ln(s / s_hat).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .amplitude import normalization_a1
from .specfun import DimensionSpec

PION_MASS_GEV = 0.13957
OPTIMAL_JENSEN_DELTA = math.exp(-2.0)


def pipi_s0(m_pi=PION_MASS_GEV):
    """Scale s0 for pi-pi scattering, from 1/s0 = 17 pi sqrt(pi/2) / m_pi^2."""
    return m_pi**2 / (17 * math.pi * math.sqrt(math.pi / 2))


@dataclass(frozen=True)
class BoundContext:
    """Free constants of the bounds, kept as explicit configuration."""

    N: float = 2.0
    T0: float = 1.0
    s_hat: float = 1.0
    C0: float = 1.0
    C4: float = 1.0
    C3_over_C2: float = 4.0
    t0_4d: float = 4 * PION_MASS_GEV**2
    eps: float = 0.0
    delta1_frac: float = 1e-3
    strict_lemma2: bool = False

    def __post_init__(self):
        for name in ("N", "T0", "s_hat", "C0", "C4", "C3_over_C2", "t0_4d", "delta1_frac"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"ctx.{name} must be a positive finite number, got {val!r}")
        if not 0 <= self.eps < self.t0_4d:
            raise ValueError(f"need 0 <= eps < t0_4d, got eps={self.eps}, t0_4d={self.t0_4d}")
        if self.C3_over_C2 <= 1:
            raise ValueError("C3 must exceed C2 (C3_over_C2 > 1)")

    @property
    def T1(self):
        return self.T0 * (1 - self.delta1_frac)

    @property
    def C2(self):
        if self.N <= 1:
            raise ValueError(f"C2 = T0 [e(N-1)]^-2 is undefined for N <= 1 (N={self.N})")
        return self.T0 / (math.e * (self.N - 1)) ** 2

    @property
    def C3(self):
        return self.C3_over_C2 * self.C2

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise KeyError(f"unknown context keys: {sorted(unknown)}")
        return cls(**data)


def c1_constant(lam):
    """C1 = 2 lam 2^(-2(lam+1)) Gamma(lam+1)."""
    return 2 * lam * 2.0 ** (-2 * (lam + 1)) * math.gamma(lam + 1)


def a2_constant(lam):
    """A2 = 2 lam A1 2^(-2 lam - 1) / Gamma(lam+1)^2."""
    return 2 * lam * normalization_a1(lam) * 2.0 ** (-2 * lam - 1) / math.gamma(lam + 1) ** 2


def log_s(s, ctx: BoundContext):
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return math.log(s / ctx.s_hat)


def _require_above_scale(s, ctx, strict=True):
    ok = s > ctx.s_hat if strict else s >= ctx.s_hat
    if not ok:
        raise ValueError(f"need s > s_hat (s={s}, s_hat={ctx.s_hat})")


def froissart_martin_4d(s, ctx: BoundContext, s0=None):
    """(4 pi / (t0 - eps)) [ln(s/s0)]^2, with s0 = s_hat unless given."""
    s0 = ctx.s_hat if s0 is None else s0
    if ctx.t0_4d <= ctx.eps:
        raise ValueError("t0 <= eps")
    if not s >= s0:
        raise ValueError(f"need s >= s0 (s={s}, s0={s0})")
    return 4 * math.pi / (ctx.t0_4d - ctx.eps) * math.log(s / s0) ** 2


def sigma_bound_D(s, dim: DimensionSpec, ctx: BoundContext):
    """C0 [ln s]^(D-2)."""
    _require_above_scale(s, ctx, strict=False)
    return ctx.C0 * log_s(s, ctx) ** (dim.D - 2)


def modulus_bound_exponent(t_abs, ctx: BoundContext):
    """Power of s in the modulus bound: 1 + (N-1) sqrt(|t|/T0), the same for every lambda."""
    return 1 + (ctx.N - 1) * math.sqrt(t_abs / ctx.T0)


def modulus_bound(s, t_abs, dim: DimensionSpec, ctx: BoundContext):
    """Upper bound on |F(s, t)| for 0 < |t| < T0.

    A2 |t|^(-(lam+1)/2) T0^(-lam/2) s^(1 + (N-1) sqrt(|t|/T0)) (ln s)^lam
    """
    if not 0 < t_abs < ctx.T0:
        raise ValueError(f"modulus bound holds for 0 < |t| < T0 (|t|={t_abs}, T0={ctx.T0})")
    _require_above_scale(s, ctx)
    lam = dim.lam
    return (a2_constant(lam) * t_abs ** (-(lam + 1) / 2) * ctx.T0 ** (-lam / 2)
            * (s / ctx.s_hat) ** modulus_bound_exponent(t_abs, ctx) * log_s(s, ctx) ** lam)


def jensen_count_bound(r, s, ctx: BoundContext, optimized=True, delta=None,
                       enforce_delta_range=True):
    """Upper bound on the number of zeros of F(s, .) in |t| < r.

    The delta-form is (N-1) sqrt(r/delta) / (ln(1/delta) sqrt(T0)) ln s,
    valid for r/T0 < delta < 1; minimising over delta (at delta = e^-2)
    gives e sqrt(r) / (2 sqrt(T0)) (N-1) ln s. With ``ctx.strict_lemma2``
    the optimised form drops the (N-1) factor.
    """
    if not 0 <= r <= ctx.T0:
        raise ValueError(f"need 0 <= r <= T0 (r={r}, T0={ctx.T0})")
    _require_above_scale(s, ctx)
    ls = log_s(s, ctx)
    if optimized:
        factor = 1.0 if ctx.strict_lemma2 else ctx.N - 1
        return math.e * math.sqrt(r) / (2 * math.sqrt(ctx.T0)) * ls * factor
    if delta is None:
        raise ValueError("the unoptimized form needs delta")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if enforce_delta_range and not r / ctx.T0 < delta:
        raise ValueError(f"delta must lie in (r/T0, 1) = ({r / ctx.T0}, 1), got {delta}")
    return (ctx.N - 1) * math.sqrt(r / delta) / (math.log(1 / delta) * math.sqrt(ctx.T0)) * ls


@dataclass(frozen=True)
class ZeroFreeRadius:
    r0_max: float
    annulus: tuple
    out_of_model: bool


def zero_free_radius(s, ctx: BoundContext) -> ZeroFreeRadius:
    """Zero-free disk radius C2/(ln s)^2 and the annulus (C2, C3)/(ln s)^2.

    ``out_of_model`` flags radii reaching T0, where the analyticity
    assumption no longer covers the disk (this is what N -> 1+ runs into).
    """
    _require_above_scale(s, ctx)
    ls2 = log_s(s, ctx) ** 2
    r0 = ctx.C2 / ls2
    return ZeroFreeRadius(r0, (r0, ctx.C3 / ls2), r0 >= ctx.T0)


def domain_halfwidth(u, s, ctx: BoundContext):
    """Half-width pi sqrt(u) / (2 C4 ln s) of the positivity domain at Re t = u."""
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    _require_above_scale(s, ctx)
    return math.pi * math.sqrt(u) / (2 * ctx.C4 * log_s(s, ctx))


def harnack_disk_radius(R0, r, s, ctx: BoundContext):
    """Radius pi r sqrt(R0) / (2 C4 ln s) of the inner Harnack disk around R0."""
    return r * domain_halfwidth(R0, s, ctx)


def harnack_interval(A_R0, r):
    """((1-r)/(1+r) A, (1+r)/(1-r) A) bracketing a positive harmonic function."""
    if not A_R0 > 0:
        raise ValueError(f"Harnack bounds need a positive centre value, got {A_R0}")
    if not 0 <= r < 1:
        raise ValueError(f"need 0 <= r < 1, got {r}")
    return (1 - r) / (1 + r) * A_R0, (1 + r) / (1 - r) * A_R0


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    residual: float


def scaling_exponent_fit(points, s_hat=1.0) -> ScalingFit:
    """Least-squares slope of ln(value) against ln(ln(s/s_hat)).

    ``residual`` is the RMS of the fit in ln(value).
    """
    pts = [(float(s), float(v)) for s, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    s_arr = np.array([p[0] for p in pts])
    v_arr = np.array([p[1] for p in pts])
    if np.any(v_arr <= 0):
        raise ValueError("all values must be positive")
    if np.any(s_arr <= s_hat):
        raise ValueError("all s must exceed s_hat")
    if len(np.unique(s_arr)) != len(s_arr):
        raise ValueError("s values must be distinct")
    X = np.log(np.log(s_arr / s_hat))
    Y = np.log(v_arr)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    return ScalingFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def log_slope(xs, ys):
    """Plain least-squares slope of ln(y) against x (e.g. x = ln s)."""
    slope, _ = np.polyfit(np.asarray(xs, float), np.log(np.asarray(ys, float)), 1)
    return float(slope)
