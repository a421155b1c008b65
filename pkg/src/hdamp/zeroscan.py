"""Zero counting and location for functions analytic in a complex-t disk.

Counting uses the argument principle on sampled contours; location uses
recursive quadrisection of the disk's bounding box followed by damped
Newton. The amplitude-specific entry points (:func:`zero_census`,
:func:`check_jensen`) and the positivity checks on the absorptive part
(Harnack disk, domain of positivity) build on these.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .amplitude import PartialWaveSet, absorptive_eval, eval_amplitude, majorant
from .bounds import (OPTIMAL_JENSEN_DELTA, BoundContext, domain_halfwidth,
                     harnack_disk_radius, harnack_interval, jensen_count_bound)

MAX_SAMPLES = 2**20
CENSUS_SAMPLES = 256
BOX_SAMPLES = 64
MAX_DEPTH = 40
_EPS = np.finfo(float).eps
# split positions tried in turn when a cut runs too close to a zero
_SPLITS = (0.5, 0.4637, 0.5362, 0.4219, 0.5781, 0.3907)


class ZeroOnContour(RuntimeError):
    def __init__(self, message, arc=None):
        super().__init__(message)
        self.arc = arc


class WindingNotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class Contour:
    """Closed, positively oriented contour: a circle or an axis-aligned rectangle."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    lo: complex = 0j
    hi: complex = 0j
    samples: int = 64

    def __post_init__(self):
        if self.kind not in ("circle", "rectangle"):
            raise ValueError(f"unknown contour kind {self.kind!r}")
        n = self.samples
        if n < 64 or n & (n - 1):
            raise ValueError(f"samples must be a power of two >= 64, got {n}")
        if self.kind == "circle" and not self.radius > 0:
            raise ValueError("circle radius must be positive")
        if self.kind == "rectangle" and not (self.hi.real > self.lo.real and self.hi.imag > self.lo.imag):
            raise ValueError("rectangle needs lo strictly below-left of hi")

    @classmethod
    def circle(cls, center, radius, samples=64):
        return cls("circle", center=complex(center), radius=float(radius), samples=samples)

    @classmethod
    def rectangle(cls, lo, hi, samples=64):
        return cls("rectangle", lo=complex(lo), hi=complex(hi), samples=samples)

    def points(self, n):
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)
        # n/4 points per side starting at each corner, so the sampled
        # polygon is the rectangle itself (no clipped corners)
        q = n // 4
        f = np.arange(q) / q
        lo, hi = self.lo, self.hi
        lr, ul = complex(hi.real, lo.imag), complex(lo.real, hi.imag)
        return np.concatenate([lo + (lr - lo) * f, lr + (hi - lr) * f,
                               hi + (ul - hi) * f, ul + (lo - ul) * f])


def winding_number(f, contour: Contour, noise=None, max_samples=MAX_SAMPLES):
    """Number of zeros of ``f`` inside ``contour``, counted with multiplicity.

    ``f`` must accept an array of complex points. Phase increments are
    summed on the principal branch; the sample count doubles until every
    increment is below pi/2, consecutive values differ by less than the
    smaller of their moduli, and the count agrees across one doubling.
    ``noise`` is the absolute evaluation noise of ``f``; the default is
    1e-14 of the largest sampled modulus.
    """
    n = contour.samples
    previous = None
    while n <= max_samples:
        z = contour.points(n)
        w = np.asarray(f(z), dtype=complex)
        mag = np.abs(w)
        level = noise if noise is not None else 1e-14 * mag.max()
        k = int(np.argmin(mag))
        if not mag[k] > 1e3 * level:
            raise ZeroOnContour(
                f"|f| = {mag[k]:.3g} near contour point {z[k]:.6g} is at the noise level",
                arc=(z[k - 1], z[(k + 1) % n]))
        nxt = np.roll(w, -1)
        dphi = np.angle(nxt / w)
        # The chord test also rejects increments that look small only because
        # the true turn wrapped past 2 pi (a multiple zero close to the path).
        chord = np.abs(nxt - w) / np.minimum(mag, np.abs(nxt))
        if np.max(np.abs(dphi)) < np.pi / 2 and np.max(chord) < 1.0:
            count = int(round(dphi.sum() / (2 * np.pi)))
            if count == previous:
                return count
            previous = count
        else:
            previous = None
        n *= 2
    raise WindingNotConverged(f"winding number not stable after {max_samples} samples")


@dataclass
class Zero:
    location: complex
    residual: float
    multiplicity: int = 1
    converged: bool = True


@dataclass
class ZeroCensus:
    disk_radius: float
    winding_count: int
    zeros: list = field(default_factory=list)
    jensen_rhs: float = math.nan
    min_modulus_on_contour: float = math.nan
    center: complex = 0j
    unresolved: list = field(default_factory=list)

    @property
    def located(self):
        return sum(z.multiplicity for z in self.zeros)

    @property
    def complete(self):
        return self.located == self.winding_count and not self.unresolved

    def to_json(self):
        return {
            "disk_radius": self.disk_radius,
            "winding_count": self.winding_count,
            "zeros": [[z.location.real, z.location.imag, z.residual] for z in self.zeros],
            "multiplicities": [z.multiplicity for z in self.zeros],
            "jensen_rhs": self.jensen_rhs,
            "min_modulus_on_contour": self.min_modulus_on_contour,
            "center": [self.center.real, self.center.imag],
            "unresolved": [[b[0].real, b[0].imag, b[1].real, b[1].imag, b[2]] for b in self.unresolved],
        }


def newton_refine(f, z0, radius, scale, max_iter=100):
    """Damped Newton with a centred finite-difference derivative.

    Returns ``(z, residual, converged)`` with residual = |f(z)| / scale.
    """
    z = complex(z0)
    fz = complex(f(np.array([z]))[0])
    converged = False
    for _ in range(max_iter):
        if fz == 0:
            converged = True
            break
        h = 1e-6 * max(abs(z), radius * 1e-3)
        vals = f(np.array([z + h, z - h]))
        d = (vals[0] - vals[1]) / (2 * h)
        if d == 0 or not np.isfinite(d):
            break
        step = fz / d
        damp = 1.0
        while True:
            z_new = z - damp * step
            f_new = complex(f(np.array([z_new]))[0])
            if abs(f_new) < abs(fz):
                break
            if damp < 1e-4:
                # No descent left. For analytic f a local minimum of |f| is a
                # zero, so this is the rounding floor near one (slow steps
                # near multiple zeros end here too).
                res = abs(fz) / scale
                return z, res, abs(step) <= 1e-8 * max(abs(z), radius) or res <= 1e-8
            damp *= 0.5
        moved = abs(z_new - z)
        z, fz = z_new, f_new
        if moved <= 64 * _EPS * max(abs(z), radius):
            converged = True
            break
    return z, abs(fz) / scale, converged


def _sub_boxes(lo, hi, ratio):
    xm = lo.real + ratio * (hi.real - lo.real)
    ym = lo.imag + ratio * (hi.imag - lo.imag)
    return [
        (complex(lo.real, lo.imag), complex(xm, ym)),
        (complex(xm, lo.imag), complex(hi.real, ym)),
        (complex(lo.real, ym), complex(xm, hi.imag)),
        (complex(xm, ym), complex(hi.real, hi.imag)),
    ]


def _split(f, lo, hi, count, noise):
    for ratio in _SPLITS:
        try:
            boxes = [(a, b, winding_number(f, Contour.rectangle(a, b, BOX_SAMPLES), noise))
                     for a, b in _sub_boxes(lo, hi, ratio)]
        except ZeroOnContour:
            continue
        if sum(b[2] for b in boxes) == count:
            return boxes
    return None


def _deflated_zeros(f, lo, hi, count, radius, scale):
    """Find ``count`` zeros in the box by Newton with successive deflation
    f(z) / prod(z - z_k). Returns a list of Zero or None on failure."""
    mid = 0.5 * (lo + hi)
    w, h = hi.real - lo.real, hi.imag - lo.imag
    starts = [mid] + [mid + 0.25 * complex(a * w, b * h) for a in (-1, 1) for b in (-1, 1)]
    pad = 1e-3 * max(w, h)
    found, outside = [], []
    # zeros that Newton reaches just outside the box are divided out as
    # well (up to a few), so they stop attracting the remaining starts
    while len(found) < count and len(outside) <= 4:
        known = tuple(found + outside)

        def g(z, known=known):
            z = np.asarray(z, dtype=complex)
            out = np.asarray(f(z), dtype=complex)
            for r in known:
                out = out / (z - r)
            return out
        for z0 in starts:
            if any(z0 == r for r in known):
                continue
            z, _, ok = newton_refine(g, z0, radius, scale)
            if not ok:
                continue
            if lo.real - pad <= z.real <= hi.real + pad and lo.imag - pad <= z.imag <= hi.imag + pad:
                found.append(z)
            else:
                outside.append(z)
            break
        else:
            return None
    if len(found) < count:
        return None
    # zeros closer than the resolution are one cluster
    tol = 1e-6 * radius
    groups = []
    for z in found:
        for grp in groups:
            if abs(z - np.mean(grp)) < tol:
                grp.append(z)
                break
        else:
            groups.append([z])
    out = []
    for grp in groups:
        loc = complex(np.mean(grp))
        out.append(Zero(loc, abs(complex(f(np.array([loc]))[0])) / scale, len(grp), True))
    return out


def _close_box(f, lo, hi, count, radius, scale, zeros, unresolved):
    # A box the winding test cannot split any further. Deflated Newton
    # usually separates what is inside (close pairs, multiple zeros); failing
    # that, a tiny box is a cluster located at its centre, anything larger
    # is reported unresolved.
    found = _deflated_zeros(f, lo, hi, count, radius, scale)
    if found is not None:
        zeros.extend(found)
        return
    size = max(hi.real - lo.real, hi.imag - lo.imag)
    if size < 1e-6 * radius:
        mid = 0.5 * (lo + hi)
        zeros.append(Zero(mid, abs(complex(f(np.array([mid]))[0])) / scale, count, True))
    else:
        unresolved.append((lo, hi, count))


def locate_zeros(f, center, radius, noise=None, scale=None):
    """Isolate and refine the zeros of ``f`` in the disk |t - center| < radius.

    Returns ``(zeros, unresolved)``; zeros are sorted by real then
    imaginary part, unresolved boxes are ``(lo, hi, count)`` triples.
    """
    center = complex(center)
    if scale is None:
        scale = float(np.max(np.abs(f(Contour.circle(center, radius).points(CENSUS_SAMPLES)))))
    half = radius * 1.0137
    lo0, hi0 = center - half * (1 + 1j), center + half * (1 + 1j)
    count0 = winding_number(f, Contour.rectangle(lo0, hi0, CENSUS_SAMPLES), noise)
    zeros, unresolved = [], []
    stack = [(lo0, hi0, count0, 0)]
    min_size = 1e-12 * radius
    while stack:
        lo, hi, count, depth = stack.pop()
        if count == 0:
            continue
        size = max(hi.real - lo.real, hi.imag - lo.imag)
        if count == 1 or size < min_size or depth >= MAX_DEPTH:
            z, res, ok = newton_refine(f, 0.5 * (lo + hi), radius, scale)
            pad = 1e-9 * size + 4 * _EPS * abs(z)
            inside = (lo.real - pad <= z.real <= hi.real + pad and lo.imag - pad <= z.imag <= hi.imag + pad)
            if ok and inside:
                zeros.append(Zero(z, res, count, True))
                continue
            if size < min_size or depth >= MAX_DEPTH:
                _close_box(f, lo, hi, count, radius, scale, zeros, unresolved)
                continue
        boxes = _split(f, lo, hi, count, noise)
        if boxes is None:
            _close_box(f, lo, hi, count, radius, scale, zeros, unresolved)
            continue
        stack.extend((a, b, c, depth + 1) for a, b, c in boxes)
    inside = [z for z in zeros if abs(z.location - center) < radius]
    inside.sort(key=lambda z: (z.location.real, z.location.imag))
    return inside, unresolved


def jensen_rhs_numeric(f, r, f0, delta=OPTIMAL_JENSEN_DELTA, samples=4096):
    """(1/ln(1/delta)) ln(max_{|t|=r/delta} |f| / |f(0)|), the max found by
    dense sampling followed by a local 1-d refinement."""
    R = r / delta
    theta = 2 * np.pi * np.arange(samples) / samples
    mod = np.abs(f(R * np.exp(1j * theta)))
    k = int(np.argmax(mod))
    step = 2 * np.pi / samples

    def neg(th):
        return -abs(f(np.array([R * np.exp(1j * th)]))[0])

    res = optimize.minimize_scalar(neg, bounds=(theta[k] - step, theta[k] + step),
                                   method="bounded", options={"xatol": 1e-12})
    peak = max(mod[k], -res.fun)
    return math.log(peak / abs(f0)) / math.log(1 / delta)


def _amplitude_fn(pw):
    return lambda t: np.atleast_1d(eval_amplitude(pw, t))


def _amplitude_noise(pw, radius):
    return 16 * _EPS * float(majorant(pw, radius))


def zero_census(pw: PartialWaveSet, radius, ctx: BoundContext, samples=CENSUS_SAMPLES,
                locate=True) -> ZeroCensus:
    """Count, locate and Jensen-bound the zeros of F(s, .) in |t| < radius."""
    if not 0 < radius < ctx.T0:
        raise ValueError(f"census radius must satisfy 0 < r < T0 (r={radius}, T0={ctx.T0})")
    f = _amplitude_fn(pw)
    f0 = complex(eval_amplitude(pw, 0.0))
    if f0 == 0:
        raise ValueError("F(s, 0) = 0: Jensen's theorem needs a nonzero forward amplitude")
    noise = _amplitude_noise(pw, radius)
    contour = Contour.circle(0, radius, samples)
    count = winding_number(f, contour, noise)
    on_contour = np.abs(f(contour.points(samples)))
    census = ZeroCensus(radius, count, min_modulus_on_contour=float(on_contour.min()))
    census.jensen_rhs = jensen_rhs_numeric(f, radius, f0)
    if locate and count:
        census.zeros, census.unresolved = locate_zeros(
            f, 0, radius, noise=_amplitude_noise(pw, radius * 1.5), scale=float(on_contour.max()))
    return census


@dataclass(frozen=True)
class JensenCheck:
    holds: bool
    count: int
    rhs_numeric: float
    rhs_lemma2: float


def check_jensen(pw: PartialWaveSet, radius, ctx: BoundContext) -> JensenCheck:
    census = zero_census(pw, radius, ctx, locate=False)
    s_abs = pw.s * ctx.s_hat
    try:
        closed = jensen_count_bound(radius, s_abs, ctx)
    except ValueError:
        closed = math.nan
    return JensenCheck(census.winding_count <= census.jensen_rhs, census.winding_count,
                       census.jensen_rhs, closed)


def measured_zero_free_radius(pw: PartialWaveSet, start, max_radius, growth=2.0):
    """Modulus of the zero of F(s, .) nearest t = 0, searched in growing disks."""
    f = _amplitude_fn(pw)
    r = start
    while r <= max_radius:
        noise = _amplitude_noise(pw, r)
        if winding_number(f, Contour.circle(0, r, CENSUS_SAMPLES), noise) > 0:
            zeros, _ = locate_zeros(f, 0, r, noise=_amplitude_noise(pw, 1.5 * r))
            if zeros:
                return min(abs(z.location) for z in zeros)
        r *= growth
    return math.inf


@dataclass(frozen=True)
class HarnackCheck:
    R0: float
    r: float
    disk_radius: float
    A_R0: float
    interval: tuple
    samples: np.ndarray
    re_A: np.ndarray

    @property
    def inside(self):
        lo, hi = self.interval
        return (self.re_A > lo) & (self.re_A < hi)

    @property
    def passed(self):
        return bool(np.all(self.inside))


def harnack_check(pw: PartialWaveSet, R0, r, ctx: BoundContext, n_samples, rng) -> HarnackCheck:
    """Sample t uniformly in |t - R0| < pi r sqrt(R0)/(2 C4 ln s) and compare
    Re A(s, t) with the Harnack interval around A(s, R0)."""
    rho = harnack_disk_radius(R0, r, pw.s * ctx.s_hat, ctx)
    u = rng.random(n_samples)
    phi = rng.random(n_samples)
    t = R0 + rho * np.sqrt(u) * np.exp(2j * np.pi * phi)
    a0 = float(np.real(absorptive_eval(pw, R0)))
    re_a = np.real(absorptive_eval(pw, t))
    return HarnackCheck(R0, r, rho, a0, harnack_interval(a0, r), t, re_a)


def domain_grid(pw, ctx, u_values, n_v=9):
    """Points u + iv with |v| <= domain_halfwidth(u) on a coarse grid."""
    s_abs = pw.s * ctx.s_hat
    pts = []
    for u in u_values:
        hw = domain_halfwidth(u, s_abs, ctx)
        pts.extend(u + 1j * hw * np.linspace(-1, 1, n_v))
    return np.array(pts)


def domain_min_re_absorptive(pw, ctx, u_values, n_v=9):
    return float(np.min(np.real(absorptive_eval(pw, domain_grid(pw, ctx, u_values, n_v)))))


def calibrate_c4(pw: PartialWaveSet, ctx: BoundContext, u_values):
    """Smallest C4 whose domain half-widths stay below the first sign change
    of Re A(s, u + iv) on every vertical line Re t = u in ``u_values``."""
    ls = math.log(pw.s)
    need = 0.0
    for u in u_values:
        v_max = math.pi * math.sqrt(u) / (2 * ls)
        v_star = math.inf
        while v_max < 1e3 * (1 + u):
            v_star = first_sign_change_v(pw, u, v_max)
            if math.isfinite(v_star):
                break
            v_max *= 2
        if math.isfinite(v_star):
            need = max(need, math.pi * math.sqrt(u) / (2 * ls * v_star))
    if need == 0.0:
        raise ValueError("Re A has no sign change near the real axis; C4 is unconstrained")
    # nudge past the boundary itself, where Re A = 0
    return need * (1 + 1e-9)


def first_sign_change_v(pw: PartialWaveSet, u, v_max, n=400):
    """Smallest v > 0 where Re A(s, u + iv) changes sign, or inf if none below v_max."""
    v = np.linspace(0, v_max, n + 1)
    re = np.real(absorptive_eval(pw, u + 1j * v))
    idx = np.nonzero(np.sign(re[:-1]) != np.sign(re[1:]))[0]
    if not len(idx):
        return math.inf
    i = idx[0]
    g = lambda vv: float(np.real(absorptive_eval(pw, u + 1j * vv)))
    return optimize.brentq(g, v[i], v[i + 1], xtol=1e-14)
