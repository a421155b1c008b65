"""Partial-wave sets, model construction and evaluation of F(s, t).

The amplitude in D dimensions is

    F(s, t) = A1 s^(1/2 - lam) sum_l (l + lam) f_l C_l^lam(1 + 2t/s),

with A1 = 2^(4 lam + 3) pi^lam Gamma(lam). ``s`` is always the
dimensionless ratio s / s_hat.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import DimensionSpec, scaled_sequence

_MAX_LOG = math.log(np.finfo(float).max)


class AmplitudeOverflow(OverflowError):
    """The amplitude is not representable as a double even after log-domain summation."""

    def __init__(self, message, l=None):
        super().__init__(message)
        self.l = l


def normalization_a1(lam):
    """A1 = 2^(4 lam + 3) pi^lam Gamma(lam)."""
    return 2.0 ** (4 * lam + 3) * math.pi**lam * math.gamma(lam)


def truncation_order(s, N, T0):
    """Truncation order L = (N - 1)/2 sqrt(s/T0) ln s and its integer ceiling."""
    if not s > 1:
        raise ValueError(f"truncation order needs s > 1 (ln s > 0), got s={s}")
    if not N >= 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not T0 > 0:
        raise ValueError(f"T0 must be positive, got {T0}")
    L = 0.5 * (N - 1) * math.sqrt(s / T0) * math.log(s)
    return L, math.ceil(L)


@dataclass(frozen=True)
class Kinematics:
    s: float
    t: complex

    @property
    def x(self) -> complex:
        return 1 + 2 * self.t / self.s

    @property
    def u(self) -> float:
        return complex(self.t).real

    @property
    def v(self) -> float:
        return complex(self.t).imag


@dataclass(frozen=True, eq=False)
class PartialWaveSet:
    """Energy s (in units of s_hat) plus the complex waves f_0 .. f_L."""

    dim: DimensionSpec
    s: float
    waves: np.ndarray
    unitary: bool = False

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"s must be positive, got {self.s}")
        w = np.array(self.waves, dtype=complex).ravel()
        if w.size == 0:
            raise ValueError("a partial-wave set needs at least one wave")
        if not np.all(np.isfinite(w)):
            raise ValueError("partial waves must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "waves", w)
        if self.unitary and not unitarity_report(self).passed:
            raise ValueError("waves flagged unitary violate 0 <= |f|^2 <= Im f <= 1")

    @property
    def lam(self) -> float:
        return self.dim.lam

    @property
    def L(self) -> int:
        return len(self.waves) - 1

    def to_json(self) -> dict:
        return {"D": self.dim.D, "s": self.s,
                "waves": [[float(w.real), float(w.imag)] for w in self.waves]}

    @classmethod
    def from_json(cls, data) -> "PartialWaveSet":
        if isinstance(data, str):
            data = json.loads(data)
        waves = [complex(re, im) for re, im in data["waves"]]
        pw = cls(DimensionSpec(int(data["D"])), float(data["s"]), waves)
        if unitarity_report(pw).passed:
            pw = cls(pw.dim, pw.s, pw.waves, unitary=True)
        return pw


class ModelKind(str, enum.Enum):
    gray_disk = "gray_disk"
    exponential_tail = "exponential_tail"
    custom_list = "custom_list"


@dataclass(frozen=True)
class ModelSpec:
    """Recipe for a unitarity-respecting partial-wave set.

    gray_disk uses ``L``; exponential_tail uses ``g``, ``L_eff`` and
    optionally ``L_max`` (default ceil(40 L_eff)); custom_list uses ``waves``.
    """

    kind: ModelKind
    L: int | None = None
    g: float | None = None
    L_eff: float | None = None
    L_max: int | None = None
    waves: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))


def build_model(spec: ModelSpec, s, dim: DimensionSpec) -> PartialWaveSet:
    if spec.kind is ModelKind.gray_disk:
        if spec.L is None or int(spec.L) != spec.L or spec.L < 0:
            raise ValueError(f"gray_disk needs a non-negative integer cutoff L, got {spec.L}")
        waves = np.full(int(spec.L) + 1, 1j)
    elif spec.kind is ModelKind.exponential_tail:
        g, L_eff = spec.g, spec.L_eff
        if g is None or not 0 < g <= 1:
            raise ValueError(f"exponential_tail needs 0 < g <= 1 (unitarity), got g={g}")
        if L_eff is None or not L_eff > 0:
            raise ValueError(f"exponential_tail needs L_eff > 0, got {L_eff}")
        L_max = spec.L_max if spec.L_max is not None else math.ceil(40 * L_eff)
        waves = 1j * g * np.exp(-np.arange(L_max + 1) / L_eff)
    else:
        waves = np.asarray(spec.waves, dtype=complex)
        pw = PartialWaveSet(dim, s, waves)
        report = unitarity_report(pw)
        if not report.passed:
            raise ValueError(f"custom waves violate unitarity at l={[v[0] for v in report.violations]}")
    return PartialWaveSet(dim, s, waves, unitary=True)


def _weighted_sum(pw: PartialWaveSet, t, coeffs):
    """A1 s^(1/2-lam) sum_l (l+lam) coeffs_l C_l(1+2t/s), summed in the log domain."""
    t_arr = np.asarray(t)
    x = 1 + 2 * t_arr.astype(complex) / pw.s
    lam = pw.lam
    acc = np.zeros(x.shape, dtype=complex)
    cur_log = np.zeros(x.shape)
    for l, mant, log_scale in scaled_sequence(pw.L, lam, x):
        shift = log_scale - cur_log
        if np.any(shift):
            acc = acc * np.exp(-shift)
            cur_log = log_scale
        c = coeffs[l]
        if c != 0:
            acc = acc + (l + lam) * c * mant
    log_front = math.log(normalization_a1(lam)) + (0.5 - lam) * math.log(pw.s)
    mag = np.abs(acc)
    with np.errstate(divide="ignore"):
        total_log = cur_log + log_front + np.log(mag)
    if np.any(total_log > _MAX_LOG):
        raise AmplitudeOverflow(
            f"amplitude overflows double range (log|F| = {np.max(total_log):.1f})", l=pw.L)
    out = acc * np.exp(cur_log + log_front)
    return out if out.ndim else complex(out)


def eval_amplitude(pw: PartialWaveSet, t):
    """F(s, t) at real or complex t (scalar or array)."""
    return _weighted_sum(pw, t, pw.waves)


def absorptive_eval(pw: PartialWaveSet, t):
    """A(s, t): the expansion rebuilt from Im f_l only, continued to complex t.

    Real t gives a real result.
    """
    out = _weighted_sum(pw, t, pw.waves.imag)
    if np.iscomplexobj(t):
        return out
    return np.real(out) if np.ndim(out) else float(out.real)


def total_cross_section(pw: PartialWaveSet) -> float:
    """sigma_t = A(s, 0)/s, from Im F(s, 0) = s sigma_t."""
    return float(np.real(absorptive_eval(pw, 0.0))) / pw.s


def majorant(pw: PartialWaveSet, t_abs):
    """A1 s^(1/2-lam) sum (l+lam)|f_l| C_l(1+2|t|/s), an upper bound on |F(s, t)|."""
    return np.real(_weighted_sum(pw, np.abs(np.asarray(t_abs, dtype=complex)), np.abs(pw.waves)))


@dataclass(frozen=True)
class UnitarityReport:
    passed: bool
    violations: list

    def __bool__(self):
        return self.passed


def unitarity_report(pw: PartialWaveSet, atol=0.0) -> UnitarityReport:
    """Check 0 <= |f_l|^2 <= Im f_l <= 1 wave by wave."""
    sq = np.abs(pw.waves) ** 2
    im = pw.waves.imag
    bad = (sq > im + atol) | (im > 1 + atol)
    violations = [(int(l), float(sq[l]), float(im[l])) for l in np.nonzero(bad)[0]]
    return UnitarityReport(not violations, violations)
