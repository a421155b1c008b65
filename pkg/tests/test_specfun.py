import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from conftest import gegenbauer_mp, legendre_oracle, oscillation_envelope, value_at_one
from hdamp.specfun import (DimensionSpec, MagnitudeOverflow, ScaledValue, gegenbauer_at_one,
                           gegenbauer_eval, gegenbauer_eval_scaled, gegenbauer_norm,
                           gegenbauer_series, gegenbauer_zero_angles, orthogonality_integral,
                           scaled_sequence, series_coefficients)

LAMS = (0.5, 1.0, 1.5, 2.0)


# --- DimensionSpec / ScaledValue -------------------------------------------

def test_dimension_lambda():
    assert DimensionSpec(4).lam == 0.5
    assert DimensionSpec(7).lam == 2.0
    assert DimensionSpec.from_lambda(0.5).D == 4


@pytest.mark.parametrize("D", [3, 0, 4.5, True])
def test_dimension_rejects(D):
    with pytest.raises(ValueError):
        DimensionSpec(D)


@given(st.floats(-50, 50), st.sampled_from([0.0, math.pi]))
def test_scaled_value_reconstruction(logm, phase):
    sv = ScaledValue(logm, phase)
    expect = math.exp(logm) * (1 if phase == 0 else -1)
    assert abs(sv.value - expect) <= 1e-12 * abs(expect)
    assert abs(float(sv) - expect) <= 1e-12 * abs(expect)


# --- gegenbauer_eval -------------------------------------------------------

def test_eval_examples():
    assert gegenbauer_eval(0, 1, 0.7) == 1.0
    assert gegenbauer_eval(1, 1, 0.5) == 1.0
    # l=2, lam=1, x=1 from the series oracle and the closed value at 1
    assert gegenbauer_eval(2, 1, 1.0) == pytest.approx(gegenbauer_series(2, 1, 0.0), rel=1e-14)
    assert gegenbauer_eval(2, 1, 1.0) == pytest.approx(3.0, rel=1e-14)
    x = 1.0
    assert gegenbauer_eval(3, 0.5, x) == pytest.approx((5 * x**3 - 3 * x) / 2, rel=1e-14)


def test_eval_array_and_complex():
    x = np.array([0.1, 0.5 + 0.3j, -2.0])
    got = gegenbauer_eval(7, 1.5, x)
    for xi, g in zip(x, got):
        assert g == pytest.approx(gegenbauer_series(7, 1.5, (1 - xi) / 2), rel=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_eval_matches_scipy(lam):
    x = np.linspace(-1, 1, 41)
    for l in (0, 1, 5, 17, 40):
        ref = special.eval_gegenbauer(l, lam, x)
        dc = 2 * lam * special.eval_gegenbauer(l - 1, lam + 1, x) if l else 0 * x
        scale = oscillation_envelope(l, lam, x, ref, dc)
        assert np.all(np.abs(gegenbauer_eval(l, lam, x) - ref) <= 1e-11 * scale)


def test_eval_overflow_signal():
    with pytest.raises(MagnitudeOverflow, match="gegenbauer_eval_scaled"):
        gegenbauer_eval(5000, 1.0, 3.0)


def test_eval_degree_cap():
    with pytest.raises(ValueError):
        gegenbauer_eval(11, 1.0, 0.5, l_max=10)
    with pytest.raises(ValueError):
        gegenbauer_eval(-1, 1.0, 0.5)


@pytest.mark.parametrize("lam", LAMS)
def test_value_at_one(lam):
    for l in (0, 1, 2, 10, 60, 150):
        oracle = value_at_one(l, lam)
        assert gegenbauer_eval(l, lam, 1.0) == pytest.approx(oracle, rel=1e-10)
        assert gegenbauer_at_one(l, lam) == pytest.approx(oracle, rel=1e-12)


def test_legendre_reduction_unit_interval():
    x = np.linspace(-1, 1, 101)
    for l in range(101):
        p, dp = legendre_oracle(l, x)
        scale = oscillation_envelope(l, 0.5, x, p, dp)
        assert np.all(np.abs(gegenbauer_eval(l, 0.5, x) - p) <= 1e-12 * scale)


# --- scaled ------------------------------------------------------------------

def test_scaled_examples():
    assert gegenbauer_eval_scaled(2, 1, 1.000001).log_magnitude == pytest.approx(
        math.log(gegenbauer_eval(2, 1, 1.000001)), abs=1e-10)
    assert gegenbauer_eval_scaled(2, 1, 1.000001).log_magnitude == pytest.approx(math.log(3), abs=1e-5)
    for lam in LAMS:
        sv = gegenbauer_eval_scaled(0, lam, 5.0)
        assert sv.log_magnitude == 0.0 and sv.phase_or_sign == 0.0


def test_scaled_large_degree_against_chebyshev():
    # lam = 1 is Chebyshev U: U_l(cosh a) = sinh((l+1) a)/sinh a
    x = 1 + 2e-4
    a = math.acosh(x)
    expect = math.log(math.sinh(201 * a) / math.sinh(a))
    got = gegenbauer_eval_scaled(200, 1.0, x).log_magnitude
    assert got == pytest.approx(expect, abs=1e-10)
    assert got == pytest.approx(math.log(abs(gegenbauer_series(200, 1.0, -1e-4))), abs=1e-10)


def test_scaled_growth_law():
    # ln C_l(1 + 2 eps) grows with slope 2 sqrt(eps) in l once l sqrt(eps) >> 1
    eps = 1e-4
    x = 1 + 2 * eps
    d = (gegenbauer_eval_scaled(400, 1.0, x).log_magnitude
         - gegenbauer_eval_scaled(200, 1.0, x).log_magnitude)
    assert d == pytest.approx(200 * 2 * math.sqrt(eps), rel=0.02)


def test_scaled_far_beyond_double_range():
    sv = gegenbauer_eval_scaled(10**5, 1.0, 3.0)
    a = math.acosh(3.0)
    # ln U_l(cosh a) = (l+1) a - ln(2 sinh a) + ln(1 - e^{-2(l+1)a})
    assert sv.log_magnitude == pytest.approx((10**5 + 1) * a - math.log(2 * math.sinh(a)), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 300), st.sampled_from(LAMS), st.floats(1.0 + 1e-9, 4.0))
def test_scaled_unscaled_consistency(l, lam, x):
    try:
        plain = gegenbauer_eval(l, lam, x)
    except MagnitudeOverflow:
        return
    sv = gegenbauer_eval_scaled(l, lam, x)
    assert math.exp(sv.log_magnitude) == pytest.approx(plain, rel=1e-10)


@pytest.mark.parametrize("x", [1.0, 0.5, -3.0, 1 + 1j])
def test_scaled_domain_error(x):
    with pytest.raises(ValueError, match="x > 1"):
        gegenbauer_eval_scaled(3, 1.0, x)


def test_scaled_sequence_matches_eval():
    x = np.array([1.5, 0.3, -0.8 + 0.2j])
    for l, mant, log_scale in scaled_sequence(40, 1.5, x):
        assert np.allclose(mant * np.exp(log_scale), gegenbauer_eval(l, 1.5, x), rtol=1e-12, atol=0)


# --- series --------------------------------------------------------------------

def test_series_examples():
    for lam in LAMS:
        for l in (0, 3, 9):
            assert gegenbauer_series(l, lam, 0.0) == pytest.approx(value_at_one(l, lam), rel=1e-13)
    assert gegenbauer_series(2, 1, 0) == pytest.approx(3.0, rel=1e-15)
    assert gegenbauer_series(1, 1, 0.25) == pytest.approx(1.0, rel=1e-15)
    assert gegenbauer_series(4, 1.5, -0.05) == pytest.approx(gegenbauer_eval(4, 1.5, 1.1), rel=1e-13)


@pytest.mark.parametrize("lam", LAMS)
def test_series_coefficients_positive(lam):
    for l in (0, 1, 7, 50, 200):
        assert np.all(series_coefficients(l, lam) > 0)


@pytest.mark.parametrize("lam", LAMS)
def test_series_matches_mpmath(lam):
    for l in (3, 25, 50):
        for x in (-0.9, 0.13, 1.7):
            assert gegenbauer_series(l, lam, (1 - x) / 2) == pytest.approx(gegenbauer_mp(l, lam, x), rel=1e-12, abs=1e-300)


def test_series_cap():
    with pytest.raises(ValueError):
        gegenbauer_series(201, 1.0, 0.1)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 50), st.sampled_from(LAMS), st.floats(-1, 2))
def test_series_recurrence_equivalence(l, lam, x):
    o = gegenbauer_series(l, lam, (1 - x) / 2)
    dc = 2 * lam * gegenbauer_series(l - 1, lam + 1, (1 - x) / 2) if l else 0.0
    scale = float(oscillation_envelope(l, lam, np.array([x]), np.array([o]), np.array([dc]))[0])
    assert abs(gegenbauer_eval(l, lam, x) - o) <= 1e-10 * scale


# --- zeros -----------------------------------------------------------------------

def test_zero_examples():
    assert gegenbauer_zero_angles(1, 1) == pytest.approx([math.pi / 2], abs=1e-13)
    th = gegenbauer_zero_angles(2, 0.5)
    assert th == pytest.approx([math.acos(1 / math.sqrt(3)), math.acos(-1 / math.sqrt(3))], abs=1e-13)
    th = gegenbauer_zero_angles(50, 1.0)
    nu = np.arange(1, 51)
    assert np.max(np.abs(50 * th - nu * math.pi)) <= math.pi


def test_zero_angles_chebyshev_exact():
    # zeros of U_l are theta_nu = nu pi/(l+1)
    for l in (3, 17, 64):
        th = gegenbauer_zero_angles(l, 1.0)
        assert th == pytest.approx(np.arange(1, l + 1) * math.pi / (l + 1), abs=1e-13)


@pytest.mark.parametrize("lam", LAMS)
def test_zero_angles_are_zeros(lam):
    for l in (5, 30, 120):
        th = gegenbauer_zero_angles(l, lam)
        assert len(th) == l and np.all(np.diff(th) > 0)
        assert np.all((th > 0) & (th < math.pi))
        vals = np.abs(gegenbauer_eval(l, lam, np.cos(th)))
        scale = np.max(np.abs(series_coefficients(min(l, 200), lam))) if l <= 200 else 1.0
        assert np.all(vals <= 1e-12 * scale)


@pytest.mark.parametrize("lam", LAMS)
def test_zero_interlacing(lam):
    for l in (2, 9, 40):
        a = np.cos(gegenbauer_zero_angles(l, lam))[::-1]
        b = np.cos(gegenbauer_zero_angles(l + 1, lam))[::-1]
        assert np.all(b[:-1] < a) and np.all(a < b[1:])


def test_zero_angles_rejects():
    with pytest.raises(ValueError):
        gegenbauer_zero_angles(0, 1.0)


# --- orthogonality ------------------------------------------------------------------

def test_orthogonality_examples():
    h00 = gegenbauer_norm(0, 1.0)
    assert abs(orthogonality_integral(1, 3, 1.0)) < 1e-10 * gegenbauer_norm(1, 1.0)
    assert orthogonality_integral(0, 0, 1.0) == pytest.approx(math.pi / 2, rel=1e-12)
    assert h00 == pytest.approx(math.pi / 2, rel=1e-14)
    assert orthogonality_integral(2, 2, 0.5) == pytest.approx(2 / 5, rel=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_norm_matches_quadrature(lam):
    for n in (0, 1, 4, 11):
        assert orthogonality_integral(n, n, lam) == pytest.approx(gegenbauer_norm(n, lam), rel=1e-10)


def test_orthogonality_rejects():
    with pytest.raises(ValueError, match="unsupported"):
        orthogonality_integral(1, 1, 0.25)
    with pytest.raises(ValueError):
        orthogonality_integral(65, 0, 1.0)


# --- Lemma-1 style properties --------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(1, 200), st.sampled_from(LAMS), st.floats(1e-9, 10), st.floats(1e-6, 10))
def test_monotone_above_one(l, lam, a, gap):
    x1, x2 = 1 + a, 1 + a + gap
    assert gegenbauer_eval_scaled(l, lam, x1).log_magnitude < gegenbauer_eval_scaled(l, lam, x2).log_magnitude


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LAMS), st.floats(1 + 1e-12, 50))
def test_positive_above_one(lam, x):
    for _, mant, _ in scaled_sequence(200, lam, np.array([x])):
        assert mant[0] > 0
