import json
import math

import numpy as np
import pytest

from conftest import poly_from_roots, random_polynomial
from hdamp.amplitude import ModelKind, ModelSpec, PartialWaveSet, absorptive_eval, build_model, eval_amplitude
from hdamp.bounds import BoundContext, harnack_interval, zero_free_radius
from hdamp.specfun import DimensionSpec
from hdamp.zeroscan import (Contour, WindingNotConverged, ZeroOnContour, calibrate_c4, check_jensen,
                            domain_min_re_absorptive, first_sign_change_v, harnack_check,
                            jensen_rhs_numeric, locate_zeros, measured_zero_free_radius, newton_refine,
                            winding_number, zero_census)

D4, D5, D6 = DimensionSpec(4), DimensionSpec(5), DimensionSpec(6)


def gray(L, s, dim):
    return build_model(ModelSpec(ModelKind.gray_disk, L=L), s, dim)


# --- contours and winding ------------------------------------------------------------

def test_contour_validation():
    with pytest.raises(ValueError):
        Contour.circle(0, 1, samples=100)
    with pytest.raises(ValueError):
        Contour.circle(0, 1, samples=32)
    with pytest.raises(ValueError):
        Contour.circle(0, 0.0)
    with pytest.raises(ValueError):
        Contour.rectangle(1 + 1j, 0)


def test_rectangle_points_closed_and_ccw():
    c = Contour.rectangle(-1 - 2j, 3 + 1j)
    z = c.points(64)
    assert z[0] == -1 - 2j
    # positive orientation: signed area of the polygon is positive
    area = 0.5 * np.sum(z.real * np.roll(z.imag, -1) - np.roll(z.real, -1) * z.imag)
    assert area == pytest.approx(12.0, rel=1e-12)


def test_winding_examples():
    unit = Contour.circle(0, 1)
    assert winding_number(lambda t: t - 0.5, unit) == 1
    assert winding_number(lambda t: np.full_like(t, 3 + 4j), unit) == 0
    f = lambda t: (t - 0.2) * (t - 0.3) ** 2
    assert winding_number(f, Contour.circle(0, 0.5)) == 3


def test_winding_rectangle_and_offcentre():
    f = lambda t: (t - 2j) * (t + 1) * (t - 5)
    assert winding_number(f, Contour.rectangle(-2 - 1j, 1 + 3j)) == 2
    assert winding_number(f, Contour.circle(5, 0.1)) == 1


def test_winding_pole_counts_negative():
    assert winding_number(lambda t: 1 / (t - 0.1), Contour.circle(0, 1)) == -1


def test_winding_adapts_for_high_degree():
    assert winding_number(lambda t: t**40 - 0.5**40, Contour.circle(0, 1)) == 40


def test_zero_on_contour():
    with pytest.raises(ZeroOnContour) as exc:
        winding_number(lambda t: t - 1, Contour.circle(0, 1))
    a, b = exc.value.arc
    assert abs(a - 1) < 0.2 and abs(b - 1) < 0.2


def test_not_converged():
    with pytest.raises(WindingNotConverged):
        winding_number(lambda t: t**50, Contour.circle(0, 1), max_samples=128)


def test_random_polynomials(rng):
    for _ in range(100):
        roots, mult = random_polynomial(rng)
        f = poly_from_roots(roots, mult)
        expect = sum(m for z, m in zip(roots, mult) if abs(z) < 1)
        assert winding_number(f, Contour.circle(0, 1, 256)) == expect


# --- localisation ---------------------------------------------------------------------

def test_locate_double_root():
    f = lambda t: (t - 0.2) * (t - 0.3) ** 2
    zeros, unresolved = locate_zeros(f, 0, 0.5)
    assert not unresolved
    assert [z.multiplicity for z in zeros] == [1, 2]
    assert zeros[0].location == pytest.approx(0.2, abs=1e-10)
    assert zeros[1].location == pytest.approx(0.3, abs=1e-6)


def test_locate_random(rng):
    for _ in range(40):
        roots, mult = random_polynomial(rng)
        mult = [1] * len(mult)
        f = poly_from_roots(roots, mult)
        zeros, unresolved = locate_zeros(f, 0, 1.0)
        inside = sorted((z for z in roots if abs(z) < 1), key=lambda z: (z.real, z.imag))
        assert not unresolved and len(zeros) == len(inside)
        for z, ref in zip(zeros, inside):
            assert abs(z.location - ref) < 1e-9
            assert z.residual <= 1e-8


def test_newton_refine_converges():
    f = lambda t: np.asarray(t) ** 2 + 1
    z, res, ok = newton_refine(f, 0.1 + 0.9j, 1.0, 1.0)
    assert ok and abs(z - 1j) < 1e-12 and res < 1e-12


# --- census ---------------------------------------------------------------------------

def test_census_constant_in_t():
    pw = PartialWaveSet(D5, 100.0, [0.7j], unitary=True)
    c = zero_census(pw, 0.5, BoundContext())
    assert c.winding_count == 0 and c.zeros == [] and c.complete


def test_census_linear_model():
    s = 100.0
    pw = PartialWaveSet(D5, s, [1j, 1j], unitary=True)
    ctx = BoundContext(T0=100.0)
    c = zero_census(pw, 70.0, ctx)
    assert c.winding_count == 1 and c.complete
    (z,) = c.zeros
    assert abs(z.location - (-5 * s / 8)) <= 1e-8 * 5 * s / 8
    assert z.residual <= 1e-8
    assert c.winding_count <= c.jensen_rhs
    data = json.loads(json.dumps(c.to_json()))
    assert data["zeros"][0][0] == pytest.approx(-62.5, rel=1e-8) and len(data["zeros"][0]) == 3


def test_census_gray_disk_zero_free():
    s = math.exp(6)
    ctx = BoundContext()
    r0 = zero_free_radius(s, ctx).r0_max
    c = zero_census(gray(20, s, D5), r0, ctx)
    assert c.winding_count == 0
    assert c.min_modulus_on_contour > 0


def test_census_domain_errors():
    ctx = BoundContext()
    with pytest.raises(ValueError):
        zero_census(gray(3, 100, D5), 1.0, ctx)
    with pytest.raises(ValueError, match="nonzero forward"):
        zero_census(PartialWaveSet(D5, 100.0, [0j, 0j]), 0.5, ctx)


def test_jensen_rhs_of_exponential():
    # f = e^{a t}: max on |t| = R is e^{aR}, so rhs = aR / ln(1/delta)
    f = lambda t: np.exp(3.0 * np.asarray(t))
    rhs = jensen_rhs_numeric(f, 0.2, 1.0)
    assert rhs == pytest.approx(3.0 * 0.2 * math.e**2 / 2, rel=1e-10)


def test_check_jensen_examples():
    ctx = BoundContext(T0=100.0)
    const = PartialWaveSet(D5, 100.0, [0.4j], unitary=True)
    jc = check_jensen(const, 10.0, ctx)
    assert jc.count == 0 and jc.holds
    lin = PartialWaveSet(D5, 100.0, [1j, 1j], unitary=True)
    jc = check_jensen(lin, 70.0, ctx)
    assert jc.count == 1 and jc.count <= jc.rhs_numeric and jc.holds
    jc = check_jensen(lin, 30.0, ctx)
    assert jc.count == 0 and jc.holds
    assert math.isfinite(jc.rhs_lemma2)


def test_jensen_on_unitary_models():
    ctx = BoundContext()
    for k in (5, 7):
        s = math.exp(k)
        for dim in (D4, D6):
            pw = gray(math.ceil(0.5 * math.sqrt(s) * k), s, dim)
            for r in (0.05, 0.3, 0.9):
                assert check_jensen(pw, r, ctx).holds


def test_zero_free_radius_shrinks():
    ctx = BoundContext()
    measured = []
    for k in (4, 6, 8):
        s = math.exp(k)
        pw = gray(math.ceil(0.5 * math.sqrt(s) * k), s, D4)
        m = measured_zero_free_radius(pw, zero_free_radius(s, ctx).r0_max, 50.0)
        assert m > zero_free_radius(s, ctx).r0_max
        measured.append(m * k**2)
    # r0 (ln s)^2 levels off: successive changes shrink
    assert abs(measured[2] - measured[1]) < abs(measured[1] - measured[0])


# --- Harnack and the positivity domain ----------------------------------------------------

@pytest.mark.parametrize("r", [0.1, 0.3, 0.5])
def test_harnack_gray_disk(r):
    ctx = BoundContext()
    s = math.exp(6)
    pw = gray(math.ceil(0.5 * math.sqrt(s) * 6), s, D5)
    hc = harnack_check(pw, 0.5, r, ctx, 500, np.random.default_rng(1))
    assert hc.interval == harnack_interval(hc.A_R0, r)
    assert np.all(np.abs(hc.samples - 0.5) < hc.disk_radius)
    assert hc.passed


def test_harnack_reproducible():
    ctx = BoundContext()
    pw = gray(30, 400.0, D4)
    a = harnack_check(pw, 0.4, 0.3, ctx, 50, np.random.Generator(np.random.PCG64(5)))
    b = harnack_check(pw, 0.4, 0.3, ctx, 50, np.random.Generator(np.random.PCG64(5)))
    assert np.array_equal(a.samples, b.samples) and np.array_equal(a.re_A, b.re_A)


def test_calibrated_c4_is_tight():
    ctx = BoundContext()
    s = math.exp(6)
    pw = gray(math.ceil(0.5 * math.sqrt(s) * 6), s, D5)
    u = [0.1, 0.5]
    c4 = calibrate_c4(pw, ctx, u)
    assert domain_min_re_absorptive(pw, BoundContext(C4=c4), u, n_v=41) > 0
    assert domain_min_re_absorptive(pw, BoundContext(C4=0.9 * c4), u, n_v=41) < 0


def test_first_sign_change():
    s = math.exp(6)
    pw = gray(60, s, D5)
    v = first_sign_change_v(pw, 0.5, 3.0)
    assert 0 < v < 3.0
    assert abs(float(np.real(absorptive_eval(pw, 0.5 + 1j * v)))) < 1e-8 * float(absorptive_eval(pw, 0.5))
    assert first_sign_change_v(pw, 0.5, 0.1 * v) == math.inf


def test_sign_change_distance_shrinks():
    v = []
    for k in (4, 6, 8, 10):
        s = math.exp(k)
        pw = gray(math.ceil(0.5 * math.sqrt(s) * k), s, D4)
        v.append(first_sign_change_v(pw, 0.5, 2.0))
    assert all(b < a for a, b in zip(v, v[1:]))
    # roughly 1/ln s: v ln s stays within a factor 1.5 across the grid
    prod = [vi * k for vi, k in zip(v, (4, 6, 8, 10))]
    assert max(prod) / min(prod) < 1.5


def test_census_linear_model_amplitude_value():
    # closed-form root really is a zero of the library amplitude
    pw = PartialWaveSet(D5, 40.0, [1j, 1j])
    assert abs(eval_amplitude(pw, -25.0)) < 1e-12 * abs(eval_amplitude(pw, 0.0))
