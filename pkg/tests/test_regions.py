import cmath
import math

import mpmath
import numpy as np
import pytest

from qsynth.regions import (
    Interval,
    RegionParameterError,
    diagonal_region,
    fixed_under_rotation_region,
    magnitude_interval,
    mixed_diagonal_regions,
    mixed_magnitude_intervals,
    mixed_projective_regions,
    projective_region,
    region_area,
)

# arcsin(0.1) and the cosines of pi/4 -+ arcsin(0.1), evaluated with 25-digit mpmath
ASIN_TENTH = 0.1001674211615597963455232
COS_MINUS = 0.774273042092169185624929
COS_PLUS = 0.6328516858548596807447601


def polar(r, phi):
    return r * cmath.exp(1j * phi)


def sample_disc(rng, n):
    r = np.sqrt(rng.uniform(0, 1, n))
    phi = rng.uniform(0, 2 * np.pi, n)
    return r * np.exp(1j * phi)


def test_diagonal_examples():
    r = diagonal_region(math.pi / 4, 0.1)
    assert r.contains(polar(0.9995, math.pi / 4))
    assert r.contains((39 + 40j) / math.sqrt(5**5))
    assert not diagonal_region(0, 0.1).contains(1j)
    assert r.mirror().contains(-polar(0.9995, math.pi / 4))
    assert not r.contains(-polar(0.9995, math.pi / 4))


def test_projective_examples():
    r = projective_region(0, 0.2, 0.9)
    assert r.contains(0.95)
    assert not r.contains(0.5)
    assert not r.contains(polar(0.95, 0.15))  # sin(0.15) = 0.1494 > 0.1


def test_mixed_diagonal_examples():
    under, over = mixed_diagonal_regions(0, 0.1)
    # 0.99 cos(0.1) = 0.98505 >= sqrt(0.95) = 0.97468
    assert under.contains(polar(0.99, -0.1))
    assert not over.contains(polar(0.99, -0.1))
    # real axis belongs to the under side only
    assert under.contains(1) and not over.contains(1)


def test_mixed_projective_examples():
    under, over = mixed_projective_regions(0, 0.02, 0.99)
    assert under.contains(polar(0.999, -0.05))
    assert not under.contains(0.9)
    assert over.contains(polar(0.999, 0.05))


def test_magnitude_interval_examples():
    iv = magnitude_interval(math.pi / 2, 0.1)
    assert iv.lower == pytest.approx(0, abs=1e-15) and iv.upper == pytest.approx(0.05)
    iv = magnitude_interval(0, 2)
    assert iv.lower == pytest.approx(0, abs=1e-15) and iv.upper == 1
    with pytest.raises(RegionParameterError):
        magnitude_interval(2.0, 0.1)


def test_mixed_magnitude_examples():
    under, over = mixed_magnitude_intervals(math.pi / 4, 0.02)
    assert under.lower == pytest.approx(math.cos(math.pi / 4)) and under.upper == pytest.approx(COS_MINUS, abs=1e-12)
    assert over.lower == pytest.approx(COS_PLUS, abs=1e-12) and over.upper == pytest.approx(math.cos(math.pi / 4))
    under0, _ = mixed_magnitude_intervals(0, 0.1)
    assert under0.lower == under0.upper == 1


def test_mixed_magnitude_intervals_reflect_into_each_other():
    theta, eps = 0.6, 0.01
    under, over = mixed_magnitude_intervals(theta, eps)
    for t in np.linspace(theta, theta + math.asin(math.sqrt(eps / 2)), 50):
        assert over.contains(math.cos(t) + 0 * 1e-15) or math.isclose(math.cos(t), over.lower)
        assert under.contains(math.cos(2 * theta - t)) or math.isclose(math.cos(2 * theta - t), under.upper)


def test_fixed_under_region_even_split_reduces_to_half_planes():
    eps = 0.02
    x1 = math.sqrt(1 - eps / 2)
    y1 = math.sqrt(eps / 2)  # |u1| = 1
    reg = fixed_under_rotation_region(0, eps, x1, y1, "unitary")
    rng = np.random.default_rng(0)
    for z in sample_disc(rng, 3000):
        expect = z.real >= x1 and z.imag > 0
        if abs(z.real - x1) > 1e-9:
            assert reg.contains(complex(z)) == expect
    reg = fixed_under_rotation_region(0, eps, math.sqrt(1 - eps / 2), math.sqrt(eps / 2), "fallback")
    for z in sample_disc(rng, 3000):
        expect = z.imag <= math.sqrt(eps / 2) and z.imag > 0 and z.real >= 0
        if abs(z.imag - math.sqrt(eps / 2)) > 1e-9:
            assert reg.contains(complex(z)) == expect


def test_fixed_under_hyperbola_crosses_axis_at_even_split_point():
    eps = 0.05
    reg = fixed_under_rotation_region(0, eps, 0.99, 0.1, "unitary")
    x0 = math.sqrt(1 - eps / 2)
    assert reg.hyperbola.margin(x0, 0.0) == pytest.approx(0, abs=1e-15)


def test_parameter_errors():
    for bad in (lambda: diagonal_region(0, 0), lambda: diagonal_region(0, -1), lambda: projective_region(0, 0.1, 1.0)):
        with pytest.raises(RegionParameterError):
            bad()
    with pytest.raises(RegionParameterError):
        projective_region(0, 0.1, 0.0)
    with pytest.raises(RegionParameterError):
        Interval(0.5, 0.4)


def _algebraic_checks(theta, eps, q, z):
    """Defining inequalities of each region evaluated independently in 50-digit arithmetic."""
    with mpmath.workdps(50):
        w = mpmath.mpc(z) * mpmath.expj(-mpmath.mpf(theta))
        x, y = w.real, w.imag
        mag = abs(mpmath.mpc(z))
        arg = mpmath.atan2(y, x)
        return {
            "diagonal": mag <= 1 and abs(x) >= mpmath.sqrt(1 - mpmath.mpf(eps) ** 2 / 4),
            "projective": mag <= 1 and mag**2 >= q and x > 0 and abs(mpmath.sin(arg)) <= eps / 2,
            "mixed-under": mag <= 1 and x >= mpmath.sqrt(1 - mpmath.mpf(eps) / 2) and y <= 0,
            "mixed-proj-under": mag <= 1 and mag**2 >= q and x > 0 and -mpmath.sqrt(mpmath.mpf(eps) / 2) <= mpmath.sin(arg) <= 0,
        }


def test_membership_matches_defining_inequalities():
    rng = np.random.default_rng(3)
    theta, eps, q = 0.7, 0.2, 0.8
    regions = {
        "diagonal": diagonal_region(theta, eps),
        "projective": projective_region(theta, eps, q),
        "mixed-under": mixed_diagonal_regions(theta, eps)[0],
        "mixed-proj-under": mixed_projective_regions(theta, eps, q)[0],
    }
    pts = sample_disc(rng, 1500) * 0.2 + np.exp(1j * theta) * 0.85
    for z in pts:
        z = complex(z)
        checks = _algebraic_checks(theta, eps, q, z)
        for name, reg in regions.items():
            assert reg.contains(z) == checks[name], (name, z)


def test_regions_lie_in_unit_disc_and_rotate_equivariantly():
    rng = np.random.default_rng(4)
    phi = 1.1
    for build in (
        lambda t: diagonal_region(t, 0.3),
        lambda t: projective_region(t, 0.3, 0.7),
        lambda t: mixed_diagonal_regions(t, 0.3)[1],
        lambda t: mixed_projective_regions(t, 0.3, 0.7)[0],
        lambda t: fixed_under_rotation_region(t, 0.3, 0.95, 0.1, "fallback", q=0.8),
    ):
        r0, r1 = build(0.2), build(0.2 + phi)
        pts = sample_disc(rng, 800) * 1.2
        for z in pts:
            z = complex(z)
            inside = r0.contains(z)
            if inside:
                assert abs(z) <= 1 + 1e-12
            assert r1.contains(z * cmath.exp(1j * phi)) == inside


def test_region_area_closed_forms():
    for eps in (0.5, 0.1, 1e-2):
        delta = math.asin(eps / 2)
        assert region_area(diagonal_region(0.3, eps)) == pytest.approx(delta - 0.5 * math.sin(2 * delta), rel=1e-6)
    eps, q = 1e-3, 0.9
    assert region_area(projective_region(0.3, eps, q)) == pytest.approx((1 - q) * eps / 2, rel=1e-3)
    assert region_area(magnitude_interval(math.pi / 4, eps)) == pytest.approx(eps / math.sqrt(2), rel=1e-5)


def test_area_of_float_sampled_region_agrees_with_quadrature():
    rng = np.random.default_rng(5)
    reg = fixed_under_rotation_region(0, 0.3, 0.9, 0.2, "unitary")
    pts = sample_disc(rng, 200_000)
    frac = np.mean([reg.contains_float(complex(z)) for z in pts])
    assert region_area(reg) == pytest.approx(frac * math.pi, rel=0.05)


def test_region_json_is_serialisable():
    import json

    for r in (diagonal_region(0.1, 1e-9), *mixed_projective_regions(0.1, 0.01, 0.9)):
        json.dumps(r.to_json())
