import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aedes_competition.criterion import (chi0, gamma, gamma_analysis, gamma_derivative,
                                         gamma_integrand, homogeneous_spec, interface_point,
                                         make_gamma_spec, patch_spec, tabulate_gamma)
from aedes_competition.model import SHARED, SPECIES1, SPECIES2, Habitat
from aedes_competition.profiles import closed_form_bounds


# ---------------------------------------------------------------- oracles

def grid_scan_root(invader, resident, F_inv, F_res, x_max=50.0, n=1_000_000):
    """Sign change of the interface equation on a uniform 10^6-point grid,
    refined by one secant step inside the bracketing cell."""
    x = np.linspace(1e-9, x_max, n)
    g = invader.b * F_inv * -np.expm1(-invader.decay_rate * x) - resident.b * F_res * np.exp(-resident.decay_rate * x)
    i = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    return x[i] - g[i] * (x[i + 1] - x[i]) / (g[i + 1] - g[i])


def midpoint_gamma(spec, chi, n=1_000_000):
    h = chi / n
    y = (np.arange(n) + 0.5) * h
    return float(np.sum(gamma_integrand(spec, y)) * h)


def composite_integrand(spec, y):
    """Integrand written with the two-branch resident profile evaluated at the
    position where the invader's upper profile reaches y."""
    y = np.asarray(y, dtype=float)
    inv = spec.invader
    with np.errstate(divide="ignore"):
        pos = -np.log1p(-y / spec.F_inv_star) / inv.decay_rate
    _, _, f2_over = closed_form_bounds(spec, np.where(np.isfinite(pos), pos, 1e300))
    gain = spec.rho * inv.nu / (inv.b / spec.K_inv * y + inv.mu + inv.nu)
    return gain * np.maximum(inv.b * y - spec.resident.b * f2_over, 0.0) - inv.delta * y


def composite_gamma(spec, chi, n=1_000_000):
    h = chi / n
    y = (np.arange(n) + 0.5) * h
    return float(np.sum(composite_integrand(spec, y)) * h)


# ---------------------------------------------------------------- interface point

def test_interface_point_symmetric():
    L = interface_point(SPECIES1, SPECIES1, 1000.0, 1000.0)
    assert L == pytest.approx(math.log(2) * math.sqrt(SPECIES1.D / SPECIES1.delta), rel=1e-12)


def test_interface_point_grid_scan(spec1):
    ref = grid_scan_root(SPECIES1, SPECIES2, spec1.F_inv_star, spec1.F_res_star)
    assert spec1.L_tilde == pytest.approx(ref, rel=1e-6)


def test_interface_point_frozen(spec1, spec_urban):
    assert spec1.L_tilde == pytest.approx(0.0813724801, rel=1e-9)
    assert spec_urban.L_tilde == pytest.approx(0.1685612338, rel=1e-9)


def test_interface_point_scale_invariance():
    a = interface_point(SPECIES1, SPECIES2, 1209.0, 169.4)
    b = interface_point(replace(SPECIES1, b=20.0), replace(SPECIES2, b=16.0), 1209.0, 169.4)
    assert a == pytest.approx(b, rel=1e-12)


def test_interface_point_rejects_non_positive():
    with pytest.raises(ValueError):
        interface_point(SPECIES1, SPECIES2, 0.0, 10.0)


# ---------------------------------------------------------------- Gamma values

def test_spec_fields(spec1):
    assert spec1.zeta == pytest.approx(math.sqrt(1.75), rel=1e-14)
    assert spec1.cosh_factor >= 1.0
    assert spec1.F_inv_star == pytest.approx(1209.0, rel=1e-13)


def test_gamma_zero_and_domain(spec1):
    assert gamma(spec1, 0.0) == 0.0
    with pytest.raises(ValueError):
        gamma(spec1, -1.0)
    with pytest.raises(ValueError):
        gamma(spec1, 1.01 * spec1.F_inv_star)


def test_gamma_homogeneous_frozen(spec1):
    assert gamma(spec1, spec1.F_inv_star) == pytest.approx(14535.61004, rel=1e-8)


def test_gamma_urban_frozen(spec_urban):
    # independent oracles below agree; see the acceptance suite for the
    # comparison with the published figure
    assert spec_urban.zeta == pytest.approx(1 / math.sqrt(1.75), rel=1e-14)
    assert gamma(spec_urban, spec_urban.F_inv_star) == pytest.approx(301.9460392, rel=1e-8)


@pytest.mark.parametrize("which", ["spec1", "spec_urban"])
def test_gamma_matches_midpoint_oracle(which, request):
    spec = request.getfixturevalue(which)
    F = spec.F_inv_star
    for chi in (0.3 * F, F):
        assert gamma(spec, chi) == pytest.approx(midpoint_gamma(spec, chi), rel=1e-6)


@pytest.mark.parametrize("which", ["spec1", "spec_urban"])
def test_simplified_form_equals_composite_form(which, request):
    spec = request.getfixturevalue(which)
    F = spec.F_inv_star
    y = np.linspace(0, F * (1 - 1e-9), 2001)
    np.testing.assert_allclose(gamma_integrand(spec, y), composite_integrand(spec, y),
                               rtol=1e-9, atol=1e-9 * spec.invader.delta * F)
    assert composite_gamma(spec, F) == pytest.approx(gamma(spec, F), rel=1e-6)


def test_forest_patch_equals_homogeneous(spec1, spec_forest):
    assert gamma(spec_forest, spec_forest.F_inv_star) == pytest.approx(gamma(spec1, spec1.F_inv_star), rel=1e-14)


def test_patch_spec_defaults(two_patch):
    assert patch_spec(SPECIES1, SPECIES2, SHARED, two_patch, "F").invader_index == 1
    assert patch_spec(SPECIES1, SPECIES2, SHARED, two_patch, "U").invader_index == 2
    with pytest.raises(ValueError):
        patch_spec(SPECIES1, SPECIES2, SHARED, two_patch, "X")
    with pytest.raises(ValueError):
        patch_spec(SPECIES1, SPECIES2, SHARED, Habitat.constant(1.0, 1.0), "F")


# ---------------------------------------------------------------- derivative and argmax

@pytest.mark.parametrize("which", ["spec1", "spec_urban"])
def test_derivative_matches_quadrature(which, request):
    spec = request.getfixturevalue(which)
    F = spec.F_inv_star
    x0 = chi0(spec)
    rng = np.random.default_rng(7)
    ys = np.sort(rng.uniform(0.01 * F, 0.99 * F, 100))
    for y in ys:
        if abs(y - x0) < 1e-3 * F:
            continue
        h = 1e-4 * F
        fd = (gamma(spec, y + h, x0) - gamma(spec, y - h, x0)) / (2 * h)
        exact = gamma_derivative(spec, y, x0)
        # central differences of an integral are exact up to O(h^2 f'')
        assert fd == pytest.approx(exact, rel=1e-6, abs=1e-6 * spec.invader.delta * F)
        assert exact == pytest.approx(float(gamma_integrand(spec, y)), rel=1e-9, abs=1e-9 * F)


def test_derivative_below_kink(spec1):
    x0 = chi0(spec1)
    y = np.linspace(0, 0.99 * x0, 50)
    np.testing.assert_allclose(gamma_derivative(spec1, y, x0), -spec1.invader.delta * y, rtol=1e-15)
    for yy in y[1:]:
        h = 1e-3
        fd = (gamma(spec1, yy + h, x0) - gamma(spec1, yy - h, x0)) / (2 * h)
        assert fd == pytest.approx(-spec1.invader.delta * yy, rel=1e-6)


def test_chi0_root(spec1):
    x0 = chi0(spec1)
    assert x0 == pytest.approx(119.2100787, rel=1e-9)
    lhs = spec1.invader.b * x0
    rhs = spec1.resident.b * spec1.cosh_factor * spec1.F_res_star * (1 - x0 / spec1.F_inv_star) ** spec1.zeta
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_analysis_zeta_above_one(spec1):
    res = gamma_analysis(spec1)
    assert res.argmax == spec1.F_inv_star
    assert res.invasion
    assert res.max_value == res.value_at_Fstar
    assert 0 <= res.chi0 <= res.argmax


@pytest.fixture(scope="module")
def slow_resident_spec():
    return homogeneous_spec(SPECIES1, replace(SPECIES2, D=0.1), SHARED, 2000.0, 500.0, invader=1)


def test_analysis_zeta_below_one(slow_resident_spec):
    spec = slow_resident_spec
    assert spec.zeta < 1
    res = gamma_analysis(spec)
    assert res.argmax < spec.F_inv_star
    assert res.argmax == pytest.approx(1207.02, abs=0.05)
    chis = np.linspace(0, spec.F_inv_star, 10_001)
    table = tabulate_gamma(spec, n_panels=4000)
    assert res.max_value >= np.max(table(chis)) - 1e-6 * abs(res.max_value)
    y1, ubar = res.critical_points
    assert res.chi0 < y1 < ubar < spec.F_inv_star
    assert abs(gamma_derivative(spec, ubar)) < 1e-6 * spec.invader.delta * spec.F_inv_star


def test_reverse_direction_homogeneous():
    spec = homogeneous_spec(SPECIES1, SPECIES2, SHARED, 2000.0, 500.0, invader=2)
    res = gamma_analysis(spec)
    assert spec.invader_index == 2
    assert res.value_at_Fstar == pytest.approx(-998.04, abs=0.01)
    assert not res.invasion
    assert res.argmax == 0.0


def test_sign_structure(spec1, slow_resident_spec):
    for spec in (spec1, slow_resident_spec):
        res = gamma_analysis(spec)
        first = res.critical_points[0] if res.critical_points else spec.F_inv_star
        y = np.linspace(0, first, 400)
        assert np.all(np.diff(tabulate_gamma(spec)(y)) <= 1e-9 * abs(res.max_value))


def test_tabulated_gamma_matches_quadrature(spec1):
    table = tabulate_gamma(spec1)
    for chi in np.linspace(0, spec1.F_inv_star, 23):
        assert float(table(chi)) == pytest.approx(gamma(spec1, chi), rel=1e-8, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(D1=st.floats(0.005, 0.5), D2=st.floats(0.005, 0.5), K2=st.floats(100.0, 3000.0))
def test_dichotomy_property(D1, D2, K2):
    spec = make_gamma_spec(replace(SPECIES1, D=D1), replace(SPECIES2, D=D2), 2000.0, K2, 0.49)
    res = gamma_analysis(spec)
    assert res.max_value >= res.value_at_Fstar
    assert 0 <= res.chi0 <= spec.F_inv_star
    if spec.zeta >= 1:
        assert res.argmax in (0.0, spec.F_inv_star)
    if res.invasion:
        assert res.chi0 <= res.argmax <= spec.F_inv_star
        if spec.zeta < 1:
            assert res.argmax < spec.F_inv_star
