import math
import warnings

import numpy as np
import pytest

from slabcavity.dispersion import MaterialModel
from slabcavity.force import (a1_ideal, casimir_ideal, force_delta_form, force_finite_T,
                              force_lifshitz_difference, force_zero_T, lifshitz_pressure, taylor_a1,
                              thickness_correction)
from slabcavity.fresnel import Stack
from slabcavity.multilayer import CavityGeometry, GeometryError
from slabcavity.spectral import QuadratureSpec

H, B = 2.5e-6, 0.5e-6


def test_ideal_single_gap_magnitude():
    # CODATA 2018 hbar and exact c, evaluated without the package constants
    hbar, c = 1.054571817e-34, 299792458.0
    expected = hbar * c * math.pi**2 / 240 * (1e-6) ** -4
    assert expected == pytest.approx(1.3001e-3, rel=5e-5)
    # centre gap 1 um on one side, far wall on the other
    h = 2.0e-6 + 1e-6
    f = casimir_ideal(h, 0.5e-6)
    assert f == pytest.approx(expected * (1 - (1e-6 / 2e-6) ** 4), rel=1e-12)


def test_ideal_closed_forms():
    assert casimir_ideal(H, 0.0) == 0.0
    assert casimir_ideal(H, 3e-7) == -casimir_ideal(H, -3e-7)
    assert casimir_ideal(H, 3e-7) > 0
    assert a1_ideal(1.0) == pytest.approx(3.3283e-25, rel=2e-5)
    # a1 is the slope of the ideal force at the centre
    d = 1e-10
    slope = (casimir_ideal(H, d) - casimir_ideal(H, -d)) / (2 * d)
    assert slope == pytest.approx(a1_ideal(H), rel=1e-6)
    with pytest.raises(ValueError):
        casimir_ideal(H, H / 2)
    with pytest.raises(ValueError):
        a1_ideal(0.0)


@pytest.mark.parametrize("temperature", [0.0, 300.0])
def test_antisymmetry_and_centre(metal_stack, temperature):
    fp = force_delta_form(H, B, 1e-7, metal_stack, temperature)
    fm = force_delta_form(H, B, -1e-7, metal_stack, temperature)
    assert abs(fp.pressure + fm.pressure) <= fp.quadrature_error + fm.quadrature_error + 1e-16
    assert fp.pressure > 0
    assert force_delta_form(H, B, 0.0, metal_stack, temperature).pressure == 0.0


def test_invisible_slab(vacuum, al):
    stack = Stack(al, vacuum, vacuum)
    for d in (-4e-7, 1e-7, 6e-7):
        assert abs(force_delta_form(H, B, d, stack, 300.0).pressure) <= QuadratureSpec().abs_tol
        assert abs(force_zero_T(CavityGeometry.from_delta(H, B, d), stack).pressure) <= QuadratureSpec().abs_tol


def test_delta_form_matches_direct_on_random_draws(metal_stack, mixed_stack):
    rng = np.random.default_rng(11)
    spec = QuadratureSpec(rel_tol=1e-12)
    worst = 0.0
    for i in range(20):
        stack = metal_stack if i % 2 else mixed_stack
        h = rng.uniform(0.5e-6, 3e-6)
        b = h * 10 ** rng.uniform(-2, 0)
        # the direct path subtracts two cavity factors; keep the slab off-centre
        d = rng.uniform(0.05, 0.45) * h * rng.choice([-1, 1])
        temperature = 0.0 if i % 4 == 0 else rng.uniform(50, 400)
        geom = CavityGeometry.from_delta(h, b, d)
        direct = (force_zero_T(geom, stack, spec) if temperature == 0
                  else force_finite_T(geom, stack, temperature, spec))
        stable = force_delta_form(h, b, d, stack, temperature, spec)
        worst = max(worst, abs(direct.pressure - stable.pressure) / abs(stable.pressure))
        assert direct.matsubara_terms == stable.matsubara_terms
    assert worst <= 1e-10


def test_force_grows_toward_contact(metal_stack):
    deltas = np.linspace(0.05, 0.45, 9) * H
    f = [force_delta_form(H, B, d, metal_stack, 300.0).pressure for d in deltas]
    assert all(np.diff(f) > 0)
    assert f[-1] > 100 * f[0]


def test_ideal_proxy_convergence(vacuum):
    ref = casimir_ideal(H, 3e-7)
    errs = []
    for eps in (1e4, 1e6, 1e8):
        p = MaterialModel.ideal_proxy(eps)
        f = force_delta_form(H, 1e-6, 3e-7, Stack(p, p, vacuum), 0.0).pressure
        errs.append(abs(f - ref) / ref)
        assert f < ref
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3


def test_lifshitz_difference_thick_metal(metal_stack):
    full = force_delta_form(H, B, 3e-7, metal_stack, 300.0).pressure
    lif = force_lifshitz_difference(H, 3e-7, metal_stack, 300.0).pressure
    thin = force_delta_form(H, 10e-9, 3e-7, metal_stack, 300.0).pressure
    thick_gap = abs(full - lif) / abs(full)
    assert thick_gap < 1e-4
    assert abs(thin - lif) / abs(thin) > 100 * thick_gap


def test_lifshitz_difference_single_gap_pieces(metal_stack):
    # opaque-slab difference is the difference of two single-gap pressures
    d = 3e-7
    lif = force_lifshitz_difference(H, d, metal_stack, 0.0).pressure
    p_small = lifshitz_pressure(H / 2 - d, metal_stack, 0.0).pressure
    p_large = lifshitz_pressure(H / 2 + d, metal_stack, 0.0).pressure
    assert lif == pytest.approx(p_small - p_large, rel=1e-8)


def test_lifshitz_difference_without_slab_contrast(al, vacuum):
    assert force_lifshitz_difference(H, 3e-7, Stack(al, vacuum, vacuum), 300.0).pressure == 0.0


def test_thickness_correction_sign_and_centre(metal_stack):
    lif = force_lifshitz_difference(H, 3e-7, metal_stack, 300.0).pressure
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        corr = thickness_correction(H, 20e-9, 3e-7, metal_stack, 300.0).pressure
        assert thickness_correction(H, 20e-9, 0.0, metal_stack, 300.0).pressure == 0.0
    assert corr * lif < 0


def test_thickness_correction_warns_for_transparent_slab(mixed_stack):
    with pytest.warns(RuntimeWarning, match="opaque"):
        thickness_correction(H, 5e-9, 3e-7, mixed_stack, 300.0)


def test_taylor_a1(metal_stack, vacuum):
    a1 = taylor_a1(H, B, metal_stack, 300.0)
    assert a1.a1 > 0 and a1.matsubara_terms > 0
    p = MaterialModel.ideal_proxy(1e8)
    ideal = taylor_a1(H, 1e-6, Stack(p, p, vacuum), 0.0).a1
    assert ideal == pytest.approx(a1_ideal(H), rel=5e-3)


def test_input_validation(metal_stack):
    with pytest.raises(ValueError):
        force_finite_T(CavityGeometry.from_delta(H, B, 0.0), metal_stack, 0.0)
    with pytest.raises(ValueError):
        force_delta_form(H, B, 1e-7, metal_stack, -1.0)
    with pytest.raises(GeometryError):
        force_delta_form(H, B, H / 2, metal_stack, 0.0)


def test_result_records_method_and_geometry(metal_stack):
    r = force_delta_form(H, B, 1e-7, metal_stack, 300.0)
    assert r.method == "delta_form" and r.geometry["b"] == B
    assert r.as_dict()["temperature"] == 300.0
