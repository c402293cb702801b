import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slabcavity.dispersion import (STATIC_DIVERGENCE, DispersionError, DispersionTable, MaterialFileError,
                                   MaterialModel, builtin_material, builtin_names, eps_drude,
                                   eps_oscillator_sum, eps_tabulated, parse_material, resolve_material,
                                   zero_freq_limits)

zetas = st.floats(min_value=0.0, max_value=1e18, allow_nan=False)


def test_drude_coincident_parameters():
    assert eps_drude(3e15, 3e15, 3e15) == pytest.approx(1.5, rel=1e-15)


def test_drude_worked_value():
    # 1 + 4e32 / (1e15 * 1.1e15), evaluated independently
    expected = 1.0 + (2.0e16**2) / (1e15 * (1e15 + 1e14))
    assert eps_drude(1e15, 2.0e16, 1.0e14) == pytest.approx(expected, rel=1e-14)
    assert eps_drude(1e15, 2.0e16, 1.0e14) == pytest.approx(364.63636363636, rel=1e-12)


def test_drude_static_sentinel_and_transparency():
    assert eps_drude(0.0, 1e16, 1e14) == STATIC_DIVERGENCE
    assert eps_drude(1e30, 1e16, 1e14) == pytest.approx(1.0, abs=1e-20)


@pytest.mark.parametrize("args", [(1e15, -1.0, 1e14), (1e15, 1e16, 0.0), (-1.0, 1e16, 1e14)])
def test_drude_domain_errors(args):
    with pytest.raises(DispersionError):
        eps_drude(*args)


def test_oscillator_examples():
    assert eps_oscillator_sum(0.0, [(1.0, 1e15)]) == 2.0
    assert eps_oscillator_sum(1e15, [(1.0, 1e15)]) == pytest.approx(1.5, rel=1e-15)
    assert eps_oscillator_sum(1e30, [(1.0, 1e15)]) == pytest.approx(1.0, abs=1e-20)


def test_oscillator_empty_warns():
    with pytest.warns(RuntimeWarning):
        assert eps_oscillator_sum(1e14, []) == 1.0


def test_tabulated_rules():
    t = DispersionTable(np.array([1e13, 1e14, 1e15]), np.array([3.0, 2.0, 1.4]))
    assert eps_tabulated(1e14, t) == 2.0
    assert eps_tabulated(1e12, t) == 3.0
    # (1/2)^2 tail on eps - 1 = 0.4
    assert eps_tabulated(2e15, t) == pytest.approx(1.1, rel=1e-14)
    mids = np.geomspace(1e13, 1e15, 101)
    vals = eps_tabulated(mids, t)
    assert np.all(np.diff(vals) <= 0)
    assert np.all((vals <= 3.0) & (vals >= 1.4))


@pytest.mark.parametrize("z,e", [([1.0], [2.0]), ([2.0, 1.0], [2.0, 1.5]), ([1.0, 2.0], [0.5, 1.0])])
def test_table_invariants(z, e):
    with pytest.raises(DispersionError):
        DispersionTable(np.array(z), np.array(e))


def _models():
    return [
        builtin_material("al_drude"),
        builtin_material("teflon_fep"),
        MaterialModel.plasma(1.3e16),
        MaterialModel.vacuum(),
        MaterialModel.tabulated([1e13, 1e14, 1e15, 1e16], [30.0, 8.0, 2.0, 1.1]),
    ]


@given(z1=zetas, z2=zetas)
def test_monotone_and_at_least_one(z1, z2):
    lo, hi = sorted((z1, z2))
    for m in _models():
        e_lo, e_hi = float(m.eps(lo)), float(m.eps(hi))
        assert e_hi <= e_lo
        assert e_hi >= 1.0


def test_deterministic():
    z = np.geomspace(1e10, 1e18, 50)
    for m in _models():
        assert np.array_equal(m.eps(z), m.eps(z))


def test_zero_freq_limits():
    assert zero_freq_limits(builtin_material("al_drude"))[:2] == ("unit", "zero")
    assert zero_freq_limits(MaterialModel.vacuum())[:2] == ("zero", "zero")
    lim = zero_freq_limits(MaterialModel.oscillators([(1.1, 1e15)]))
    assert lim.tm == "finite" and lim.eps_coefficient == pytest.approx(2.1)


def test_builtins_parse():
    assert {"al_drude", "teflon_fep", "vacuum", "ideal"} <= set(builtin_names())
    for n in builtin_names():
        m = builtin_material(n)
        assert len(m.digest) == 64


def test_material_file_errors():
    with pytest.raises(MaterialFileError, match=":2:"):
        parse_material("kind = drude\ncolour = red\n", source="x.mat")
    with pytest.raises(MaterialFileError):
        parse_material("name = x\n")
    with pytest.raises(MaterialFileError):
        parse_material("kind = tabulated\n---\nzeta_rad_per_s,eps\n1e14,2\n2e14,abc\n")


def test_tabulated_file_roundtrip(tmp_path):
    f = tmp_path / "t.mat"
    f.write_text("name = t\nkind = tabulated\n---\nzeta_rad_per_s,eps\n1e14,3.0\n1e15,1.5\n")
    m = resolve_material("t.mat", tmp_path)
    assert m.kind == "tabulated" and m.eps(1e14) == 3.0


def test_eps_zeta2_static_limits():
    al = builtin_material("al_drude")
    assert al.eps_zeta2(0.0) == 0.0
    p = MaterialModel.plasma(1e16)
    assert p.eps_zeta2(0.0) == 1e32
    assert math.isclose(al.eps_zeta2(1e10), 1e20 + al.omega_p**2 * 1e10 / (1e10 + al.gamma))
