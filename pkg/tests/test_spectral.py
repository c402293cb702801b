import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import zeta as riemann_zeta

from slabcavity import kernels
from slabcavity.constants import C_LIGHT, HBAR, K_B
from slabcavity.dispersion import MaterialModel
from slabcavity.fresnel import Stack, interface_data
from slabcavity.spectral import (WG, WGK, XGK, ConvergenceError, MatsubaraSpec, QuadratureSpec, adaptive_gk,
                                 integrate_kperp, integrate_zeta, matsubara_spacing, matsubara_sum)


def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    np.testing.assert_allclose(np.sort(XGK[1::2]), np.sort(x[x >= 0]), rtol=0, atol=1e-15)
    np.testing.assert_allclose(np.sort(WG), np.sort(w[x >= -1e-15]), rtol=0, atol=1e-15)


@pytest.mark.parametrize("degree", range(0, 23))
def test_kronrod_rule_exact_to_degree_22(degree):
    nodes = np.concatenate([-XGK[:-1], XGK[::-1]])
    weights = np.concatenate([WGK[:-1], WGK[::-1]])
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert math.isclose(float(weights @ nodes**degree), exact, abs_tol=2e-15)


def test_kperp_exponential():
    a = 7e-7
    spec = QuadratureSpec()
    val, err = integrate_kperp(lambda kg: np.exp(-2 * kg * a), spec, a)
    assert val == pytest.approx(1 / (4 * a * a), rel=spec.rel_tol)
    assert err <= spec.rel_tol * abs(val) + spec.abs_tol


def test_zero_integrands():
    spec = QuadratureSpec()
    assert integrate_kperp(lambda kg: np.zeros_like(kg), spec, 1e-6) == (0.0, 0.0)
    assert integrate_zeta(lambda z: 0.0, spec, 1e-6) == (0.0, 0.0)


def test_zeta_exponential():
    h = 2.5e-6
    val, _ = integrate_zeta(lambda z: math.exp(-z * h / C_LIGHT), QuadratureSpec(), h)
    assert val == pytest.approx(C_LIGHT / h, rel=1e-9)


def test_unit_reflection_gap_matches_termwise_series():
    # int kappa^2 sum_n e^{-2 n kappa a} over kappa > kappa_0, integrated term by term
    a, zeta = 1e-6, 3e14
    k0 = zeta / C_LIGHT
    spec = QuadratureSpec()

    def f(kg):
        x = np.exp(-2 * kg * a)
        return kg * 2 * x / (1 - x)

    val, _ = integrate_kperp(f, spec, a, kappa_0=k0)
    series = 0.0
    for n in range(1, 400):
        s = 2 * n * a
        series += 2 * math.exp(-s * k0) * (k0 * k0 / s + 2 * k0 / s**2 + 2 / s**3)
    assert val == pytest.approx(series, rel=1e-8)


def test_proxy_static_gap_kernel_matches_trilogarithm_series():
    proxy = MaterialModel.ideal_proxy(1e8)
    stack = Stack(proxy, proxy, MaterialModel.vacuum())
    data = interface_data(stack, 0.0, zero_limit=True)
    a = 1.25e-6
    val, _ = integrate_kperp(lambda kg: kernels.integrand(kernels.MODE_GAP, kg, data, a, a, a),
                             QuadratureSpec(), a)
    r2 = ((1 - 1e8) / (1 + 1e8)) ** 2
    # sum_n r^{2n} int kappa^2 e^{-2 n kappa a} = Li_3(r^2) / (4 a^3)
    li3 = sum(r2**n / n**3 for n in range(1, 20000))
    assert val == pytest.approx(li3 / (4 * a**3), rel=1e-8)
    assert li3 == pytest.approx(riemann_zeta(3), rel=1e-7)


def test_matsubara_spacing():
    assert matsubara_spacing(300.0) == pytest.approx(2 * math.pi * K_B * 300 / HBAR, rel=1e-15)
    assert matsubara_spacing(300.0) == pytest.approx(2.4678e14, rel=1e-4)
    assert MatsubaraSpec(300.0).frequency(3) == pytest.approx(3 * matsubara_spacing(300.0), rel=1e-15)


def test_zero_term_half_weight():
    spec = MatsubaraSpec(10.0)
    val, used = matsubara_sum(lambda z, m: 7.0, spec, n_terms=2)
    assert used == 2
    assert val == pytest.approx(K_B * 10.0 * (3.5 + 7.0), rel=1e-15)


def test_matsubara_convergence_error():
    spec = MatsubaraSpec(10.0, max_terms=50)
    with pytest.raises(ConvergenceError) as exc:
        matsubara_sum(lambda z, m: 1.0, spec)
    assert exc.value.terms == 50 and math.isfinite(exc.value.partial)


def test_matsubara_stops_after_consecutive_small_terms():
    spec = MatsubaraSpec(10.0, term_rel_tol=1e-6)
    calls = []

    def f(z, m):
        calls.append(m)
        return 0.5**m

    val, used = matsubara_sum(f, spec)
    assert used == len(calls)
    assert 0.5 ** (used - 1) <= 1e-6 * 1.5 and 0.5 ** (used - 4) > 1e-6 * 1.5
    assert val == pytest.approx(K_B * 10.0 * 1.5, rel=1e-5)


@given(n=st.integers(1, 30))
def test_matsubara_monotone_in_terms(n):
    spec = MatsubaraSpec(5.0)
    f = lambda z, m: math.exp(-0.3 * m)  # noqa: E731
    lo, _ = matsubara_sum(f, spec, n_terms=n)
    hi, _ = matsubara_sum(f, spec, n_terms=n + 1)
    assert hi >= lo


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(tail_cutoff=20)
    with pytest.raises(ValueError):
        MatsubaraSpec(0.0)
    with pytest.raises(ValueError):
        MatsubaraSpec(1.0, zero_term_weight=1.0)


def test_adaptive_gk_budget_exhausted():
    with pytest.raises(ConvergenceError) as exc:
        adaptive_gk(lambda x: np.abs(np.sin(40 * x)) ** 0.5, [0.0, 10.0], 1e-14, 0.0, 3)
    assert math.isfinite(exc.value.partial)


def test_adaptive_gk_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        adaptive_gk(lambda x: 1 / (x - x), [0.0, 1.0], 1e-9, 0.0, 10)


def _metal_data(zeta):
    al = MaterialModel.drude(2.2e16, 1.2e14)
    return Stack(al, al, MaterialModel.vacuum()), interface_data(Stack(al, al, MaterialModel.vacuum()), zeta)


def test_tolerance_refinement_is_self_consistent():
    zeta = 2e14
    stack, data = _metal_data(zeta)
    ap, am, b = 1.55e-6, 0.95e-6, 0.5e-6
    k0 = math.sqrt(stack.gap.kappa_shift(zeta))
    f = lambda kg: kernels.integrand(kernels.MODE_DELTA, kg, data, ap, am, b)  # noqa: E731
    spec = QuadratureSpec(rel_tol=1e-8, abs_tol=0.0)
    fine = QuadratureSpec(rel_tol=5e-9, abs_tol=0.0, max_subdivisions=4000)
    v1, _ = integrate_kperp(f, spec, am, k0)
    v2, _ = integrate_kperp(f, fine, am, k0)
    assert v1 == pytest.approx(v2, rel=spec.rel_tol)


def test_sum_and_integral_commute_on_fixed_truncation():
    temperature, n_terms = 300.0, 12
    ap, am, b = 1.55e-6, 0.95e-6, 0.5e-6
    zetas = [m * matsubara_spacing(temperature) for m in range(n_terms)]
    al = MaterialModel.drude(2.2e16, 1.2e14)
    stack = Stack(al, al, MaterialModel.vacuum())
    datas = [interface_data(stack, z, zero_limit=(z == 0.0)) for z in zetas]
    weights = [0.5] + [1.0] * (n_terms - 1)

    def term(k, m):
        kg = np.sqrt(k * k + stack.gap.kappa_shift(zetas[m]))
        return k * kernels.integrand(kernels.MODE_DELTA, kg, datas[m], ap, am, b)

    top = 60 / am
    summed_integrals = math.fsum(w * adaptive_gk(lambda k, m=m: term(k, m), [0, top], 1e-12, 0.0, 4000)[0]
                                 for m, w in enumerate(weights))
    integral_of_sum = adaptive_gk(lambda k: sum(w * term(k, m) for m, w in enumerate(weights)), [0, top],
                                  1e-12, 0.0, 4000)[0]
    assert integral_of_sum == pytest.approx(summed_integrals, rel=1e-10)
