"""Casimir pressure on the slab, its Taylor coefficient, and the thin-slab corrections.

Sign convention: positive pressure points from the a+ gap toward the a- gap,
and delta > 0 means a+ > a-. An attractive cavity therefore gives pressure
with the sign of delta.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import kernels
from .constants import C_LIGHT, HBAR, K_B
from .fresnel import Stack, interface_data
from .multilayer import CavityGeometry
from .spectral import MatsubaraSpec, QuadratureSpec, integrate_kperp, integrate_zeta, matsubara_sum

IDEAL_COEFF = HBAR * C_LIGHT * math.pi**2 / 240.0
A1_IDEAL_COEFF = 16.0 * HBAR * C_LIGHT * math.pi**2 / 15.0


@dataclass(frozen=True)
class ForceResult:
    """Pressure on the slab in N/m^2 (positive toward +z)."""

    pressure: float
    quadrature_error: float
    matsubara_terms: int
    temperature: float
    method: str = ""
    geometry: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TaylorCoefficient:
    """Linear force coefficient a1 in N/m^3, F = a1 * delta + O(delta^3)."""

    a1: float
    temperature: float
    h: float
    b: float
    quadrature_error: float = 0.0
    matsubara_terms: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _specs(temperature, qspec, mspec):
    if temperature < 0:
        raise ValueError("temperature must be >= 0 K")
    qspec = qspec or QuadratureSpec()
    if temperature > 0:
        if mspec is None:
            mspec = MatsubaraSpec(temperature)
        elif mspec.temperature != temperature:
            raise ValueError("MatsubaraSpec temperature does not match the requested temperature")
    return qspec, mspec


def spectral_integral(mode: int, stack: Stack, a_plus: float, a_minus: float, b: float, temperature: float,
                      length: float, abs_tol: float, qspec: Optional[QuadratureSpec] = None,
                      mspec: Optional[MatsubaraSpec] = None, n_terms: Optional[int] = None):
    """(1/pi) k_B T sum'_m I_m, or its zero-temperature limit (hbar/2 pi^2) int dzeta I(zeta).

    I(zeta) is the k_perp integral of the kernel ``mode`` (see
    :mod:`slabcavity.kernels`). ``abs_tol`` is in the units of the result.

    Returns
    -------
    (value, error_estimate, matsubara_terms)
    """
    qspec, mspec = _specs(temperature, qspec, mspec)
    err_acc = []

    def inner(zeta, spec, inner_abs):
        data = interface_data(stack, zeta, zero_limit=(zeta == 0.0))
        kappa_0 = math.sqrt(stack.gap.kappa_shift(zeta))

        def f(kg):
            return kernels.integrand(mode, kg, data, a_plus, a_minus, b)

        val, err = integrate_kperp(f, spec, length, kappa_0, abs_tol=inner_abs)
        err_acc.append(err)
        return val

    if temperature == 0:
        pref = HBAR / (2.0 * math.pi**2)
        outer_abs = abs_tol / pref
        zmax = qspec.tail_cutoff * C_LIGHT / length
        ispec = qspec.scaled(0.1)
        val, err = integrate_zeta(lambda z: inner(z, ispec, 0.1 * outer_abs / zmax), qspec, length,
                                  abs_tol=outer_abs)
        return pref * val, pref * err, 0

    pref = K_B * temperature / math.pi
    total, used = matsubara_sum(lambda z, m: inner(z, qspec, abs_tol / pref), mspec, n_terms=n_terms)
    err = pref * math.fsum(err_acc)
    return total / math.pi, err, used


def _result(mode, stack, geom, temperature, qspec, mspec, method, length=None):
    qspec_ = qspec or QuadratureSpec()
    val, err, used = spectral_integral(mode, stack, geom.a_plus, geom.a_minus, geom.b, temperature,
                                       length or geom.min_gap, qspec_.abs_tol, qspec_, mspec)
    return ForceResult(val, err, used, temperature, method, geom.describe())


def force_zero_T(geom: CavityGeometry, stack: Stack, qspec: Optional[QuadratureSpec] = None) -> ForceResult:
    """Zero-temperature pressure from the cavity factors 1/d^- - 1/d^+."""
    return _result(kernels.MODE_DIRECT, stack, geom, 0.0, qspec, None, "direct")


def force_finite_T(geom: CavityGeometry, stack: Stack, temperature: float, qspec: Optional[QuadratureSpec] = None,
                   mspec: Optional[MatsubaraSpec] = None) -> ForceResult:
    """Matsubara-sum pressure from the cavity factors 1/d^- - 1/d^+."""
    if not temperature > 0:
        raise ValueError("force_finite_T needs T > 0; use force_zero_T")
    return _result(kernels.MODE_DIRECT, stack, geom, temperature, qspec, mspec, "direct")


def force_delta_form(h: float, b: float, delta: float, stack: Stack, temperature: float,
                     qspec: Optional[QuadratureSpec] = None, mspec: Optional[MatsubaraSpec] = None) -> ForceResult:
    """Pressure from the A sinh / (B - A cosh) form; ``temperature = 0`` integrates over zeta."""
    geom = CavityGeometry.from_delta(h, b, delta)
    return _result(kernels.MODE_DELTA, stack, geom, temperature, qspec, mspec, "delta_form")


def force_lifshitz_difference(h: float, delta: float, stack: Stack, temperature: float,
                              qspec: Optional[QuadratureSpec] = None,
                              mspec: Optional[MatsubaraSpec] = None) -> ForceResult:
    """Difference of the two single-gap Lifshitz pressures (opaque slab)."""
    # b only enters through e^{-2 kappa_2 b}, which this kernel drops
    geom = CavityGeometry.from_delta(h, h, delta)
    res = _result(kernels.MODE_LIFSHITZ, stack, geom, temperature, qspec, mspec, "lifshitz_difference")
    g = dict(res.geometry)
    g.pop("b"), g.pop("c")
    return ForceResult(res.pressure, res.quadrature_error, res.matsubara_terms, temperature, res.method, g)


def penetration_factor(stack: Stack, b: float, length: float, temperature: float = 0.0) -> float:
    """Rough e^{-2 kappa_2 b} at k_perp = 1/(2 length) and the first Matsubara frequency."""
    zeta = MatsubaraSpec(temperature).spacing if temperature > 0 else C_LIGHT / (2 * length)
    k2 = math.sqrt((0.5 / length) ** 2 + stack.slab.kappa_shift(zeta))
    return math.exp(-2 * k2 * b)


def thickness_correction(h: float, b: float, delta: float, stack: Stack, temperature: float,
                         qspec: Optional[QuadratureSpec] = None, mspec: Optional[MatsubaraSpec] = None,
                         warn_above: float = 0.1) -> ForceResult:
    """First-order correction for radiation leaking through a slab of thickness ``b``."""
    geom = CavityGeometry.from_delta(h, b, delta)
    pf = penetration_factor(stack, b, geom.min_gap, temperature)
    if pf > warn_above:
        warnings.warn(f"slab is not opaque (e^(-2 kappa_2 b) ~ {pf:.2g}); first-order correction is unreliable",
                      RuntimeWarning, stacklevel=2)
    return _result(kernels.MODE_THICKNESS, stack, geom, temperature, qspec, mspec, "thickness_correction")


@dataclass(frozen=True)
class ThicknessResidual:
    """F - F_L - dF computed pointwise, and the residual-weighted mean kappa_2 (1/m)."""

    residual: float
    quadrature_error: float
    kappa_bar: float
    b: float


def thickness_residual(h: float, b: float, delta: float, stack: Stack, temperature: float,
                       qspec: Optional[QuadratureSpec] = None, mspec: Optional[MatsubaraSpec] = None,
                       with_kappa_bar: bool = True, noise_floor: float = 1e-12) -> ThicknessResidual:
    """Residual of the first-order thickness expansion.

    The residual is a difference of O(1) kernel pieces, so where it vanishes
    (a perfectly reflecting slab at zeta = 0) only roundoff is left. The
    absolute floor is therefore ``noise_floor * |F|`` with F the full pressure.
    """
    geom = CavityGeometry.from_delta(h, b, delta)
    qspec = qspec or QuadratureSpec()
    full = force_delta_form(h, b, delta, stack, temperature, qspec, mspec).pressure
    floor = max(qspec.abs_tol, noise_floor * abs(full))
    args = (stack, geom.a_plus, geom.a_minus, geom.b, temperature, geom.min_gap)
    res, err, _ = spectral_integral(kernels.MODE_RESIDUAL, *args, floor, qspec, mspec)
    kbar = math.nan
    if with_kappa_bar:
        w, _, _ = spectral_integral(kernels.MODE_RESIDUAL_ABS, *args, floor, qspec, mspec)
        wk, _, _ = spectral_integral(kernels.MODE_RESIDUAL_K2, *args, floor / geom.min_gap, qspec, mspec)
        kbar = wk / w if w else math.nan
    return ThicknessResidual(res, err, kbar, b)


def taylor_a1(h: float, b: float, stack: Stack, temperature: float, qspec: Optional[QuadratureSpec] = None,
              mspec: Optional[MatsubaraSpec] = None) -> TaylorCoefficient:
    """Slope a1 of F(delta) at delta = 0 from the A / (B - A) integrand."""
    qspec = qspec or QuadratureSpec()
    # kernel normalisation is (1/pi) k_B T sum'; a1 carries an extra factor 2
    val, err, used = spectral_integral(kernels.MODE_A1, stack, h / 2, h / 2, b, temperature, h / 2,
                                       qspec.abs_tol / h, qspec, mspec)
    return TaylorCoefficient(2 * val, temperature, h, b, 2 * err, used)


def casimir_ideal(h: float, delta: float) -> float:
    """Perfect-conductor pressure on a perfectly reflecting opaque slab, N/m^2."""
    if not h > 0:
        raise ValueError("h must be > 0")
    if not abs(delta) < h / 2:
        raise ValueError("|delta| must be < h/2")
    return IDEAL_COEFF * ((h / 2 - delta) ** -4 - (h / 2 + delta) ** -4)


def a1_ideal(h: float) -> float:
    """Perfect-conductor Taylor coefficient 16 hbar c pi^2 / (15 h^5), N/m^3."""
    if not h > 0:
        raise ValueError("h must be > 0")
    return A1_IDEAL_COEFF * h**-5


def lifshitz_pressure(a: float, stack: Stack, temperature: float, qspec: Optional[QuadratureSpec] = None,
                      mspec: Optional[MatsubaraSpec] = None, derivative: bool = False) -> ForceResult:
    """Magnitude of the attractive single-gap pressure between wall and opaque slab at separation ``a``.

    With ``derivative=True`` returns d|F|/da instead (N/m^3).
    """
    if not a > 0:
        raise ValueError("a must be > 0")
    qspec = qspec or QuadratureSpec()
    mode = kernels.MODE_GAP_DERIV if derivative else kernels.MODE_GAP
    val, err, used = spectral_integral(mode, stack, a, a, a, temperature, a, qspec.abs_tol, qspec, mspec)
    return ForceResult(val, err, used, temperature, "single_gap_derivative" if derivative else "single_gap",
                       {"a": a})
