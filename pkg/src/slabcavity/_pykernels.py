"""Pure numpy integrand kernels; the reference the compiled kernels must reproduce."""
from __future__ import annotations

import numpy as np

from . import multilayer as ml

MODE_DIRECT = 0
MODE_DELTA = 1
MODE_A1 = 2
MODE_LIFSHITZ = 3
MODE_THICKNESS = 4
MODE_RESIDUAL = 5
MODE_GAP = 6
MODE_GAP_DERIV = 7
MODE_RESIDUAL_ABS = 8
MODE_RESIDUAL_K2 = 9


def _delta(kappa_i, kappa_g, gamma, fixed):
    if not np.isnan(fixed):
        return np.full_like(kappa_g, fixed)
    den = kappa_i + gamma * kappa_g
    safe = np.where(den == 0.0, 1.0, den)
    return np.where(den == 0.0, (1.0 - gamma) / (1.0 + gamma), (kappa_i - gamma * kappa_g) / safe)


def interface_coefficients(kappa_g, data):
    """(kappa_2, [(D1, D2) for TE, TM]) on the node array."""
    k1 = np.sqrt(np.maximum(kappa_g**2 + data.dk1, 0.0))
    k2 = np.sqrt(np.maximum(kappa_g**2 + data.dk2, 0.0))
    nan = np.nan
    te = (_delta(k1, kappa_g, data.g1te, nan), _delta(k2, kappa_g, data.g2te, nan))
    tm = (_delta(k1, kappa_g, data.g1tm, data.fix1tm), _delta(k2, kappa_g, data.g2tm, data.fix2tm))
    return k2, (te, tm)


def _lifshitz(d1, d2, kg, geom):
    """A_L sinh and B_L - A_L cosh = (1 - D1 D2 x+)(1 - D1 D2 x-)."""
    d12 = d1 * d2
    asinh = d12 * ml._diff_decay(kg, geom)
    den = ml.one_minus_r_decay(d12, kg, geom.a_plus) * ml.one_minus_r_decay(d12, kg, geom.a_minus)
    return asinh, den


def _per_pol(mode, d1, d2, kg, k2, geom):
    if mode == MODE_DIRECT:
        return ml.inv_d("-", d1, d2, kg, k2, geom) - ml.inv_d("+", d1, d2, kg, k2, geom)
    if mode == MODE_DELTA:
        return ml.delta_form_stable(d1, d2, kg, k2, geom)
    if mode == MODE_A1:
        return kg * ml.a1_form(d1, d2, kg, k2, geom.h, geom.b)
    if mode == MODE_LIFSHITZ:
        asinh, den = _lifshitz(d1, d2, kg, geom)
        return asinh / den
    if mode == MODE_THICKNESS:
        asinh, den = _lifshitz(d1, d2, kg, geom)
        y = ml.decay(2 * k2 * geom.b)
        # B_L - D2^2 - D1^2 e^{-2 kg h} = (1 - D2^2)(1 - D1^2 e^{-2 kg h})
        leak = (1.0 - d2 * d2) * ml.one_minus_r_decay(d1 * d1, kg, geom.h)
        return -y * asinh * leak / den**2
    if mode in (MODE_RESIDUAL, MODE_RESIDUAL_ABS, MODE_RESIDUAL_K2):
        res = (_per_pol(MODE_DELTA, d1, d2, kg, k2, geom) - _per_pol(MODE_LIFSHITZ, d1, d2, kg, k2, geom)
               - _per_pol(MODE_THICKNESS, d1, d2, kg, k2, geom))
        if mode == MODE_RESIDUAL:
            return res
        return np.abs(res) if mode == MODE_RESIDUAL_ABS else k2 * np.abs(res)
    if mode == MODE_GAP:
        x = d1 * d2 * ml.decay(2 * kg * geom.a_plus)
        return x / (1.0 - x)
    if mode == MODE_GAP_DERIV:
        x = d1 * d2 * ml.decay(2 * kg * geom.a_plus)
        return -2 * kg * x / (1.0 - x) ** 2
    raise ValueError(f"unknown kernel mode {mode}")


def integrand(mode, kappa_g, data, a_plus, a_minus, b):
    """kappa_g * sum_q kernel_q on an array of gap decay constants.

    Degenerate denominators raise :class:`NumericalDegeneracyError`.
    """
    kg = np.ascontiguousarray(kappa_g, dtype=float)
    geom = ml.CavityGeometry(a_plus, a_minus, b)
    k2, pols = interface_coefficients(kg, data)
    with np.errstate(over="ignore", invalid="ignore"):
        total = sum(_per_pol(mode, d1, d2, kg, k2, geom) for d1, d2 in pols)
    return kg * total
