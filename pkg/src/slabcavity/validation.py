"""Self-checks run by ``slabcavity validate``: oracle agreement, series identity and dual-path kernels."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import greens_oracle as go
from .constants import C_LIGHT
from .fresnel import SpectralPoint, Stack, interface_data
from .multilayer import (CavityGeometry, delta_form_stable, geometric_series_check, inv_d, inv_d_gap,
                         inv_d_three_layer)
from . import kernels
from ._pykernels import interface_coefficients


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _rel(a, b, floor: float = 0.0):
    """max |a - b| over the larger of max |a|, max |b| and ``floor``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), floor)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b))) / scale


def random_draws(n: int, seed: int = 20240607, stack: Stack | None = None, h_range=(0.2e-6, 3e-6),
                 max_decay: float = 3.0, light_span: float = 10.0):
    """(zeta, k_perp, geometry) triples with kappa_g * max(a+, a-) in [0.05, max_decay].

    The force integrand is concentrated at kappa_g a of order one; far beyond
    ``max_decay`` the cavity part of the Green's function drops below the
    roundoff of its own z+z' terms and cannot be certified in double precision.
    zeta is drawn within a factor ``light_span`` below the light line
    c kappa_g, because the magnetic stress terms carry (c kappa_g / zeta)^2
    and amplify roundoff by that much.
    """
    rng = np.random.default_rng(seed)
    shift = (lambda z: stack.gap.kappa_shift(z)) if stack is not None else (lambda z: (z / C_LIGHT) ** 2)
    out = []
    for _ in range(n):
        h = rng.uniform(*h_range)
        b = h * 10 ** rng.uniform(-2, 0)
        delta = rng.uniform(-0.4, 0.4) * h
        geom = CavityGeometry.from_delta(h, b, delta)
        a = max(geom.a_plus, geom.a_minus)
        kappa_g = 10 ** rng.uniform(math.log10(0.05), math.log10(max_decay)) / a
        # pick zeta below the light line of this kappa_g, then k_perp closes the gap
        zmax = 0.99 * kappa_g * C_LIGHT / math.sqrt(max(shift(C_LIGHT) / C_LIGHT**2, 1.0))
        zeta = 10 ** rng.uniform(math.log10(zmax / light_span), math.log10(zmax))
        k_perp = math.sqrt(max(kappa_g**2 - shift(zeta), 0.0))
        out.append((float(zeta), float(k_perp), geom))
    return out


def oracle_suite(stack: Stack, n_draws: int = 20, seed: int = 20240607, tol: float = 1e-10,
                 delta_sign: float = 1.0):
    """Boundary-value solve vs closed forms (TM, TE, g_zz) and the stress cancellation, both gaps."""
    worst = {"tm": 0.0, "te": 0.0, "zz": 0.0, "stress_sum": 0.0, "stress_effective": 0.0,
             "stress_term_scale": 0.0}
    for zeta, k_perp, geom in random_draws(n_draws, seed, stack):
        point = SpectralPoint.at(zeta, k_perp, stack)
        for side in "+-":
            tm = go.solve_tm(point, geom, stack, side=side)
            te = go.solve_te(point, geom, stack, side=side)
            mxx, myy, mzz = go.closed_form_kernels(point, geom, stack, side, delta_sign=delta_sign)
            worst["tm"] = max(worst["tm"], _rel(tm.kernel, mxx, abs(tm.prefactor)))
            worst["te"] = max(worst["te"], _rel(te.kernel, myy, abs(te.prefactor)))
            zz_floor = (k_perp / tm.kappa) ** 2 * abs(tm.prefactor)
            worst["zz"] = max(worst["zz"], _rel(go.g_zz_from_relations(tm, k_perp), mzz, zz_floor))
            chk = go.stress_cancellation_check(point, geom, stack, side=side, delta_sign=delta_sign)
            worst["stress_sum"] = max(worst["stress_sum"], chk.sum_residual)
            worst["stress_effective"] = max(worst["stress_effective"], chk.effective_mismatch)
            worst["stress_term_scale"] = max(worst["stress_term_scale"], chk.term_residual)
    return [CheckResult(f"oracle_{k}", v, tol, v <= tol, {"draws": n_draws}) for k, v in worst.items()]


def series_suite(tol: float = 1e-12):
    """Partial sums of (r_L r_R e^{-2 kappa a})^n against the closed 1/d for ratios up to 0.9."""
    worst = 0.0
    for ratio in (0.1, 0.5, 0.75, 0.9, -0.9):
        kg, gap = 1.0, 0.5
        rr = ratio / math.exp(-2 * kg * gap)
        # split the product over two reflection coefficients
        r_left = math.copysign(math.sqrt(abs(rr)), rr)
        r_right = math.sqrt(abs(rr))
        n = int(math.ceil(math.log(1e-17) / math.log(abs(ratio)))) + 10
        partial = geometric_series_check(r_left, r_right, kg, gap, n)
        exact = inv_d_gap(r_left, r_right, kg, gap)
        worst = max(worst, abs(partial - exact) / abs(exact))
    return [CheckResult("geometric_series", worst, tol, worst <= tol)]


def dual_path_suite(stack: Stack, n_draws: int = 20, seed: int = 7, tol: float = 1e-10):
    """Literal 1/d^- - 1/d^+ vs the delta form, three-layer reduction, and compiled vs pure kernels."""
    worst_delta, worst_three, worst_backend = 0.0, 0.0, 0.0
    for zeta, k_perp, geom in random_draws(n_draws, seed, stack):
        point = SpectralPoint.at(zeta, k_perp, stack)
        data = interface_data(stack, zeta)
        k2, pols = interface_coefficients(np.array([point.kappa_g]), data)
        for d1, d2 in pols:
            d1, d2 = float(d1[0]), float(d2[0])
            direct = (inv_d("-", d1, d2, point.kappa_g, point.kappa_2, geom)
                      - inv_d("+", d1, d2, point.kappa_g, point.kappa_2, geom))
            stable = delta_form_stable(d1, d2, point.kappa_g, point.kappa_2, geom)
            # the literal path subtracts two cavity factors, so its roundoff scales with them
            scale = max(abs(inv_d("-", d1, d2, point.kappa_g, point.kappa_2, geom)),
                        abs(inv_d("+", d1, d2, point.kappa_g, point.kappa_2, geom)), 1e-300)
            worst_delta = max(worst_delta, abs(direct - stable) / scale)
            # slab of gap material: Delta_2 = 0 and kappa_2 = kappa_g
            three = inv_d("+", d1, 0.0, point.kappa_g, point.kappa_g, geom)
            ref = inv_d_three_layer(d1, point.kappa_g, geom.c)
            worst_three = max(worst_three, abs(three - ref) / max(abs(ref), 1e-300))
        kg = np.geomspace(1e-3, 40, 64) / geom.min_gap
        if kernels.BACKEND == "cython":
            # the literal 1/d^- - 1/d^+ cancels near delta = 0; it is checked above on its own scale
            for mode in (kernels.MODE_DELTA, kernels.MODE_LIFSHITZ, kernels.MODE_THICKNESS, kernels.MODE_A1,
                         kernels.MODE_GAP):
                a = kernels.integrand(mode, kg, data, geom.a_plus, geom.a_minus, geom.b)
                b = kernels.integrand(mode, kg, data, geom.a_plus, geom.a_minus, geom.b, backend="python")
                worst_backend = max(worst_backend, _rel(a, b))
    return [
        CheckResult("direct_vs_delta_form", worst_delta, tol, worst_delta <= tol),
        CheckResult("three_layer_reduction", worst_three, 1e-12, worst_three <= 1e-12),
        CheckResult("compiled_vs_python_kernels", worst_backend, tol, worst_backend <= tol,
                    {"backend": kernels.BACKEND}),
    ]


def run_all(stack: Stack, n_draws: int = 20, seed: int = 20240607, delta_sign: float = 1.0):
    return (oracle_suite(stack, n_draws, seed, delta_sign=delta_sign) + series_suite()
            + dual_path_suite(stack, n_draws, seed + 1))
