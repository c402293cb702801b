"""Quadrature over transverse wavenumber and frequency, and Matsubara summation.

The adaptive integrator is a vectorised globally-adaptive Gauss-Kronrod
(7/15 point) rule: every refinement pass evaluates the integrand once on the
nodes of all newly created panels, and bisects the panels carrying more than
their share of the error budget.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .constants import C_LIGHT, HBAR, K_B

# Kronrod abscissae on [-1, 1] (non-negative half, descending) and weights.
# Odd-indexed abscissae (1, 3, 5, 7 counting from 0) are the 7-point Gauss nodes.
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-node layout on [-1, 1]
_NODES = np.concatenate([-XGK[:-1], XGK[::-1]])
_WK = np.concatenate([WGK[:-1], WGK[::-1]])
_WG = np.zeros(15)
_gauss_pos = [1, 3, 5, 7]
for _i, _w in zip(_gauss_pos, WG):
    _WG[_i] = _w
    _WG[14 - _i] = _w


class ConvergenceError(RuntimeError):
    """Raised when an adaptive routine exhausts its budget.

    ``partial`` holds the best available value and ``error`` its estimate.
    """

    def __init__(self, message, partial=math.nan, error=math.inf, terms=None):
        super().__init__(message)
        self.partial = partial
        self.error = error
        self.terms = terms


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the nested k_perp / zeta quadrature.

    Attributes
    ----------
    rel_tol : float
        Relative error target of each adaptive integral.
    abs_tol : float
        Absolute floor, in N/m^2 of the final pressure.
    max_subdivisions : int
        Panel bisections allowed per integral.
    tail_cutoff : float
        Integration stops at kappa_g * (gap scale) = kappa_0 * (gap scale) + tail_cutoff.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-16
    max_subdivisions: int = 2000
    tail_cutoff: float = 60.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be >= 0")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.tail_cutoff >= 30:
            raise ValueError("tail_cutoff must be >= 30")

    def scaled(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor, self.max_subdivisions, self.tail_cutoff)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MatsubaraSpec:
    temperature: float
    max_terms: int = 5000
    term_rel_tol: float = 1e-10
    zero_term_weight: float = 0.5
    consecutive: int = 3

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0 K for a Matsubara sum")
        if self.zero_term_weight != 0.5:
            raise ValueError("the zero-frequency term carries weight 1/2")
        if int(self.max_terms) < 1 or int(self.consecutive) < 1:
            raise ValueError("max_terms and consecutive must be >= 1")
        if not self.term_rel_tol > 0:
            raise ValueError("term_rel_tol must be > 0")

    @property
    def spacing(self) -> float:
        """zeta_1 = 2 pi k_B T / hbar in rad/s."""
        return matsubara_spacing(self.temperature)

    def frequency(self, m: int) -> float:
        return m * self.spacing

    def as_dict(self) -> dict:
        return asdict(self)


def matsubara_spacing(temperature: float) -> float:
    return 2.0 * math.pi * K_B * temperature / HBAR


def _panel_eval(f, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("integrand returned non-finite values")
    k = half * (y @ _WK)
    g = half * (y @ _WG)
    return k, np.abs(k - g)


def adaptive_gk(f: Callable, breakpoints, rel_tol: float, abs_tol: float, max_subdivisions: int):
    """Integrate the vectorised ``f`` over [breakpoints[0], breakpoints[-1]].

    Returns ``(value, error_estimate, subdivisions)`` with
    ``error_estimate <= max(abs_tol, rel_tol * |value|)``.
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if pts.size < 2:
        return 0.0, 0.0, 0
    lo, hi = pts[:-1], pts[1:]
    val, err = _panel_eval(f, lo, hi)
    splits = 0
    while True:
        total = math.fsum(val)
        total_err = math.fsum(err)
        tol = max(abs_tol, rel_tol * abs(total))
        if total_err <= tol:
            return total, total_err, splits
        # bisect every panel above its equal share of the budget
        bad = err > tol / err.size
        nbad = int(bad.sum())
        if splits + nbad > max_subdivisions:
            raise ConvergenceError(
                f"adaptive quadrature did not converge within {max_subdivisions} subdivisions "
                f"(estimate {total!r}, error {total_err!r}, target {tol!r})",
                partial=total, error=total_err,
            )
        splits += nbad
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[bad], mid])
        new_hi = np.concatenate([mid, hi[bad]])
        nv, ne = _panel_eval(f, new_lo, new_hi)
        keep = ~bad
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


_KPERP_BREAKS = np.array([0.0, 0.5, 1.5, 4.0, 10.0, 25.0])


def integrate_kperp(integrand: Callable, spec: QuadratureSpec, length: float, kappa_0: float = 0.0,
                    abs_tol: Optional[float] = None):
    """Integral over k_perp >= 0 of k_perp * integrand(kappa_g).

    ``integrand`` takes an array of gap decay constants kappa_g (1/m);
    kappa_g**2 = k_perp**2 + kappa_0**2 turns k dk into kappa_g d kappa_g.
    The integration variable is t = kappa_g * length, truncated at
    t = kappa_0 * length + tail_cutoff.

    Parameters
    ----------
    length : float
        Gap scale setting the exponential decay, normally min(a+, a-).
    abs_tol : float, optional
        Absolute tolerance in the units of the returned integral; defaults
        to ``spec.abs_tol``.

    Returns
    -------
    (value, error_estimate)
    """
    if not length > 0:
        raise ValueError("length must be > 0")
    t0 = kappa_0 * length
    inv = 1.0 / length

    def g(t):
        kg = t * inv
        return kg * inv * integrand(kg)

    brk = t0 + np.append(_KPERP_BREAKS, spec.tail_cutoff)
    value, err, _ = adaptive_gk(g, brk, spec.rel_tol, spec.abs_tol if abs_tol is None else abs_tol,
                                spec.max_subdivisions)
    return value, err


def integrate_zeta(per_frequency: Callable, spec: QuadratureSpec, length: float, abs_tol: Optional[float] = None):
    """Integral over zeta in [0, tail_cutoff * c / length] of a scalar function.

    ``per_frequency`` is called with one float at a time.
    """
    if not length > 0:
        raise ValueError("length must be > 0")
    zmax = spec.tail_cutoff * C_LIGHT / length
    scale = C_LIGHT / length

    def g(z):
        return np.array([per_frequency(float(zi)) for zi in z])

    brk = np.append(scale * _KPERP_BREAKS, zmax)
    value, err, _ = adaptive_gk(g, brk, spec.rel_tol, spec.abs_tol if abs_tol is None else abs_tol,
                                spec.max_subdivisions)
    return value, err


def matsubara_sum(per_frequency: Callable, spec: MatsubaraSpec, n_terms: Optional[int] = None):
    """k_B T times the primed sum over m >= 0 of per_frequency(zeta_m, m).

    The m = 0 term is weighted by 1/2 and evaluated at exactly zeta = 0; the
    callable decides how to take the static limit. Summation stops after
    ``spec.consecutive`` successive terms satisfy
    |term| <= term_rel_tol * |partial sum|, or after exactly ``n_terms``
    terms when that is given.

    Returns
    -------
    (value, terms_used)
    """
    step = spec.spacing
    terms = [spec.zero_term_weight * per_frequency(0.0, 0)]
    if n_terms is not None:
        for m in range(1, int(n_terms)):
            terms.append(per_frequency(m * step, m))
        return K_B * spec.temperature * math.fsum(terms), len(terms)
    quiet = 0
    partial = terms[0]
    m = 0
    while True:
        m += 1
        if m >= spec.max_terms:
            raise ConvergenceError(
                f"Matsubara sum not converged after {spec.max_terms} terms at T={spec.temperature} K "
                f"(last term {terms[-1]!r}, partial {partial!r})",
                partial=K_B * spec.temperature * math.fsum(terms), error=abs(terms[-1]) * K_B * spec.temperature,
                terms=len(terms),
            )
        term = per_frequency(m * step, m)
        terms.append(term)
        partial = math.fsum(terms) if m % 64 == 0 else partial + term
        if abs(term) <= spec.term_rel_tol * abs(partial):
            quiet += 1
            if quiet >= spec.consecutive:
                break
        else:
            quiet = 0
    return K_B * spec.temperature * math.fsum(terms), len(terms)
