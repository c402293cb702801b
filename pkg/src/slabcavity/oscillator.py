"""Spring-mounted slab in the cavity: eigenfrequency shift, harmonic region, open vs closed geometry."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .force import IDEAL_COEFF, force_delta_form, lifshitz_pressure, taylor_a1
from .fresnel import Stack
from .spectral import MatsubaraSpec, QuadratureSpec


class InstabilityError(ValueError):
    """The spring is too soft: k <= a1 leaves no stable equilibrium at the midline."""


@dataclass(frozen=True)
class OscillatorSetup:
    """Spring constant per unit area (N/m^3) and slab mass per unit area (kg/m^2).

    The cavity enters only through ``a1``; ``from_cavity`` computes it.
    """

    k_spring: float
    m_area: float
    a1: float = 0.0
    temperature: float = 0.0

    def __post_init__(self):
        if not self.k_spring > 0:
            raise ValueError("k_spring must be > 0")
        if not self.m_area > 0:
            raise ValueError("m_area must be > 0")

    @classmethod
    def from_cavity(cls, k_spring, m_area, h, b, stack: Stack, temperature, qspec=None, mspec=None):
        a1 = taylor_a1(h, b, stack, temperature, qspec, mspec).a1
        return cls(k_spring, m_area, a1, temperature)

    @property
    def omega0(self) -> float:
        return math.sqrt(self.k_spring / self.m_area)


@dataclass(frozen=True)
class FrequencyShift:
    omega0: float
    omega: float
    shift: float
    shift_first_order: float
    difference: float
    weak_coupling: bool

    def as_dict(self):
        return asdict(self)


def eigenfrequency(setup: OscillatorSetup) -> float:
    """sqrt((k - a1) / m) in rad/s."""
    if setup.k_spring <= setup.a1:
        raise InstabilityError(
            f"k_spring = {setup.k_spring:g} N/m^3 does not exceed a1 = {setup.a1:g} N/m^3; "
            "the midline is not a stable equilibrium"
        )
    return math.sqrt((setup.k_spring - setup.a1) / setup.m_area)


def frequency_shift(setup: OscillatorSetup) -> FrequencyShift:
    """Omega0 - Omega exactly and to first order, a1 / (2 sqrt(k m))."""
    omega = eigenfrequency(setup)
    omega0 = setup.omega0
    # Omega0 - Omega = Omega0 (1 - sqrt(1 - a1/k)), written without cancellation
    r = setup.a1 / setup.k_spring
    exact = omega0 * r / (1.0 + math.sqrt(1.0 - r))
    first = setup.a1 / (2.0 * math.sqrt(setup.k_spring * setup.m_area))
    weak = setup.k_spring >= 10 * abs(setup.a1)
    if not weak:
        warnings.warn("k_spring < 10 a1: the first-order shift is a poor approximation", RuntimeWarning, stacklevel=2)
    return FrequencyShift(omega0, omega, exact, first, exact - first, weak)


def power_law_force(h: float, delta, coeff: float = IDEAL_COEFF, sigma: float = 4.0):
    """coeff [(h/2 - delta)^-sigma - (h/2 + delta)^-sigma], the opaque-slab cavity force for F_L ~ d^-sigma."""
    delta = np.asarray(delta, dtype=float)
    return coeff * ((h / 2 - delta) ** -sigma - (h / 2 + delta) ** -sigma)


def power_law_a1(h: float, coeff: float = IDEAL_COEFF, sigma: float = 4.0) -> float:
    return 2.0 * sigma * coeff * (h / 2) ** (-sigma - 1)


def harmonic_region_fn(force: Callable[[float], float], a1: float, h: float, accuracy: float,
                       n_grid: int = 48, bisect_steps: int = 30, lo_frac: float = 1e-4,
                       hi_frac: float = 0.49) -> float:
    """Largest delta* with |F(delta) - a1 delta| / |F(delta)| <= accuracy on every sample up to delta*.

    Samples a geometric grid on [lo_frac h, hi_frac h], then bisects between
    the last passing and first failing sample. Returns 0 if the first sample
    already fails.
    """
    if not 0 < accuracy < 0.5:
        raise ValueError("accuracy must lie in (0, 0.5)")

    def ok(d):
        f = force(d)
        return f != 0 and abs(f - a1 * d) <= accuracy * abs(f)

    grid = np.geomspace(lo_frac * h, hi_frac * h, n_grid)
    good = 0.0
    for d in grid:
        if not ok(d):
            bad = float(d)
            break
        good = float(d)
    else:
        return good
    if good == 0.0:
        return 0.0
    for _ in range(bisect_steps):
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def harmonic_region(h: float, b: float, stack: Stack, temperature: float, accuracy: float,
                    qspec: Optional[QuadratureSpec] = None, mspec: Optional[MatsubaraSpec] = None,
                    **grid) -> float:
    """Harmonic region for the full dispersive force."""
    a1 = taylor_a1(h, b, stack, temperature, qspec, mspec).a1
    return harmonic_region_fn(lambda d: force_delta_form(h, b, d, stack, temperature, qspec, mspec).pressure,
                              a1, h, accuracy, **grid)


@dataclass(frozen=True)
class GeometryComparison:
    """Expansion coefficients and nonharmonic corrections for slab-in-cavity vs slab near one wall.

    ``f_l`` is |F_L(a)|, the single-gap pressure magnitude at the equilibrium
    gap ``a``. For F_L ~ d^-4 the closed force is -(k a - 8 f_l) x + 40 f_l x^3
    and the open one -(k a - 4 f_l) x - 10 f_l x^2, with x = delta / a.
    """

    a: float
    k_spring: float
    f_l: float
    closed_linear: float
    open_linear: float
    closed_cubic: float
    open_quadratic: float
    delta: list
    closed_correction: list
    open_correction: list
    source: str

    @property
    def linear_ratio(self) -> float:
        return self.closed_linear / self.open_linear

    def fitted_coefficients(self) -> tuple:
        """Least-squares c in closed ~ c x^2 and open ~ c x over the nonzero grid points, x = delta / a."""
        x = np.asarray(self.delta, dtype=float) / self.a
        keep = x != 0
        if not keep.any():
            return math.nan, math.nan
        x = x[keep]
        closed = np.asarray(self.closed_correction, dtype=float)[keep]
        opened = np.asarray(self.open_correction, dtype=float)[keep]
        return float(x**2 @ closed / (x**2 @ x**2)), float(x @ opened / (x @ x))

    def as_dict(self):
        d = asdict(self)
        d["linear_ratio"] = self.linear_ratio
        return d


def _corrections(pressure: Callable[[float], float], a: float, delta_grid):
    """(F_c - F_lin) / F_c for the Casimir part of both configurations.

    closed: F_c = P(a - d) - P(a + d); open: F_c = P(a) - P(a + d), d measured away from the wall.
    The linear parts use the exact slopes 2|P'(a)| and |P'(a)|.
    """
    p0 = pressure(a)
    dp = pressure.neg_slope(a)
    closed, opened = [], []
    for d in delta_grid:
        if d == 0:
            closed.append(0.0)
            opened.append(0.0)
            continue
        fc = pressure(a - d) - pressure(a + d)
        fo = p0 - pressure(a + d)
        closed.append((fc - 2 * dp * d) / fc)
        opened.append((fo - dp * d) / fo)
    return closed, opened


class _PowerLaw:
    def __init__(self, coeff, sigma):
        self.coeff, self.sigma = coeff, sigma

    def __call__(self, d):
        return self.coeff * d**-self.sigma

    def neg_slope(self, d):
        return self.sigma * self.coeff * d ** (-self.sigma - 1)


class _Dispersive:
    def __init__(self, stack, temperature, qspec, mspec):
        self.args = (stack, temperature, qspec, mspec)

    def __call__(self, d):
        return lifshitz_pressure(d, *self.args).pressure

    def neg_slope(self, d):
        return -lifshitz_pressure(d, *self.args, derivative=True).pressure


def open_vs_closed(a: float, k_spring: float, delta_grid: Sequence[float], stack: Optional[Stack] = None,
                   temperature: float = 0.0, qspec=None, mspec=None, sigma: float = 4.0) -> GeometryComparison:
    """Compare the closed cavity (slab between two walls) with the open one (slab near one wall).

    Without ``stack`` the single-gap pressure is the ideal-conductor power
    law; with it, the dispersive single-gap pressure is used.
    """
    if not a > 0:
        raise ValueError("a must be > 0")
    grid = [float(d) for d in delta_grid]
    if any(abs(d) >= a for d in grid):
        raise ValueError("|delta| must be < a")
    if stack is None:
        pressure = _PowerLaw(IDEAL_COEFF, sigma)
        source = f"power_law_sigma_{sigma:g}"
    else:
        pressure = _Dispersive(stack, temperature, qspec, mspec)
        source = "dispersive"
    f_l = pressure(a)
    if k_spring * a <= 8 * f_l:
        warnings.warn("spring too soft for a stable closed-cavity midline", RuntimeWarning, stacklevel=2)
    closed, opened = _corrections(pressure, a, grid)
    return GeometryComparison(a, k_spring, f_l, 8 * f_l / a, 4 * f_l / a, 40 * f_l / a**3, -10 * f_l / a**2,
                              grid, closed, opened, source)
