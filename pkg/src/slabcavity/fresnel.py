"""Decay constants and single-interface reflection coefficients at imaginary frequency.

Interfaces are indexed as in the cavity: ``i = 1`` is wall|gap, ``i = 2`` is
slab|gap. ``delta`` returns the coefficient

    Delta_iq = (kappa_i - gamma_iq kappa_g) / (kappa_i + gamma_iq kappa_g),
    gamma_TE = mu_i / mu_g,   gamma_TM = eps_i / eps_g,

whose negative is the usual Fresnel amplitude seen from the gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import C_LIGHT
from .dispersion import MaterialModel, zero_freq_limits

TE = "TE"
TM = "TM"
POLARIZATIONS = (TE, TM)


class FresnelError(ValueError):
    pass


@dataclass(frozen=True)
class Stack:
    """Materials of the five-zone cavity: walls (1), slab (2) and the gap fill (g)."""

    wall: MaterialModel
    slab: MaterialModel
    gap: MaterialModel

    def material(self, i: int) -> MaterialModel:
        if i == 1:
            return self.wall
        if i == 2:
            return self.slab
        raise FresnelError(f"interface index must be 1 or 2, got {i}")

    def describe(self) -> dict:
        return {"wall": self.wall.describe(), "slab": self.slab.describe(), "gap": self.gap.describe()}


def kappa(zeta, k_perp, eps, mu):
    """``sqrt(k_perp**2 + eps mu zeta**2 / c**2)`` in rad/m."""
    if np.any(np.asarray(zeta) < 0) or np.any(np.asarray(k_perp) < 0):
        raise FresnelError("zeta and k_perp must be >= 0")
    if np.any(np.asarray(eps) < 0) or np.any(np.asarray(mu) <= 0):
        raise FresnelError("eps must be >= 0 and mu > 0")
    zeta = np.asarray(zeta, dtype=float)
    k_perp = np.asarray(k_perp, dtype=float)
    shift = np.where(zeta > 0, eps * mu * np.where(zeta > 0, zeta, 0.0) ** 2, 0.0) / C_LIGHT**2
    out = np.sqrt(k_perp**2 + shift)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectralPoint:
    zeta: float
    k_perp: float
    kappa_g: float
    kappa_1: float
    kappa_2: float

    @classmethod
    def at(cls, zeta: float, k_perp: float, stack: Stack) -> "SpectralPoint":
        if zeta < 0 or k_perp < 0:
            raise FresnelError("zeta and k_perp must be >= 0")
        k2 = k_perp * k_perp
        return cls(
            float(zeta),
            float(k_perp),
            math.sqrt(k2 + stack.gap.kappa_shift(zeta)),
            math.sqrt(k2 + stack.wall.kappa_shift(zeta)),
            math.sqrt(k2 + stack.slab.kappa_shift(zeta)),
        )

    def kappa_i(self, i: int) -> float:
        return self.kappa_1 if i == 1 else self.kappa_2


class ReflectionPair(NamedTuple):
    delta_te: float
    delta_tm: float


def _static_tm_gamma(mat: MaterialModel, gap: MaterialModel) -> float:
    """Limit of eps_i/eps_g as zeta -> 0+, possibly 0 or inf."""
    li, lg = zero_freq_limits(mat), zero_freq_limits(gap)
    if li.eps_order > lg.eps_order:
        return math.inf
    if li.eps_order < lg.eps_order:
        return 0.0
    return li.eps_coefficient / lg.eps_coefficient


def _from_gamma(k_i, k_g, gamma):
    if math.isinf(gamma):
        return -1.0
    den = k_i + gamma * k_g
    if den == 0.0:
        # zeta = k_perp = 0: kappa_i / kappa_g -> 1
        return (1.0 - gamma) / (1.0 + gamma)
    return (k_i - gamma * k_g) / den


def tm_gamma(i: int, zeta: float, stack: Stack, zero_limit: bool = False) -> float:
    mat, gap = stack.material(i), stack.gap
    if zeta == 0.0 and (mat.is_singular or gap.is_singular):
        if not zero_limit:
            raise FresnelError(
                f"zeta = 0 with a singular model ({mat.kind}/{gap.kind}); request the static limit explicitly"
            )
        return _static_tm_gamma(mat, gap)
    return float(mat.eps(zeta)) / float(gap.eps(zeta))


def delta(i: int, q: str, point: SpectralPoint, stack: Stack, zero_limit: bool = False) -> float:
    """Single-interface coefficient Delta_{i,q} at ``point``.

    At ``zeta == 0`` with a Drude or plasma material the TM coefficient is
    only defined as a limit; pass ``zero_limit=True`` to get it.
    """
    mat, gap = stack.material(i), stack.gap
    k_i = point.kappa_i(i)
    if q == TE:
        gamma = mat.mu / gap.mu
    elif q == TM:
        gamma = tm_gamma(i, point.zeta, stack, zero_limit)
    else:
        raise FresnelError(f"unknown polarization {q!r}")
    return _from_gamma(k_i, point.kappa_g, gamma)


def reflection_pair(i: int, point: SpectralPoint, stack: Stack, zero_limit: bool = False) -> ReflectionPair:
    return ReflectionPair(delta(i, TE, point, stack, zero_limit), delta(i, TM, point, stack, zero_limit))


def delta_array(kappa_i, kappa_g, gamma):
    """Vectorised Delta for arrays of decay constants at one frequency."""
    kappa_i = np.asarray(kappa_i, dtype=float)
    kappa_g = np.asarray(kappa_g, dtype=float)
    if math.isinf(gamma):
        return np.full(np.broadcast(kappa_i, kappa_g).shape, -1.0)
    return (kappa_i - gamma * kappa_g) / (kappa_i + gamma * kappa_g)


class InterfaceData(NamedTuple):
    """Frequency-dependent constants the integrand kernels need.

    ``dk1``/``dk2`` are kappa_i**2 - kappa_g**2 (1/m**2). ``fix1tm``/``fix2tm``
    are NaN unless the TM coefficient is pinned by a static limit.
    """

    dk1: float
    dk2: float
    g1te: float
    g1tm: float
    g2te: float
    g2tm: float
    fix1tm: float
    fix2tm: float


def interface_data(stack: Stack, zeta: float, zero_limit: bool = False) -> InterfaceData:
    sg = stack.gap.kappa_shift(zeta)
    dk1 = stack.wall.kappa_shift(zeta) - sg
    dk2 = stack.slab.kappa_shift(zeta) - sg
    g1tm = tm_gamma(1, zeta, stack, zero_limit)
    g2tm = tm_gamma(2, zeta, stack, zero_limit)
    # an infinite eps ratio pins Delta_TM at -1; the gamma slot is then unused
    fix1tm = -1.0 if math.isinf(g1tm) else math.nan
    fix2tm = -1.0 if math.isinf(g2tm) else math.nan
    return InterfaceData(
        dk1,
        dk2,
        stack.wall.mu / stack.gap.mu,
        1.0 if math.isinf(g1tm) else g1tm,
        stack.slab.mu / stack.gap.mu,
        1.0 if math.isinf(g2tm) else g2tm,
        fix1tm,
        fix2tm,
    )
