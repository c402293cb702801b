"""Cavity factors of the five-zone stack wall | gap a+ | slab b | gap a- | wall.

All functions take arrays of decay constants (one frequency, many k_perp)
and the interface coefficients Delta_1q (wall) and Delta_2q (slab) for a
single polarization. Exponentials only ever appear as exp(-x), x >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: exp(-x) is taken as exactly zero beyond this argument.
EXP_CLAMP = 700.0
DEGENERACY_TOL = 1e3 * np.finfo(float).eps


class GeometryError(ValueError):
    pass


class NumericalDegeneracyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CavityGeometry:
    """Gap widths a+ (left), a- (right) and slab thickness b, all in metres."""

    a_plus: float
    a_minus: float
    b: float

    def __post_init__(self):
        if not (self.a_plus > 0 and self.a_minus > 0 and self.b > 0):
            raise GeometryError(f"a+, a-, b must be > 0 (got {self.a_plus}, {self.a_minus}, {self.b})")

    @classmethod
    def from_delta(cls, h: float, b: float, delta: float) -> "CavityGeometry":
        """Slab centre displaced by ``delta`` from the midline: a+- = h/2 +- delta."""
        if not h > 0:
            raise GeometryError("h must be > 0")
        if not abs(delta) < h / 2:
            raise GeometryError(f"|delta| must be < h/2 (delta={delta}, h={h})")
        return cls(h / 2 + delta, h / 2 - delta, b)

    @classmethod
    def from_width(cls, c: float, b: float, delta: float = 0.0) -> "CavityGeometry":
        return cls.from_delta(c - b, b, delta)

    @property
    def h(self) -> float:
        return self.a_plus + self.a_minus

    @property
    def c(self) -> float:
        return self.a_plus + self.a_minus + self.b

    @property
    def delta(self) -> float:
        return 0.5 * (self.a_plus - self.a_minus)

    @property
    def min_gap(self) -> float:
        return min(self.a_plus, self.a_minus)

    def describe(self) -> dict:
        return {"a_plus": self.a_plus, "a_minus": self.a_minus, "b": self.b, "h": self.h, "c": self.c,
                "delta": self.delta}


def decay(x):
    """exp(-x) for x >= 0, clamped to 0 above EXP_CLAMP."""
    x = np.asarray(x, dtype=float)
    return np.where(x > EXP_CLAMP, 0.0, np.exp(-np.minimum(x, EXP_CLAMP)))


def _check_den(den, scale, what):
    bad = np.abs(den) <= DEGENERACY_TOL * scale
    if np.any(bad):
        idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
        raise NumericalDegeneracyError(
            f"{what}: denominator {np.atleast_1d(den)[idx]!r} vanishes against scale "
            f"{np.atleast_1d(scale)[idx]!r} at node {idx}"
        )


def u_v(d1, d2, x_other, y):
    """U and V for the gap on the *other* side.

    ``x_other = exp(-2 kappa_g a)`` of that gap, ``y = exp(-2 kappa_2 b)``.
    """
    d12 = d1 * d2
    u = d12 * (1.0 - d12 * x_other) - d1 * (d2 - d1 * x_other) * y
    v = 1.0 - d12 * x_other - d2 * (d2 - d1 * x_other) * y
    return u, v


def inv_d(side: str, d1, d2, kappa_g, kappa_2, geom: CavityGeometry, check: bool = True):
    """1/d_q^+ (``side='+'``) or 1/d_q^- for one polarization.

    1/d^+- = U^-+ e^{-2 kappa_g a^+-} / (V^-+ - U^-+ e^{-2 kappa_g a^+-})
    """
    kappa_g = np.asarray(kappa_g, dtype=float)
    if side == "+":
        a_own, a_other = geom.a_plus, geom.a_minus
    elif side == "-":
        a_own, a_other = geom.a_minus, geom.a_plus
    else:
        raise ValueError("side must be '+' or '-'")
    x_own = decay(2 * kappa_g * a_own)
    x_other = decay(2 * kappa_g * a_other)
    y = decay(2 * np.asarray(kappa_2, dtype=float) * geom.b)
    u, v = u_v(d1, d2, x_other, y)
    ux = u * x_own
    den = v - ux
    if check:
        _check_den(den, np.maximum(np.abs(v), np.abs(ux)), f"1/d^{side}")
    return ux / den


def inv_d_three_layer(d1, kappa_g, width):
    """(Delta_1^-2 e^{2 kappa_g c} - 1)^-1 for an empty cavity of width ``width``."""
    x = np.asarray(d1) ** 2 * decay(2 * np.asarray(kappa_g, dtype=float) * width)
    return x / (1.0 - x)


def inv_d_gap(r_left, r_right, kappa_g, gap):
    """Closed-form round-trip sum r_L r_R e^{-2 kappa a} / (1 - r_L r_R e^{-2 kappa a})."""
    ratio = r_left * r_right * decay(2 * np.asarray(kappa_g, dtype=float) * gap)
    if np.any(np.abs(ratio) >= 1):
        raise ValueError("round-trip ratio must satisfy |r_L r_R exp(-2 kappa a)| < 1")
    return ratio / (1.0 - ratio)


def geometric_series_check(r_left, r_right, kappa_g, gap, n_terms: int):
    """Partial sum over n = 1..N of (r_L r_R e^{-2 kappa_g a})**n."""
    ratio = float(r_left * r_right * math.exp(-2 * kappa_g * gap))
    if abs(ratio) >= 1:
        raise ValueError(f"divergent round-trip ratio {ratio}")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    total, term = 0.0, 1.0
    for _ in range(n_terms):
        term *= ratio
        total += term
    return total


def inv_d_first_order(side: str, d1, d2, kappa_g, kappa_2, geom: CavityGeometry):
    """1/d^+- expanded to first order in e^{-2 kappa_2 b}: Lifshitz term plus leakage term."""
    kappa_g = np.asarray(kappa_g, dtype=float)
    a_own, a_other = (geom.a_plus, geom.a_minus) if side == "+" else (geom.a_minus, geom.a_plus)
    x_own = decay(2 * kappa_g * a_own)
    x_other = decay(2 * kappa_g * a_other)
    y = decay(2 * np.asarray(kappa_2, dtype=float) * geom.b)
    d12 = d1 * d2
    lif = d12 * x_own / (1.0 - d12 * x_own)
    leak = (d1 * (1.0 - d2 * d2) * x_own / (1.0 - d12 * x_own) ** 2
            * (d2 - d1 * x_other) / (1.0 - d12 * x_other))
    return lif - y * leak


def ab_kernels(d1, d2, kappa_g, kappa_2, h, b):
    """A_q = 2 D1 D2 (1 - e^{-2 k2 b}) e^{-kg h};  B_q = 1 - D2^2 e^{-2 k2 b} + D1^2 (D2^2 - e^{-2 k2 b}) e^{-2 kg h}."""
    kappa_g = np.asarray(kappa_g, dtype=float)
    y = decay(2 * np.asarray(kappa_2, dtype=float) * b)
    one_minus_y = -np.expm1(-np.minimum(2 * np.asarray(kappa_2, dtype=float) * b, EXP_CLAMP))
    e_h = decay(kappa_g * h)
    a = 2 * d1 * d2 * one_minus_y * e_h
    bb = 1.0 - d2 * d2 * y + d1 * d1 * (d2 * d2 - y) * e_h * e_h
    return a, bb


def lifshitz_kernels(d1, d2, kappa_g, h):
    """A_qL = 2 D1 D2 e^{-kg h};  B_qL = 1 + D1^2 D2^2 e^{-2 kg h}."""
    e_h = decay(np.asarray(kappa_g, dtype=float) * h)
    return 2 * d1 * d2 * e_h, 1.0 + (d1 * d2 * e_h) ** 2


def delta_form(a, bb, kappa_g, delta):
    """A sinh(2 kg delta) / (B - A cosh(2 kg delta)) evaluated literally.

    Fine for moderate kappa_g*delta; the integrand kernels use an
    overflow-free rearrangement of the same expression.
    """
    arg = 2 * np.asarray(kappa_g, dtype=float) * delta
    return a * np.sinh(arg) / (bb - a * np.cosh(arg))


def one_minus_r_decay(r, kappa_g, gap):
    """1 - r e^{-2 kg a}, accurate when r -> 1 and kg a -> 0."""
    em1 = np.expm1(-np.minimum(2 * np.asarray(kappa_g, dtype=float) * gap, EXP_CLAMP))
    return (1.0 - r) - r * em1


def shared_denominator(d1, d2, kappa_g, kappa_2, geom: CavityGeometry):
    """V - U e^{-2 kg a} (identical for both gaps), in factored form.

    (1 - D1 D2 x+)(1 - D1 D2 x-) - y (D2 - D1 x+)(D2 - D1 x-), x+- = e^{-2 kg a+-}.
    Also equals B - A cosh(2 kg delta).
    """
    d12 = d1 * d2
    y = decay(2 * np.asarray(kappa_2, dtype=float) * geom.b)
    lp = one_minus_r_decay(d12, kappa_g, geom.a_plus)
    lm = one_minus_r_decay(d12, kappa_g, geom.a_minus)
    # D2 - D1 x = (D2 - D1) + D1 (1 - x)
    rp = (d2 - d1) - d1 * np.expm1(-np.minimum(2 * np.asarray(kappa_g, dtype=float) * geom.a_plus, EXP_CLAMP))
    rm = (d2 - d1) - d1 * np.expm1(-np.minimum(2 * np.asarray(kappa_g, dtype=float) * geom.a_minus, EXP_CLAMP))
    first = lp * lm
    second = y * rp * rm
    return first - second, np.maximum(np.abs(first), np.abs(second))


def delta_form_stable(d1, d2, kappa_g, kappa_2, geom: CavityGeometry, check: bool = True):
    """A sinh/(B - A cosh) written with e^{-2 kg a+-} only and a factored denominator."""
    kappa_g = np.asarray(kappa_g, dtype=float)
    kappa_2 = np.asarray(kappa_2, dtype=float)
    omy = -np.expm1(-np.minimum(2 * kappa_2 * geom.b, EXP_CLAMP))
    asinh = d1 * d2 * omy * _diff_decay(kappa_g, geom)
    den, scale = shared_denominator(d1, d2, kappa_g, kappa_2, geom)
    if check:
        _check_den(den, scale, "B - A cosh")
    return asinh / den


def _diff_decay(kappa_g, geom):
    """e^{-2 kg a-} - e^{-2 kg a+} without cancellation for small delta."""
    lo = min(geom.a_plus, geom.a_minus)
    sgn = 1.0 if geom.a_minus <= geom.a_plus else -1.0
    span = 2 * abs(geom.a_plus - geom.a_minus)
    return -sgn * decay(2 * kappa_g * lo) * np.expm1(-np.minimum(kappa_g * span, EXP_CLAMP))


def a1_form(d1, d2, kappa_g, kappa_2, h, b):
    """A_q / (B_q - A_q), the delta-derivative weight used for the Taylor coefficient."""
    a, _ = ab_kernels(d1, d2, kappa_g, kappa_2, h, b)
    den, scale = shared_denominator(d1, d2, kappa_g, kappa_2, CavityGeometry(h / 2, h / 2, b))
    _check_den(den, scale, "B - A")
    return a / den
