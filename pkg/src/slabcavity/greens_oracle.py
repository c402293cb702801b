"""Boundary-value solution of the layered Green's function, used to certify the force kernels.

For one (zeta, k_perp) the TM (g_xx) and TE (g_yy) components are obtained by
solving the eight continuity equations of the five-zone stack directly. In
the gap holding the source, the homogeneous part is a 2x2 coefficient
matrix ``M[s1, s2]`` over the basis

    E[+,-] = e^{k(z - z')}            E[-,+] = e^{-k(z - z')}
    E[+,+] = e^{k(z + z' - 2 r)}      E[-,-] = e^{-k(z + z' - 2 l)}

with k = kappa_g and [l, r] the gap. d/dz multiplies ``M[s1, s2]`` by
``s1 k``, d/dz' by ``s2 k``, and exchanging z and z' transposes ``M``, so
g_zx, g_xz, g_zz and the magnetic components follow without any numerical
differentiation. Index 0 is the "+" sign, index 1 the "-" sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import C_LIGHT
from .fresnel import TE, TM, SpectralPoint, Stack
from .multilayer import CavityGeometry, decay, inv_d

SIGNS = np.array([1.0, -1.0])
PLUS, MINUS = 0, 1


class GreensSolveError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Layers:
    """Per-zone decay constants and material constants, left to right."""

    kappa: tuple
    eps: tuple
    mu: tuple
    bounds: tuple  # interface positions 0, a+, a+ + b, c

    @classmethod
    def build(cls, point: SpectralPoint, geom: CavityGeometry, stack: Stack) -> "Layers":
        if not point.zeta > 0:
            raise ValueError("the oracle works at zeta > 0 only")
        z = point.zeta
        e1, e2, eg = (float(stack.wall.eps(z)), float(stack.slab.eps(z)), float(stack.gap.eps(z)))
        m1, m2, mg = stack.wall.mu, stack.slab.mu, stack.gap.mu
        k1, k2, kg = point.kappa_1, point.kappa_2, point.kappa_g
        return cls((k1, kg, k2, kg, k1), (e1, eg, e2, eg, e1), (m1, mg, m2, mg, m1),
                   (0.0, geom.a_plus, geom.a_plus + geom.b, geom.c))


@dataclass
class GreensSolution:
    """Solved boundary-value problem for one polarization.

    ``coefficients`` are in the scaled basis: zone 0 uses A e^{k z}, zone 4
    B e^{-k (z - c)}, and a finite zone [l, r] uses P e^{k (z - r)} + Q e^{-k (z - l)}.
    ``x_coeffs``/``y_coeffs`` are the 8-vectors for the source halves
    G e^{k (z - l)} (seen at l) and G e^{-k (z - r)} (seen at r); the
    solution for a given z' is e^{-k (z' - l)} X + e^{k (z' - r)} Y.
    """

    polarization: str
    layers: Layers
    source_zone: int
    prefactor: float
    x_coeffs: np.ndarray
    y_coeffs: np.ndarray
    kernel: np.ndarray
    residual: float
    condition: float
    z_source: Optional[float] = None
    coefficients: dict = field(default_factory=dict)

    @property
    def gap(self):
        j = self.source_zone
        return self.layers.bounds[j - 1], self.layers.bounds[j]

    @property
    def kappa(self) -> float:
        return self.layers.kappa[self.source_zone]

    def at_source(self, z_source: float) -> "GreensSolution":
        l, r = self.gap
        if not l < z_source < r:
            raise ValueError("z_source must lie strictly inside the source gap")
        k = self.kappa
        vec = math.exp(-k * (z_source - l)) * self.x_coeffs + math.exp(k * (z_source - r)) * self.y_coeffs
        names = ["A", "C1", "C2", "E1", "E2", "D1", "D2", "B"]
        return GreensSolution(self.polarization, self.layers, self.source_zone, self.prefactor, self.x_coeffs,
                              self.y_coeffs, self.kernel, self.residual, self.condition, z_source,
                              dict(zip(names, vec)))

    def evaluate(self, z) -> np.ndarray:
        """Full g(z, z_source) including the free-space source term."""
        if self.z_source is None:
            raise ValueError("call at_source() first")
        z = np.atleast_1d(np.asarray(z, dtype=float))
        c = list(self.coefficients.values())
        b = self.layers.bounds
        kap = self.layers.kappa
        out = np.empty_like(z)
        for i, zi in enumerate(z):
            j = int(np.searchsorted(b, zi))
            if j == 0:
                v = c[0] * math.exp(kap[0] * zi)
            elif j == 4:
                v = c[7] * math.exp(-kap[4] * (zi - b[3]))
            else:
                l, r = b[j - 1], b[j]
                v = c[2 * j - 1] * math.exp(kap[j] * (zi - r)) + c[2 * j] * math.exp(-kap[j] * (zi - l))
            if j == self.source_zone:
                v += self.prefactor * math.exp(-kap[j] * abs(zi - self.z_source))
            out[i] = v
        return out

    def homogeneous(self, z, zp) -> np.ndarray:
        """Homogeneous part in the source gap from the kernel matrix."""
        return kernel_eval(self.kernel, self.kappa, self.gap, z, zp)


def kernel_eval(m, kappa, gap, z, zp):
    l, r = gap
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    return (m[PLUS, MINUS] * np.exp(kappa * (z - zp)) + m[MINUS, PLUS] * np.exp(-kappa * (z - zp))
            + m[PLUS, PLUS] * np.exp(kappa * (z + zp - 2 * r)) + m[MINUS, MINUS] * np.exp(-kappa * (z + zp - 2 * l)))


def _basis(layers: Layers, j: int, z: float):
    """(value, derivative) rows of zone j's basis at z, as {column: (v, dv)}."""
    k = layers.kappa[j]
    b = layers.bounds
    if j == 0:
        e = math.exp(k * z)
        return {0: (e, k * e)}
    if j == 4:
        e = math.exp(-k * (z - b[3]))
        return {7: (e, -k * e)}
    l, r = b[j - 1], b[j]
    ep = math.exp(k * (z - r))
    em = math.exp(-k * (z - l))
    return {2 * j - 1: (ep, k * ep), 2 * j: (em, -k * em)}


def _weights(layers: Layers, pol: str):
    if pol == TM:
        return [e / (k * k) for e, k in zip(layers.eps, layers.kappa)]
    return [1.0 / m for m in layers.mu]


def _prefactor(layers: Layers, pol: str, j: int, zeta: float) -> float:
    k, e, m = layers.kappa[j], layers.eps[j], layers.mu[j]
    if pol == TM:
        return -k / (2 * e * m)
    return -m * zeta**2 / (2 * k * C_LIGHT**2)


def _solve(layers: Layers, pol: str, source_zone: int, zeta: float) -> GreensSolution:
    if source_zone not in (1, 3):
        raise ValueError("the source must sit in a gap (zone 1 or 3)")
    w = _weights(layers, pol)
    mat = np.zeros((8, 8))
    for i, zb in enumerate(layers.bounds):
        left, right = _basis(layers, i, zb), _basis(layers, i + 1, zb)
        for col, (v, dv) in left.items():
            mat[2 * i, col] += v
            mat[2 * i + 1, col] += w[i] * dv
        for col, (v, dv) in right.items():
            mat[2 * i, col] -= v
            mat[2 * i + 1, col] -= w[i + 1] * dv
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > 1e14:
        raise GreensSolveError(f"continuity system is singular or ill-conditioned (cond = {cond:.3e})")
    g = _prefactor(layers, pol, source_zone, zeta)
    ws = w[source_zone]
    k = layers.kappa[source_zone]
    # interface index left of zone j is j-1, right is j; source sits on the far side in each case
    li, ri = source_zone - 1, source_zone
    rhs_x = np.zeros(8)
    rhs_x[2 * li] = g
    rhs_x[2 * li + 1] = ws * k * g
    rhs_y = np.zeros(8)
    rhs_y[2 * ri] = -g
    rhs_y[2 * ri + 1] = -ws * (-k) * g
    sol = np.linalg.solve(mat, np.column_stack([rhs_x, rhs_y]))
    res = np.linalg.norm(mat @ sol - np.column_stack([rhs_x, rhs_y])) / (
        np.linalg.norm(mat) * np.linalg.norm(sol) + np.linalg.norm([rhs_x, rhs_y]))
    x, y = sol[:, 0], sol[:, 1]
    l, r = layers.bounds[source_zone - 1], layers.bounds[source_zone]
    p, q = 2 * source_zone - 1, 2 * source_zone
    span = math.exp(-k * (r - l))
    kern = np.array([[y[p], x[p] * span], [y[q] * span, x[q]]])
    return GreensSolution(pol, layers, source_zone, g, x, y, kern, float(res), cond)


def _source_zone(z_source, geom, side):
    if z_source is None:
        return 1 if side == "+" else 3
    if 0 < z_source < geom.a_plus:
        return 1
    if geom.a_plus + geom.b < z_source < geom.c:
        return 3
    raise ValueError("z_source must lie strictly inside one of the gaps")


def solve_tm(point: SpectralPoint, geom: CavityGeometry, stack: Stack, z_source: Optional[float] = None,
             side: str = "+") -> GreensSolution:
    """g_xx from continuity of g and (eps / kappa^2) dg/dz at the four interfaces."""
    sol = _solve(Layers.build(point, geom, stack), TM, _source_zone(z_source, geom, side), point.zeta)
    return sol.at_source(z_source) if z_source is not None else sol


def solve_te(point: SpectralPoint, geom: CavityGeometry, stack: Stack, z_source: Optional[float] = None,
             side: str = "+") -> GreensSolution:
    """g_yy from continuity of g and (1 / mu) dg/dz at the four interfaces."""
    sol = _solve(Layers.build(point, geom, stack), TE, _source_zone(z_source, geom, side), point.zeta)
    return sol.at_source(z_source) if z_source is not None else sol


def zx_kernel(m, k_perp, kappa):
    """g_zx = -(i k / kappa^2) dg_xx/dz; returned as the coefficient of i."""
    return -(k_perp / kappa) * SIGNS[:, None] * m


def xz_kernel(m, k_perp, kappa):
    """g_xz(z, z'; k) = g_zx(z', z; -k); coefficient of i."""
    return (k_perp / kappa) * SIGNS[None, :] * m.T


def zz_kernel(m, k_perp, kappa):
    """g_zz = -(i k / kappa^2) dg_xz/dz with the delta-function term dropped."""
    return (k_perp / kappa) ** 2 * np.outer(SIGNS, SIGNS) * m.T


def g_zz_from_relations(solution: GreensSolution, k_perp: float, z=None, zp=None):
    """Kernel matrix of g_zz in the source gap, or its values at (z, z') if given."""
    if solution.polarization != TM:
        raise ValueError("g_zz follows from the TM solution")
    mzz = zz_kernel(solution.kernel, k_perp, solution.kappa)
    if z is None:
        return mzz
    return kernel_eval(mzz, solution.kappa, solution.gap, z, zp)


def magnetic_kernels(tm: GreensSolution, te: GreensSolution, k_perp: float, zeta: float):
    """(H_xx, H_yy, H_zz) kernels from (c^2 / omega^2) Curl Curl' g with omega = i zeta."""
    k = tm.kappa
    s1 = SIGNS[:, None]
    s2 = SIGNS[None, :]
    pref = -(C_LIGHT / zeta) ** 2
    mxx, myy = tm.kernel, te.kernel
    hxx = pref * s1 * s2 * k * k * myy
    hzz = pref * k_perp**2 * myy
    # d_z d_z' g_xx + i k d_z g_xz - i k d_z' g_zx + k^2 g_zz, with g_xz, g_zx stored as i * (real)
    hyy = pref * (s1 * s2 * k * k * mxx - k_perp * k * s1 * xz_kernel(mxx, k_perp, k)
                  + k_perp * k * s2 * zx_kernel(mxx, k_perp, k) + k_perp**2 * zz_kernel(mxx, k_perp, k))
    return hxx, hyy, hzz


def stress_kernel(tm: GreensSolution, te: GreensSolution, k_perp: float, zeta: float):
    """eps_g (g_xx + g_yy - g_zz) + (1 / mu_g)(H_xx + H_yy - H_zz) as a kernel matrix."""
    j = tm.source_zone
    eps_g, mu_g = tm.layers.eps[j], tm.layers.mu[j]
    hxx, hyy, hzz = magnetic_kernels(tm, te, k_perp, zeta)
    mzz = zz_kernel(tm.kernel, k_perp, tm.kappa)
    return eps_g * (tm.kernel + te.kernel - mzz) + (hxx + hyy - hzz) / mu_g


# Closed forms ---------------------------------------------------------------

def closed_form_kernels(point: SpectralPoint, geom: CavityGeometry, stack: Stack, side: str = "+",
                        delta_sign: float = 1.0, zz_lone_sign: float = -1.0):
    """Kernel matrices (xx, yy, zz) of the closed-form gap solutions.

    In the "+" gap, with G the TM or TE source amplitude and D the wall coefficient,

        g_xx = G {(1/d)[2 cosh k(z-z') + e^{k(z+z')}/D + D e^{-k(z+z')}] + D e^{-k(z+z')}}
        g_yy = G {(1/d)[2 cosh k(z-z') - e^{k(z+z')}/D - D e^{-k(z+z')}] - D e^{-k(z+z')}}
        g_zz = -(k_perp/k)^2 G_TM {(1/d)[2 cosh - e^{k(z+z')}/D - D e^{-k(z+z')}] + s D e^{-k(z+z')}}

    with ``s = zz_lone_sign``; the boundary-value solution requires s = -1, the
    same sign flip the bracketed e^{-k(z+z')} term receives. The "-" gap follows
    from a+ <-> a-, z -> c - z.
    ``delta_sign`` multiplies every wall coefficient (mutation hook).
    """
    from .fresnel import delta

    layers = Layers.build(point, geom, stack)
    j = 1 if side == "+" else 3
    k = point.kappa_g
    a = geom.a_plus if side == "+" else geom.a_minus
    # the e^{k(z+z')} term of the "+" gap sits at the slab side; the mirror image swaps slots
    far, near = ((PLUS, PLUS), (MINUS, MINUS)) if side == "+" else ((MINUS, MINUS), (PLUS, PLUS))
    out = {}
    for pol in (TM, TE):
        d1 = delta_sign * delta(1, pol, point, stack)
        d2 = delta(2, pol, point, stack)
        inv = float(inv_d(side, d1, d2, k, point.kappa_2, geom, check=False))
        g = _prefactor(layers, pol, j, point.zeta)
        sgn = 1.0 if pol == TM else -1.0
        m = np.empty((2, 2))
        m[PLUS, MINUS] = m[MINUS, PLUS] = g * inv
        m[far] = sgn * g * _far_amplitude(d1, d2, k, point.kappa_2, geom, side)
        m[near] = sgn * g * d1 * (inv + 1.0)
        out[pol] = (m, g, d1, inv)
    mxx, g, d1, inv = out[TM]
    r = (point.k_perp / k) ** 2
    mzz = np.empty((2, 2))
    mzz[PLUS, MINUS] = mzz[MINUS, PLUS] = -r * g * inv
    mzz[far] = r * mxx[far]
    mzz[near] = r * g * d1 * (inv - zz_lone_sign)
    return mxx, out[TE][0], mzz


def _far_amplitude(d1, d2, kappa_g, kappa_2, geom, side):
    """e^{2 k a} (1/d) / D1 with D1 cancelled analytically, finite as D1 -> 0."""
    a_own, a_other = (geom.a_plus, geom.a_minus) if side == "+" else (geom.a_minus, geom.a_plus)
    x_own = decay(2 * kappa_g * a_own)
    x_other = decay(2 * kappa_g * a_other)
    y = decay(2 * kappa_2 * geom.b)
    d12 = d1 * d2
    u_red = d2 * (1.0 - d12 * x_other) - (d2 - d1 * x_other) * y
    v = 1.0 - d12 * x_other - d2 * (d2 - d1 * x_other) * y
    return u_red / (v - d1 * u_red * x_own)


def effective_kernel(point: SpectralPoint, geom: CavityGeometry, stack: Stack, side: str = "+",
                     delta_sign: float = 1.0) -> float:
    """-2 kappa_g sum_q 1/d_q at coincident points, built from the cavity factors."""
    from .fresnel import delta

    total = 0.0
    for pol in (TM, TE):
        d1 = delta_sign * delta(1, pol, point, stack)
        d2 = delta(2, pol, point, stack)
        total += float(inv_d(side, d1, d2, point.kappa_g, point.kappa_2, geom, check=False))
    return -2.0 * point.kappa_g * total


@dataclass(frozen=True)
class StressCheck:
    """Outcome of the stress-tensor checks in one gap.

    ``sum_residual`` is max |z+z' part| / |z-z' part| over the grid and
    ``term_residual`` the same numerator over the largest single contribution
    to the combination, i.e. the cancellation measured against roundoff.
    ``effective_mismatch`` compares the z-z' part to the effective kernel.
    When every wall and slab coefficient vanishes (a homogeneous stack) the
    z-z' part is identically zero and both ratios fall back to the term scale.
    """

    sum_residual: float
    effective_mismatch: float
    full_difference_part: float
    effective: float
    term_residual: float = 0.0

    @property
    def worst(self) -> float:
        return max(self.sum_residual, self.effective_mismatch)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.worst <= tol


def _term_scale(tm: GreensSolution, te: GreensSolution, k_perp: float, zeta: float) -> float:
    j = tm.source_zone
    eps_g, mu_g = tm.layers.eps[j], tm.layers.mu[j]
    parts = [eps_g * tm.kernel, eps_g * te.kernel, eps_g * zz_kernel(tm.kernel, k_perp, tm.kappa)]
    parts += [m / mu_g for m in magnetic_kernels(tm, te, k_perp, zeta)]
    k = tm.kappa
    # free-space source amplitudes set the floor when the homogeneous part vanishes
    source = max(abs(eps_g * tm.prefactor), abs((C_LIGHT * k / zeta) ** 2 * te.prefactor / mu_g))
    return max(source, max(float(np.max(np.abs(p))) for p in parts))


def stress_cancellation_check(point: SpectralPoint, geom: CavityGeometry, stack: Stack, z_grid=None,
                              side: str = "+", delta_sign: float = 1.0) -> StressCheck:
    """Check that z+z' terms drop out of the stress combination and that the rest is the effective kernel."""
    tm = solve_tm(point, geom, stack, side=side)
    te = solve_te(point, geom, stack, side=side)
    s = stress_kernel(tm, te, point.k_perp, point.zeta)
    l, r = tm.gap
    if z_grid is None:
        z_grid = np.linspace(l, r, 52)[1:-1]
    z = np.asarray(z_grid, dtype=float)
    diff_part = s[PLUS, MINUS] + s[MINUS, PLUS]
    k = tm.kappa
    sum_part = s[PLUS, PLUS] * np.exp(2 * k * (z - r)) + s[MINUS, MINUS] * np.exp(-2 * k * (z - l))
    worst_sum = float(np.max(np.abs(sum_part)))
    term_scale = _term_scale(tm, te, point.k_perp, point.zeta)
    term_res = worst_sum / term_scale
    eff = effective_kernel(point, geom, stack, side, delta_sign)
    if eff == 0.0:
        return StressCheck(term_res, abs(diff_part) / term_scale, float(diff_part), 0.0, term_res)
    mism = abs(diff_part - eff) / max(abs(eff), abs(diff_part))
    return StressCheck(worst_sum / abs(diff_part), float(mism), float(diff_part), float(eff), term_res)
