# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integrand kernels. Same contract as ``_pykernels.integrand``.

A degenerate denominator writes NaN into the output; the Python wrapper
turns that into an exception.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, sqrt, fabs, isnan, NAN, fmax, fmin

cnp.import_array()

cdef double EXP_CLAMP = 700.0
cdef double DEG_TOL = 1e3 * 2.220446049250313e-16


cdef struct Node:
    double kg, k2
    double xp, xm, y       # e^{-2 kg a+}, e^{-2 kg a-}, e^{-2 k2 b}
    double mp, mm, mh      # expm1(-2 kg a+), expm1(-2 kg a-), expm1(-2 kg h)
    double omy             # 1 - y
    double diff            # xm - xp
    double eh, me          # e^{-kg h}, expm1(-kg h)


cdef inline double decay(double x) noexcept nogil:
    if x > EXP_CLAMP:
        return 0.0
    return exp(-x)


cdef inline double em1(double x) noexcept nogil:
    return expm1(-fmin(x, EXP_CLAMP))


cdef inline double coeff(double ki, double kg, double gamma, double fixed) noexcept nogil:
    if not isnan(fixed):
        return fixed
    cdef double den = ki + gamma * kg
    if den == 0.0:
        return (1.0 - gamma) / (1.0 + gamma)
    return (ki - gamma * kg) / den


cdef inline bint degenerate(double den, double scale) noexcept nogil:
    return fabs(den) <= DEG_TOL * scale


cdef inline double inv_d_literal(double d1, double d2, double x_own, double x_other, double y) noexcept nogil:
    cdef double d12 = d1 * d2
    cdef double u = d12 * (1.0 - d12 * x_other) - d1 * (d2 - d1 * x_other) * y
    cdef double v = 1.0 - d12 * x_other - d2 * (d2 - d1 * x_other) * y
    cdef double ux = u * x_own
    cdef double den = v - ux
    if degenerate(den, fmax(fabs(v), fabs(ux))):
        return NAN
    return ux / den


cdef double per_pol(int mode, double d1, double d2, Node* n) noexcept nogil:
    cdef double d12 = d1 * d2
    cdef double lp, lm, rp, rm, first, second, den, asn, r_delta, r_lif, r_thk, x, im, ip

    if mode == 0:
        im = inv_d_literal(d1, d2, n.xm, n.xp, n.y)
        ip = inv_d_literal(d1, d2, n.xp, n.xm, n.y)
        return im - ip
    if mode == 2:
        # delta = 0: (1 - D12 e^{-kg h})^2 - y (D2 - D1 e^{-kg h})^2
        lp = (1.0 - d12) - d12 * n.me
        rp = (d2 - d1) - d1 * n.me
        first = lp * lp
        second = n.y * rp * rp
        den = first - second
        if degenerate(den, fmax(fabs(first), fabs(second))):
            return NAN
        return n.kg * 2.0 * d12 * n.omy * n.eh / den
    if mode == 6:
        x = d12 * n.xp
        return x / (1.0 - x)
    if mode == 7:
        x = d12 * n.xp
        return -2.0 * n.kg * x / ((1.0 - x) * (1.0 - x))

    # (1 - D12 x+)(1 - D12 x-) - y (D2 - D1 x+)(D2 - D1 x-)
    lp = (1.0 - d12) - d12 * n.mp
    lm = (1.0 - d12) - d12 * n.mm
    rp = (d2 - d1) - d1 * n.mp
    rm = (d2 - d1) - d1 * n.mm
    first = lp * lm
    second = n.y * rp * rm
    den = first - second
    if degenerate(den, fmax(fabs(first), fabs(second))):
        return NAN
    r_delta = d12 * n.omy * n.diff / den
    if mode == 1:
        return r_delta

    asn = d12 * n.diff
    r_lif = asn / first
    if mode == 3:
        return r_lif
    r_thk = -n.y * asn * (1.0 - d2 * d2) * ((1.0 - d1 * d1) - d1 * d1 * n.mh) / (first * first)
    if mode == 4:
        return r_thk
    x = r_delta - r_lif - r_thk
    if mode == 5:
        return x
    if mode == 8:
        return fabs(x)
    if mode == 9:
        return n.k2 * fabs(x)
    return NAN


def integrand(int mode, kappa_g, data, double a_plus, double a_minus, double b):
    """kappa_g * sum_q kernel_q on an array of gap decay constants."""
    if mode < 0 or mode > 9:
        raise ValueError(f"unknown kernel mode {mode}")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kin = np.ascontiguousarray(kappa_g, dtype=np.float64).ravel()
    cdef Py_ssize_t num = kin.shape[0], j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(num, dtype=np.float64)
    cdef double dk1 = data.dk1, dk2 = data.dk2
    cdef double g1te = data.g1te, g1tm = data.g1tm, g2te = data.g2te, g2tm = data.g2tm
    cdef double f1 = data.fix1tm, f2 = data.fix2tm
    cdef double h = a_plus + a_minus, lo, sgn, span, k1, s
    cdef Node n
    if a_minus <= a_plus:
        lo, sgn = a_minus, 1.0
    else:
        lo, sgn = a_plus, -1.0
    span = 2.0 * fabs(a_plus - a_minus)
    with nogil:
        for j in range(num):
            n.kg = kin[j]
            k1 = sqrt(fmax(n.kg * n.kg + dk1, 0.0))
            n.k2 = sqrt(fmax(n.kg * n.kg + dk2, 0.0))
            n.mp = em1(2.0 * n.kg * a_plus)
            n.mm = em1(2.0 * n.kg * a_minus)
            n.mh = em1(2.0 * n.kg * h)
            n.xp = decay(2.0 * n.kg * a_plus)
            n.xm = decay(2.0 * n.kg * a_minus)
            n.y = decay(2.0 * n.k2 * b)
            n.omy = -em1(2.0 * n.k2 * b)
            n.eh = decay(n.kg * h)
            n.me = em1(n.kg * h)
            n.diff = -sgn * decay(2.0 * n.kg * lo) * em1(n.kg * span)
            s = per_pol(mode, coeff(k1, n.kg, g1te, NAN), coeff(n.k2, n.kg, g2te, NAN), &n)
            s += per_pol(mode, coeff(k1, n.kg, g1tm, f1), coeff(n.k2, n.kg, g2tm, f2), &n)
            out[j] = n.kg * s
    return out.reshape(np.shape(kappa_g))
