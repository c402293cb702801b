"""Integrand kernel dispatch: compiled extension when available, numpy otherwise.

Set ``SLABCAVITY_PURE_PYTHON=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels
from ._pykernels import (  # noqa: F401  re-exported mode ids
    MODE_A1,
    MODE_DELTA,
    MODE_DIRECT,
    MODE_GAP,
    MODE_GAP_DERIV,
    MODE_LIFSHITZ,
    MODE_RESIDUAL,
    MODE_RESIDUAL_ABS,
    MODE_RESIDUAL_K2,
    MODE_THICKNESS,
)
from .multilayer import NumericalDegeneracyError

_compiled = None
if os.environ.get("SLABCAVITY_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def integrand(mode, kappa_g, data, a_plus, a_minus, b, backend=None):
    """Evaluate ``kappa_g * sum_q kernel_q`` for one frequency.

    Parameters
    ----------
    mode : int
        One of the ``MODE_*`` ids.
    kappa_g : array_like
        Gap decay constants (1/m).
    data : InterfaceData
        Frequency-dependent interface constants.
    a_plus, a_minus, b : float
        Geometry in metres.
    backend : {None, "cython", "python"}
        Override the import-time selection.
    """
    use = backend or BACKEND
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        out = _compiled.integrand(int(mode), np.asarray(kappa_g, dtype=float), data,
                                  float(a_plus), float(a_minus), float(b))
        if np.isnan(out).any():
            j = int(np.flatnonzero(np.isnan(np.atleast_1d(out)))[0])
            raise NumericalDegeneracyError(
                f"kernel mode {mode}: vanishing denominator at kappa_g={np.atleast_1d(kappa_g)[j]!r}"
            )
        return out
    if use == "python":
        return _pykernels.integrand(mode, kappa_g, data, a_plus, a_minus, b)
    raise ValueError(f"unknown backend {use!r}")
