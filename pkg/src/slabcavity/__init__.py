"""Casimir pressure on a slab in a planar cavity."""
__version__ = "0.1.0"

from .dispersion import MaterialModel, builtin_material, load_material, resolve_material  # noqa: E402
from .force import (  # noqa: E402
    ForceResult,
    TaylorCoefficient,
    a1_ideal,
    casimir_ideal,
    force_delta_form,
    force_finite_T,
    force_lifshitz_difference,
    force_zero_T,
    lifshitz_pressure,
    taylor_a1,
    thickness_correction,
    thickness_residual,
)
from .fresnel import SpectralPoint, Stack  # noqa: E402
from .multilayer import CavityGeometry  # noqa: E402
from .oscillator import OscillatorSetup, frequency_shift, harmonic_region, open_vs_closed  # noqa: E402
from .spectral import ConvergenceError, MatsubaraSpec, QuadratureSpec  # noqa: E402

__all__ = [
    "CavityGeometry", "ConvergenceError", "ForceResult", "MaterialModel", "MatsubaraSpec", "OscillatorSetup",
    "QuadratureSpec", "SpectralPoint", "Stack", "TaylorCoefficient", "a1_ideal", "builtin_material",
    "casimir_ideal", "force_delta_form", "force_finite_T", "force_lifshitz_difference", "force_zero_T",
    "frequency_shift", "harmonic_region", "lifshitz_pressure", "load_material", "open_vs_closed",
    "resolve_material", "taylor_a1", "thickness_correction", "thickness_residual",
]
