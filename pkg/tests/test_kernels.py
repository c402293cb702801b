import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slabcavity import kernels
from slabcavity._pykernels import interface_coefficients
from slabcavity.dispersion import MaterialModel, builtin_material
from slabcavity.fresnel import Stack, interface_data
from slabcavity.multilayer import NumericalDegeneracyError

needs_compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")

STACKS = [
    Stack(builtin_material("al_drude"), builtin_material("al_drude"), MaterialModel.vacuum()),
    Stack(builtin_material("al_drude"), builtin_material("teflon_fep"), MaterialModel.vacuum()),
    Stack(MaterialModel.constant(4.0), MaterialModel.oscillators([(1.1, 2e16)]), MaterialModel.constant(1.5)),
]
MODES = [kernels.MODE_DIRECT, kernels.MODE_DELTA, kernels.MODE_A1, kernels.MODE_LIFSHITZ, kernels.MODE_THICKNESS,
         kernels.MODE_RESIDUAL, kernels.MODE_GAP, kernels.MODE_GAP_DERIV, kernels.MODE_RESIDUAL_ABS,
         kernels.MODE_RESIDUAL_K2]


@needs_compiled
@settings(max_examples=40)
@given(which=st.integers(0, 2), mode=st.sampled_from(MODES), zeta=st.one_of(st.just(0.0), st.floats(1e11, 1e17)),
       ap=st.floats(0.05e-6, 3e-6), am=st.floats(0.05e-6, 3e-6), b=st.floats(1e-9, 2e-6))
def test_compiled_matches_python(which, mode, zeta, ap, am, b):
    stack = STACKS[which]
    data = interface_data(stack, zeta, zero_limit=(zeta == 0.0))
    # nodes start at the light line, as in the k_perp integral
    kappa_0 = np.sqrt(stack.gap.kappa_shift(zeta))
    kg = kappa_0 + np.geomspace(1e-3, 60, 97) / min(ap, am)
    py = kernels.integrand(mode, kg, data, ap, am, b, backend="python")
    cy = kernels.integrand(mode, kg, data, ap, am, b, backend="cython")
    scale = np.max(np.abs(py))

    def piece(m):
        return np.max(np.abs(kernels.integrand(m, kg, data, ap, am, b, backend="python")))

    if mode == kernels.MODE_DIRECT:
        # literal difference of two cavity factors: compare on their own scale
        scale = max(scale, piece(kernels.MODE_GAP))
    elif mode in (kernels.MODE_RESIDUAL, kernels.MODE_RESIDUAL_ABS, kernels.MODE_RESIDUAL_K2):
        # difference of O(1) pieces
        scale = max(scale, piece(kernels.MODE_DELTA), piece(kernels.MODE_LIFSHITZ))
        if mode == kernels.MODE_RESIDUAL_K2:
            scale *= np.max(interface_coefficients(kg, data)[0])
    assert np.max(np.abs(py - cy)) <= 1e-12 * max(scale, 1e-300)


def test_unknown_backend():
    data = interface_data(STACKS[0], 1e14)
    with pytest.raises(ValueError):
        kernels.integrand(1, np.array([1e6]), data, 1e-6, 1e-6, 1e-7, backend="fortran")


@pytest.mark.parametrize("backend", ["python"] + (["cython"] if kernels.BACKEND == "cython" else []))
def test_degeneracy_reported(backend):
    # static Drude TM: D1 = D2 = -1, and kappa_g = 0 makes every decay factor 1
    data = interface_data(STACKS[0], 0.0, zero_limit=True)
    with pytest.raises(NumericalDegeneracyError):
        kernels.integrand(kernels.MODE_DELTA, np.array([0.0, 1e6]), data, 1e-6, 1.1e-6, 1e-7, backend=backend)


def test_pure_python_fallback_selected_by_environment():
    env = dict(os.environ, SLABCAVITY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from slabcavity import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
