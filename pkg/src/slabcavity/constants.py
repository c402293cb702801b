"""Physical constants (CODATA 2018, exact SI where defined) and output conventions."""
from scipy import constants as _sc

HBAR = _sc.hbar          # J s
C_LIGHT = _sc.c          # m / s
K_B = _sc.k              # J / K

#: Positive pressure points from the a+ gap toward the a- gap (toward +z).
#: delta > 0 moves the slab toward the right wall.
SIGN_CONVENTION = (
    "pressure > 0 points toward +z (from gap a+ toward gap a-); "
    "a+ = h/2 + delta, a- = h/2 - delta"
)


def as_metadata():
    return {
        "hbar_J_s": HBAR,
        "c_m_per_s": C_LIGHT,
        "k_B_J_per_K": K_B,
        "sign_convention": SIGN_CONVENTION,
    }
