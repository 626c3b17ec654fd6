from ._qmbs import (
    NumericError,
    d4_schmidt,
    degeneracy_recursion,
    ff_ground_dim,
    free_convolution_semicircle_arcsine,
    ie_parameter_anderson,
    kurtosis_theory,
    mc_kurtoses,
    motzkin_gap,
    motzkin_hamiltonian,
    motzkin_mps_schmidt,
    motzkin_number,
    motzkin_schmidt,
    motzkin_state,
    mps_ground_energy,
    one_minus_p_universal,
)

__all__ = [
    "NumericError",
    "d4_schmidt",
    "degeneracy_recursion",
    "ff_ground_dim",
    "free_convolution_semicircle_arcsine",
    "ie_parameter_anderson",
    "kurtosis_theory",
    "mc_kurtoses",
    "motzkin_gap",
    "motzkin_hamiltonian",
    "motzkin_mps_schmidt",
    "motzkin_number",
    "motzkin_schmidt",
    "motzkin_state",
    "mps_ground_energy",
    "one_minus_p_universal",
]
