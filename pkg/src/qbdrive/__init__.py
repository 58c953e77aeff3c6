"""Counter-diabatic driving from the quantum-brachistochrone equation."""

__version__ = "0.1.0"

from .algebra import (CoeffVector, GeneratorBasis, build_gellmann_basis, cross,
                      projector_coeffs, structure_constants, to_coeffs, to_matrix)
from .driving import (Protocol, adiabatic_state, counter_diabatic, invariant_drift,
                      lr_phase, offdiag_coupling)
from .dynamics import eigen_probability, energy_variance, fidelity, propagate
from .qb import (commutation_condition, passage_time, solve_completion, solve_h1_n2,
                 solve_trajectory)
from .spectral import eigh, track_eigenpath
from .stability import (instability_cd, instability_general, spin1_perturbations,
                        stability_report)
