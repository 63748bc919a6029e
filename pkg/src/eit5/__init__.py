"""Linear optical response of a five-level atom with two RF-dressed ground doublets."""

from .analytic import (chi_at_zero_detuning, chi_reduced, chi_reduced_as_printed, chi_standard_eit,
                       dressed_excited_triplet, narrow_resonances)
from .errors import ConfigError, DegenerateSystemError, EIT5Error, IntegrationError
from .model import (AtomParams, DressedFrame, FieldParams, PhysicalScaling, bare_hamiltonian,
                    dressed_hamiltonian, dressing_angles)
from .steady_state import (BBManifoldState, CoherenceSolution, bb_manifold_steady_state, chi_numeric,
                           coherence_steady_state_general, coherence_steady_state_on_resonance)

__all__ = [
    "AtomParams", "FieldParams", "DressedFrame", "PhysicalScaling", "dressing_angles",
    "bare_hamiltonian", "dressed_hamiltonian", "BBManifoldState", "CoherenceSolution",
    "bb_manifold_steady_state", "coherence_steady_state_on_resonance",
    "coherence_steady_state_general", "chi_numeric", "chi_reduced", "chi_reduced_as_printed",
    "chi_standard_eit", "narrow_resonances", "dressed_excited_triplet", "chi_at_zero_detuning",
    "EIT5Error", "ConfigError", "DegenerateSystemError", "IntegrationError",
]
