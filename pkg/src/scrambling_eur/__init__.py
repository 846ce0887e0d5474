"""Entropic uncertainty relations for information scrambling.

Weak-measurement POVMs on exactly diagonalized spin chains, OTOCs and their
quasiprobabilities, Renyi entropies, and the uncertainty bounds built from them.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    bound_exact_c,
    kfold_bound,
    overlap_c_exact,
    scrambling_bound_exact_trace,
    scrambling_bound_taylor,
    theorem1_check,
    weak_value_bound,
)
from .entropy import (
    OutcomeDistribution,
    entropy_pair_beta,
    outcome_distribution,
    renyi_entropy,
    von_neumann_entropy,
)
from .models import SpinChainModel, build_hamiltonian, gibbs_state, heisenberg_evolve, reference_model, w_eigenstate
from .operators import Operator, ProjectorFamily, eig_hermitian, embed_pauli, schatten_norm
from .quasiprob import (
    QuasiprobTable,
    commutator_magnitude,
    kfold_quasiprobability,
    kirkwood_dirac,
    otoc,
    otoc_from_quasiprob,
    otoc_quasiprobability,
    weak_value,
)
from .weakmeas import (
    DetectorModel,
    build_detector_grid,
    coarse_wt_projectors,
    fine_grained_wt_projectors,
    forward_povm,
    reverse_povm,
)

__all__ = [
    "__version__",
    "BoundReport",
    "DetectorModel",
    "Operator",
    "OutcomeDistribution",
    "ProjectorFamily",
    "QuasiprobTable",
    "SpinChainModel",
    "bound_exact_c",
    "build_detector_grid",
    "build_hamiltonian",
    "coarse_wt_projectors",
    "commutator_magnitude",
    "eig_hermitian",
    "embed_pauli",
    "entropy_pair_beta",
    "fine_grained_wt_projectors",
    "forward_povm",
    "gibbs_state",
    "heisenberg_evolve",
    "kfold_bound",
    "kfold_quasiprobability",
    "kirkwood_dirac",
    "otoc",
    "otoc_from_quasiprob",
    "otoc_quasiprobability",
    "outcome_distribution",
    "overlap_c_exact",
    "reference_model",
    "renyi_entropy",
    "reverse_povm",
    "schatten_norm",
    "scrambling_bound_exact_trace",
    "scrambling_bound_taylor",
    "theorem1_check",
    "von_neumann_entropy",
    "w_eigenstate",
    "weak_value",
    "weak_value_bound",
]
