"""Ground-state energies of the transverse-field Ising model in the
thermodynamic limit from linked-cluster expansions with a variational
statevector solver."""

from .ansatz import AnsatzSpec, build_ansatz, map_periodic_to_open, wrap_parameters
from .lattice import Cluster, ExpansionPlan, build_plan, count_embeddings, enumerate_clusters
from .model import HamiltonianTerms, apply_hamiltonian, build_hamiltonian, energy_expectation
from .nlce import LayerRule, NlceResult, per_site_energy, reduced_energies, run_nlce
from .noise import NoiseStudyConfig, propagate_noise, scaling_study
from .reference import ed_ground_state, exact_chain_energy_per_site, shipped_square_reference
from .statevector import energy_and_gradient, prepare_reference, run_circuit
from .vqe import OptimizerConfig, SweepRecord, adiabatic_sweep, minimize, solve_cluster

__all__ = [
    "AnsatzSpec", "build_ansatz", "map_periodic_to_open", "wrap_parameters",
    "Cluster", "ExpansionPlan", "build_plan", "count_embeddings", "enumerate_clusters",
    "HamiltonianTerms", "apply_hamiltonian", "build_hamiltonian", "energy_expectation",
    "LayerRule", "NlceResult", "per_site_energy", "reduced_energies", "run_nlce",
    "NoiseStudyConfig", "propagate_noise", "scaling_study",
    "ed_ground_state", "exact_chain_energy_per_site", "shipped_square_reference",
    "energy_and_gradient", "prepare_reference", "run_circuit",
    "OptimizerConfig", "SweepRecord", "adiabatic_sweep", "minimize", "solve_cluster",
]
