"""relfock: relational quantum states on truncated Fock spaces.

Systems are finite occupation-number spaces; subsystem relations are explicit
isometric embeddings whose image may be a proper subspace of the reference
space. The library computes reduced states whose trace can fall below one,
their eigen-decompositions (possible internal states plus an annihilation
outcome), Schmidt decompositions with an orthogonal residual, joint outcome
distributions over disjoint subsystems, charge-sector superselection checks,
and exact unitary dynamics, all at dense desk scale.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .composition import (
    JointDistribution,
    SchmidtDecomposition,
    compose_embeddings,
    joint_distribution,
    regroup_embedding,
    schmidt_decompose,
)
from .dynamics import (
    HamiltonianSpec,
    HamiltonianTerm,
    Trajectory,
    build_hamiltonian,
    conversion_hamiltonian,
    evolve,
    evolve_trajectory,
    free_hamiltonian,
    hopping_hamiltonian,
    trace_deficit_trajectory,
)
from .errors import (
    ChargeCompatibilityError,
    EmbeddingValidationError,
    ScenarioError,
    SpaceMismatchError,
)
from .hilbert import (
    CHARGE_KINDS,
    Embedding,
    EmbeddingValidation,
    FockSpace,
    ImageProjection,
    LinearOperator,
    ModePartition,
    ModeSpec,
    StateVector,
    basis_state,
    bell_state,
    build_fock_space,
    charge_operator,
    charge_values,
    embedding_from_isometry,
    ghz_state,
    identity_embedding,
    identity_operator,
    ladder_operator,
    mode_partition_embedding,
    number_operator,
    project_onto_image,
    random_isometry_embedding,
    random_state_vector,
    state_from_amplitudes,
    tensor_product,
    validate_embedding,
)
from .relational import (
    DensityOperator,
    IndependenceReport,
    SampleOutcome,
    SpectralDecomposition,
    check_isolated_independence,
    possible_internal_states,
    relational_state,
    sample_internal_state,
    sample_internal_states,
)
from .report import Report
from .runner import run_scenario
from .scenario import Scenario, Task, load_scenario
from .superselection import (
    SectorDecomposition,
    SuperselectionReport,
    check_embedding_charge_compatibility,
    check_superselection,
    is_charge_eigenstate,
    sector_decomposition,
)
from .tolerances import Tolerances, active_tolerances, set_active_tolerances

__all__ = [
    "__version__",
    "CHARGE_KINDS",
    "ChargeCompatibilityError",
    "DensityOperator",
    "Embedding",
    "EmbeddingValidation",
    "EmbeddingValidationError",
    "FockSpace",
    "HamiltonianSpec",
    "HamiltonianTerm",
    "ImageProjection",
    "IndependenceReport",
    "JointDistribution",
    "LinearOperator",
    "ModePartition",
    "ModeSpec",
    "Report",
    "SampleOutcome",
    "Scenario",
    "ScenarioError",
    "SchmidtDecomposition",
    "SectorDecomposition",
    "SpaceMismatchError",
    "SpectralDecomposition",
    "StateVector",
    "SuperselectionReport",
    "Task",
    "Tolerances",
    "Trajectory",
    "active_tolerances",
    "basis_state",
    "bell_state",
    "build_fock_space",
    "build_hamiltonian",
    "charge_operator",
    "charge_values",
    "check_embedding_charge_compatibility",
    "check_isolated_independence",
    "check_superselection",
    "compose_embeddings",
    "conversion_hamiltonian",
    "embedding_from_isometry",
    "evolve",
    "evolve_trajectory",
    "free_hamiltonian",
    "ghz_state",
    "hopping_hamiltonian",
    "identity_embedding",
    "identity_operator",
    "is_charge_eigenstate",
    "joint_distribution",
    "ladder_operator",
    "load_scenario",
    "mode_partition_embedding",
    "number_operator",
    "possible_internal_states",
    "project_onto_image",
    "random_isometry_embedding",
    "random_state_vector",
    "regroup_embedding",
    "relational_state",
    "run_scenario",
    "sample_internal_state",
    "sample_internal_states",
    "schmidt_decompose",
    "sector_decomposition",
    "set_active_tolerances",
    "state_from_amplitudes",
    "tensor_product",
    "trace_deficit_trajectory",
    "validate_embedding",
]
