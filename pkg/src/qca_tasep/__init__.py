"""Discrete-time quantum cellular automaton of boundary-driven hopping.

A chain of qubits is updated by a staircase of local Kraus channels:
injection at the left edge, an ancilla-mediated hop (optionally dressed with
a coherent exchange) on every bond left to right, ejection at the right
edge.  The package provides a dense vectorized-density-matrix backend, a
matrix-product-operator backend with adaptive bond dimension, classical
stationary-state oracles (matrix-product ansatz and an explicit Markov
chain), quantum-correlation measures, and a command line harness.
"""

from .classical import (
    MarkovModel,
    MpaMatrices,
    build_markov,
    build_mpa,
    classify_phase,
    critical_rate,
    distribution_profile,
    mpa_profile,
    stationary_distribution,
)
from .correlations import (
    Bipartition,
    CorrelationRecord,
    l1_coherence,
    lqu,
    max_two_site_coherence,
    max_two_site_lqu,
    moment_ratio,
    negativity,
    partial_transpose,
    ppt_moments_dense,
    trace_distance,
    two_qubit_ppt_separable,
)
from .exact import (
    ConvergenceReport,
    DensityMatrixState,
    apply_channel,
    density_matrix,
    density_profile,
    evolve_to_ness,
    init_state,
    mean_density,
    min_eigenvalue,
    occupation,
    parse_pattern,
    reduced_density_matrix,
    sweep,
)
from .kernels import COMPILED
from .model import (
    GateMatrix,
    KrausChannel,
    LindbladGenerator,
    ModelParams,
    build_bulk_hop_gate,
    build_coherent_hop,
    build_left_boundary_gate,
    build_right_boundary_gate,
    bulk_channel,
    derive_kraus,
    left_boundary_channel,
    lindblad_generator,
    right_boundary_channel,
)
from .tensor import (
    MpoState,
    SweepStats,
    TruncationPolicy,
    TruncationQualityWarning,
    apply_bond_channel,
    apply_site_channel,
    evolve_mpo_to_ness,
    mpo_density_profile,
    mpo_from_product,
    mpo_mean_density,
    mpo_occupation,
    mpo_ppt_moments,
    mpo_to_dense,
    mpo_trace,
    mpo_two_site_rdm,
    sweep_mpo,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "COMPILED",
    # model
    "ModelParams",
    "GateMatrix",
    "KrausChannel",
    "LindbladGenerator",
    "build_coherent_hop",
    "build_bulk_hop_gate",
    "build_left_boundary_gate",
    "build_right_boundary_gate",
    "derive_kraus",
    "bulk_channel",
    "left_boundary_channel",
    "right_boundary_channel",
    "lindblad_generator",
    # exact
    "DensityMatrixState",
    "ConvergenceReport",
    "init_state",
    "parse_pattern",
    "density_matrix",
    "occupation",
    "density_profile",
    "mean_density",
    "reduced_density_matrix",
    "min_eigenvalue",
    "apply_channel",
    "sweep",
    "evolve_to_ness",
    # classical
    "MpaMatrices",
    "MarkovModel",
    "build_mpa",
    "mpa_profile",
    "build_markov",
    "stationary_distribution",
    "distribution_profile",
    "critical_rate",
    "classify_phase",
    # tensor
    "MpoState",
    "TruncationPolicy",
    "SweepStats",
    "TruncationQualityWarning",
    "mpo_from_product",
    "mpo_trace",
    "mpo_to_dense",
    "apply_site_channel",
    "apply_bond_channel",
    "sweep_mpo",
    "evolve_mpo_to_ness",
    "mpo_occupation",
    "mpo_density_profile",
    "mpo_mean_density",
    "mpo_two_site_rdm",
    "mpo_ppt_moments",
    # correlations
    "Bipartition",
    "CorrelationRecord",
    "trace_distance",
    "partial_transpose",
    "negativity",
    "ppt_moments_dense",
    "moment_ratio",
    "lqu",
    "l1_coherence",
    "two_qubit_ppt_separable",
    "max_two_site_lqu",
    "max_two_site_coherence",
]
