"""Reconstructing random graphs from vertex-sampled, edge-noised traces."""

from .analysis import (
    PairBijection,
    PairPartition,
    check_event_A1,
    check_event_A3,
    count_nonfixed,
    flip_probability,
    mc_flip_probabilities,
    mc_tail_bounds,
    partition_nonfixed_pairs,
)
from .bounds import (
    CoupledSample,
    coupled_deletion_sample,
    cycle_pair_instance,
    noisy_cut_samples,
    path_complement_instance,
    sample_noisy_cut,
    single_edge_removal_isomorphic,
    two_cut_special_count,
)
from .experiments import ConfigError, ExperimentConfig, run_reconstruction_sweep, run_verify_suite
from .formats import read_edge_list, read_traces, write_edge_list, write_traces
from .graph import (
    GraphSizeError,
    LabeledGraph,
    complement,
    cut_size,
    cycle,
    induced_subgraph,
    path,
    random_graph,
    small_graph_isomorphic,
    two_cut_distribution,
)
from .noise import (
    NoiseParams,
    ParameterError,
    ProvenanceError,
    Trace,
    generate_trace,
    generate_traces,
    normalize,
    normalized_params,
)
from .pairing import (
    Matching,
    PairingTriple,
    algorithm1_params,
    best_triple_exact,
    best_triple_heuristic,
    delta,
    model_constants,
    oracle_pairing,
    pair_traces,
    pair_vertices,
)
from .reconstruct import (
    LabelAssignment,
    ReconstructionReport,
    build_equivalence_classes,
    evaluate_reconstruction,
    reconstruct_deletion,
    reconstruct_end_to_end,
    reconstruct_flip,
    required_traces,
)

__version__ = "0.1.0"

__all__ = [
    "algorithm1_params",
    "best_triple_exact",
    "best_triple_heuristic",
    "build_equivalence_classes",
    "check_event_A1",
    "check_event_A3",
    "complement",
    "ConfigError",
    "count_nonfixed",
    "coupled_deletion_sample",
    "CoupledSample",
    "cut_size",
    "cycle",
    "cycle_pair_instance",
    "delta",
    "evaluate_reconstruction",
    "ExperimentConfig",
    "flip_probability",
    "generate_trace",
    "generate_traces",
    "GraphSizeError",
    "induced_subgraph",
    "LabelAssignment",
    "LabeledGraph",
    "Matching",
    "mc_flip_probabilities",
    "mc_tail_bounds",
    "model_constants",
    "NoiseParams",
    "noisy_cut_samples",
    "normalize",
    "normalized_params",
    "oracle_pairing",
    "pair_traces",
    "pair_vertices",
    "PairBijection",
    "PairingTriple",
    "PairPartition",
    "ParameterError",
    "partition_nonfixed_pairs",
    "path",
    "path_complement_instance",
    "ProvenanceError",
    "random_graph",
    "read_edge_list",
    "read_traces",
    "reconstruct_deletion",
    "reconstruct_end_to_end",
    "reconstruct_flip",
    "ReconstructionReport",
    "required_traces",
    "run_reconstruction_sweep",
    "run_verify_suite",
    "sample_noisy_cut",
    "single_edge_removal_isomorphic",
    "small_graph_isomorphic",
    "Trace",
    "two_cut_distribution",
    "two_cut_special_count",
    "write_edge_list",
    "write_traces",
]
