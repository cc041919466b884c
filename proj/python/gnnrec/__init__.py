"""Graph neural network parameter recovery: synthetic data, training, tensor initialization."""

from ._gnnrec import (  # noqa: F401
    Dataset,
    GnnrecError,
    Graph,
    NormalizedAdjacency,
    agd_run,
    aligned_relative_error,
    build_cycle,
    build_empty,
    build_grid2d,
    build_random_bounded,
    build_random_regular,
    builtin_spec_names,
    default_eta,
    forward,
    forward_labels,
    lemma1_bounds,
    normalized_adjacency,
    risk,
    run_experiment,
    run_oracle_suite,
    sample_features,
    sample_ground_truth,
    tensor_initialize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
