"""Joint hierarchical tree learning via tree-Wasserstein distances."""

from ._cotwd import (
    Tree,
    decode_tree,
    exact_ot,
    from_newick,
    generate_toy,
    haar_basis,
    haar_filter,
    knn_accuracy,
    landmark_spectrum,
    pairwise_twd,
    run,
    twd,
)

__all__ = [
    "Tree",
    "decode_tree",
    "exact_ot",
    "from_newick",
    "generate_toy",
    "haar_basis",
    "haar_filter",
    "knn_accuracy",
    "landmark_spectrum",
    "pairwise_twd",
    "run",
    "twd",
]
