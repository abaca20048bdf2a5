"""Deterministic clustering via attractive particle flows.

Data points are released as particles that drift along the negative
gradient of a short-range pair potential; groups of mutually reachable
points collapse onto common fixed points, which are read off as cluster
centers. A coordinate-free variant evolves a pairwise distance matrix
directly. k-means and spectral baselines, dataset generators, and
evaluation tooling round out the package.

Typical use:

    from flowclust import FlowConfig, cluster, load_iris

    result = cluster(load_iris().points, FlowConfig(min_cluster_fraction=0.05))
    print(result.assignment.sizes)
"""

__version__ = "0.1.0"

from .baselines import (
    EigenDecomposition,
    KMeansConfig,
    SpectralResult,
    eigen_gap_count,
    kmeans,
    spectral_cluster,
    symmetric_eigen,
)
from .datasets import (
    PRESET_NAMES,
    LabeledDataset,
    gen_concentric_spheres,
    gen_gaussian_mixture,
    gen_hypersphere_clusters,
    load_csv,
    load_iris,
    make_preset,
    save_csv,
)
from .dynamics import (
    ParticleState,
    build_laplacian,
    euler_step,
    force_field,
    lyapunov_value,
    pairwise_distances,
    stability_max_dt,
    total_potential,
)
from .engine import (
    ClusterAssignment,
    FlowConfig,
    FlowResult,
    cluster,
    dispersion,
    extract_clusters,
)
from .evaluate import (
    BenchmarkReport,
    MethodStats,
    confusion_matrix,
    diagonal_heavy_sort,
    macro_f1,
    run_benchmark,
    total_error,
)
from .graph import (
    DistanceEvolution,
    distance_auto_sigma,
    distance_rhs,
    evolve_distances,
    extract_graph_clusters,
    validate_distance_matrix,
)
from .potentials import (
    GAUSSIAN,
    QUARTIC,
    R_STAR_FACTOR,
    PotentialSpec,
    auto_tune_sigma,
    interaction_weight,
    potential_value,
)
from .prng import SplitMix64

__all__ = [
    "BenchmarkReport",
    "ClusterAssignment",
    "DistanceEvolution",
    "EigenDecomposition",
    "FlowConfig",
    "FlowResult",
    "GAUSSIAN",
    "KMeansConfig",
    "LabeledDataset",
    "MethodStats",
    "PRESET_NAMES",
    "ParticleState",
    "PotentialSpec",
    "QUARTIC",
    "R_STAR_FACTOR",
    "SpectralResult",
    "SplitMix64",
    "__version__",
    "auto_tune_sigma",
    "build_laplacian",
    "cluster",
    "confusion_matrix",
    "diagonal_heavy_sort",
    "dispersion",
    "distance_auto_sigma",
    "distance_rhs",
    "eigen_gap_count",
    "euler_step",
    "evolve_distances",
    "extract_clusters",
    "extract_graph_clusters",
    "force_field",
    "gen_concentric_spheres",
    "gen_gaussian_mixture",
    "gen_hypersphere_clusters",
    "interaction_weight",
    "kmeans",
    "load_csv",
    "load_iris",
    "lyapunov_value",
    "macro_f1",
    "make_preset",
    "pairwise_distances",
    "potential_value",
    "run_benchmark",
    "save_csv",
    "spectral_cluster",
    "stability_max_dt",
    "symmetric_eigen",
    "total_error",
    "total_potential",
    "validate_distance_matrix",
]
