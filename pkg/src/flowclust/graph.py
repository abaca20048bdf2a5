"""Coordinate-free flow on a pairwise distance matrix.

When data arrives as distances rather than coordinates, the attraction
dynamics can be run directly on the matrix. Along the coordinate flow
with the untruncated gaussian weight the pair distances obey

    d_ij' = sum_k w(d_ik) (d_jk^2 - d_ij^2 - d_ik^2) / (2 d_ij)
          + sum_k w(d_jk) (d_ik^2 - d_ij^2 - d_jk^2) / (2 d_ij)

which uses only matrix entries (the inner products are recovered from
the law of cosines). Entries with d_ij = 0 stay at zero. The matrix is
stepped with the explicit Euler rule and entries are clamped at zero,
since a distance can never be negative; extraction then reads connected
components off the evolved matrix, exactly like the coordinate pipeline
but without cluster centers.
"""

from dataclasses import dataclass

import numpy as np

from .engine import ClusterAssignment, UnionFind, canonicalize_labels
from .potentials import _sigma_from_distances

__all__ = [
    "DistanceEvolution",
    "distance_auto_sigma",
    "distance_rhs",
    "evolve_distances",
    "extract_graph_clusters",
    "validate_distance_matrix",
]


def validate_distance_matrix(distances) -> np.ndarray:
    """Check square shape, symmetry, zero diagonal, finite nonneg entries."""
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if d.shape[0] == 0:
        raise ValueError("distance matrix must be nonempty")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix entries must be finite")
    if np.any(d < 0.0):
        raise ValueError("distance matrix entries must be nonnegative")
    if np.any(d.diagonal() != 0.0):
        raise ValueError("distance matrix diagonal must be exactly zero")
    if not np.array_equal(d, d.T):
        raise ValueError("distance matrix must be symmetric")
    return d


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    return sigma


def distance_auto_sigma(distances) -> float:
    """Interaction scale from the matrix itself.

    Same statistic as the coordinate heuristic: sample s.d. of the
    distinct pair distances, here divided by 1 because no coordinate
    dimension is available.
    """
    d = validate_distance_matrix(distances)
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least two items to tune sigma")
    pairs = d[np.triu_indices(n, 1)]
    return _sigma_from_distances(pairs, 1)


def _gaussian_weights(d: np.ndarray, sigma: float) -> np.ndarray:
    # d*d may overflow on absurdly scaled input; exp maps it to 0 or nan
    # and the evolution loop reports non-finite results with the iteration
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(-(d * d) / (sigma * sigma))


def distance_rhs(distances, sigma: float, *, validate: bool = True) -> np.ndarray:
    """Instantaneous change of every pair distance under the flow."""
    d = validate_distance_matrix(distances) if validate else np.asarray(distances)
    sigma = _check_sigma(sigma)
    with np.errstate(invalid="ignore", over="ignore"):
        # overflow here is tolerated on purpose: the evolution loop
        # raises a FloatingPointError naming the offending iteration
        w = _gaussian_weights(d, sigma)
        s = d * d
        row_w = w.sum(axis=1)
        row_ws = (w * s).sum(axis=1)
        num = w @ s - s * row_w[:, None] - row_ws[:, None]
        # zero distances are fixed points of their own entry; mask first
        positive = d > 0.0
        half = np.where(positive, num, 0.0) / np.where(positive, 2.0 * d, 1.0)
        rhs = half + half.T
    np.fill_diagonal(rhs, 0.0)
    return rhs


@dataclass
class DistanceEvolution:
    """Evolved matrix plus run diagnostics."""

    distances: np.ndarray
    iterations: int
    converged: bool
    clamp_events: int
    sigma: float
    dt: float
    delta_trace: np.ndarray
    warnings: list


def _euclidean_embeddable(d: np.ndarray) -> bool:
    """Classical-scaling test: the double-centered squared-distance
    Gram matrix is PSD exactly when some point set realizes d."""
    with np.errstate(over="ignore"):
        sq = d * d
    if not np.all(np.isfinite(sq)):
        return True  # the step loop will raise on the overflow itself
    n = d.shape[0]
    centering = np.eye(n) - 1.0 / n
    gram = -0.5 * (centering @ sq @ centering)
    gram = 0.5 * (gram + gram.T)
    eigs = np.linalg.eigvalsh(gram)
    scale = max(abs(float(eigs[0])), abs(float(eigs[-1])), 1.0)
    return float(eigs[0]) >= -1e-8 * scale


def _auto_dt(w: np.ndarray) -> float:
    """Step bound from the strongest coupling row.

    A pair entry contracts at up to sum_k (w_ik + w_jk), so the safe
    step is half the coordinate-flow bound, shrunk by 0.9 and capped
    at 1.0.
    """
    offdiag = w.copy()
    np.fill_diagonal(offdiag, 0.0)
    heaviest = float(offdiag.sum(axis=1).max())
    if heaviest <= 0.0:
        return 1.0
    return min(0.9 / (2.0 * heaviest), 1.0)


def evolve_distances(
    distances,
    sigma: float | None = None,
    dt: float | None = None,
    max_iters: int = 10000,
    stop_tol: float = 1e-5,
) -> DistanceEvolution:
    """Run the matrix flow until entries stop moving.

    Stops when the largest single-entry change in a step drops below
    stop_tol. With dt=None the step is re-derived from the current
    weights every iteration.
    """
    d = validate_distance_matrix(distances)
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if stop_tol < 0.0 or not np.isfinite(stop_tol):
        raise ValueError(f"stop_tol must be finite and >= 0, got {stop_tol}")
    sigma = distance_auto_sigma(d) if sigma is None else _check_sigma(sigma)
    if dt is not None:
        dt = float(dt)
        if not np.isfinite(dt) or dt <= 0.0:
            raise ValueError(f"dt must be positive and finite, got {dt}")

    warnings = []
    if not _euclidean_embeddable(d):
        warnings.append(
            "input distances are not Euclidean-embeddable; the "
            "coordinate-flow equivalence does not apply to this run"
        )

    step = dt if dt is not None else _auto_dt(_gaussian_weights(d, sigma))
    upper = np.triu_indices(d.shape[0], 1)
    clamps = 0
    trace = []
    converged = False
    iterations = 0
    for it in range(max_iters):
        if dt is None:
            step = _auto_dt(_gaussian_weights(d, sigma))
        new = d + step * distance_rhs(d, sigma, validate=False)
        if not np.all(np.isfinite(new)):
            raise FloatingPointError(
                f"non-finite distances at iteration {it + 1}; "
                "reduce dt or rescale the input"
            )
        clamps += int(np.count_nonzero(new[upper] < 0.0))
        new = np.maximum(new, 0.0)
        delta = float(np.max(np.abs(new - d))) if d.size else 0.0
        d = new
        iterations += 1
        trace.append(delta)
        if delta < stop_tol:
            converged = True
            break
    return DistanceEvolution(
        distances=d,
        iterations=iterations,
        converged=converged,
        clamp_events=clamps,
        sigma=sigma,
        dt=step,
        delta_trace=np.asarray(trace, dtype=np.float64),
        warnings=warnings,
    )


def extract_graph_clusters(distances, threshold: float) -> ClusterAssignment:
    """Connected components of pairs closer than threshold (strict).

    Centers have zero columns: no coordinates exist in this pipeline.
    """
    d = validate_distance_matrix(distances)
    threshold = float(threshold)
    if not np.isfinite(threshold) or threshold <= 0.0:
        raise ValueError(f"threshold must be positive and finite, got {threshold}")
    n = d.shape[0]
    uf = UnionFind(n)
    iu, ju = np.triu_indices(n, 1)
    close = d[iu, ju] < threshold
    for a, b in zip(iu[close].tolist(), ju[close].tolist()):
        uf.union(a, b)
    roots = np.array([uf.find(k) for k in range(n)], dtype=np.int64)
    labels, _ = canonicalize_labels(roots)
    p = int(labels.max()) + 1
    return ClusterAssignment(
        labels=labels,
        centers=np.zeros((p, 0)),
        sizes=np.bincount(labels, minlength=p),
    )
