"""Reference clustering baselines: seeded k-means and spectral partitioning.

Both baselines are deterministic given their seed. k-means restarts use
independent streams seeded seed, seed+1, ... and keep the strictly best
inertia, so reruns reproduce byte-identical assignments. The spectral
pipeline diagonalizes the interaction Laplacian with a cyclic
plane-rotation sweep for small matrices and LAPACK above that, picks
the cluster count from the largest eigenvalue gap when none is given,
and k-means the row-normalized eigenvector embedding.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dynamics import ParticleState, build_laplacian
from .engine import ClusterAssignment, canonicalize_labels
from .potentials import PotentialSpec, auto_tune_sigma
from .prng import SplitMix64

__all__ = [
    "EigenDecomposition",
    "KMeansConfig",
    "SpectralResult",
    "eigen_gap_count",
    "kmeans",
    "spectral_cluster",
    "symmetric_eigen",
]

JACOBI_MAX_N = 200


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError(f"points must be a nonempty (N, M) array, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


@dataclass
class KMeansConfig:
    """Settings for restarted Lloyd iteration."""

    k: int
    restarts: int = 100
    max_iters: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


def _distinct_indices(rng: SplitMix64, n: int, k: int) -> list:
    chosen = []
    seen = set()
    while len(chosen) < k:
        j = int(rng.index_below(n))
        if j not in seen:
            seen.add(j)
            chosen.append(j)
    return chosen


def _lloyd(pts: np.ndarray, k: int, rng: SplitMix64, max_iters: int):
    n = pts.shape[0]
    centers = pts[_distinct_indices(rng, n, k)].copy()
    labels = None
    for _ in range(max_iters):
        d2 = cdist(pts, centers, "sqeuclidean")
        new_labels = np.argmin(d2, axis=1)  # ties go to the lowest id
        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            # hand each empty cluster the point farthest from its center
            assigned = d2[np.arange(n), new_labels].copy()
            for c in np.nonzero(counts == 0)[0]:
                j = int(np.argmax(assigned))
                new_labels[j] = c
                assigned[j] = -1.0
            counts = np.bincount(new_labels, minlength=k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros((k, pts.shape[1]))
        np.add.at(sums, labels, pts)
        centers = sums / counts[:, None]
    d2 = cdist(pts, centers, "sqeuclidean")
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, centers, inertia


def kmeans(points, config: KMeansConfig):
    """Restarted Lloyd iteration; returns (assignment, inertia)."""
    pts = _check_points(points)
    n = pts.shape[0]
    if config.k > n:
        raise ValueError(f"k = {config.k} exceeds the {n} data points")
    best = None
    for r in range(config.restarts):
        rng = SplitMix64(config.seed + r)
        labels, centers, inertia = _lloyd(pts, config.k, rng, config.max_iters)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    labels, centers, inertia = best
    canon, order = canonicalize_labels(labels)
    assignment = ClusterAssignment(
        labels=canon,
        centers=centers[order],
        sizes=np.bincount(canon, minlength=config.k),
    )
    return assignment, inertia


@dataclass
class EigenDecomposition:
    """Ascending eigenvalues and matching orthonormal column vectors."""

    values: np.ndarray
    vectors: np.ndarray


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    # flip each column so its largest-magnitude entry (first on ties)
    # is positive; removes the solver's sign ambiguity
    out = vectors.copy()
    for j in range(out.shape[1]):
        lead = int(np.argmax(np.abs(out[:, j])))
        if out[lead, j] < 0.0:
            out[:, j] = -out[:, j]
    return out


def _jacobi(a: np.ndarray, max_sweeps: int = 50):
    n = a.shape[0]
    mat = a.copy()
    vec = np.eye(n)
    total = float(np.linalg.norm(mat))
    tol = 1e-12 * total
    for _ in range(max_sweeps):
        off = mat - np.diag(mat.diagonal())
        if float(np.linalg.norm(off)) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = mat[p, q]
                if apq == 0.0:
                    continue
                app = mat[p, p]
                aqq = mat[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = mat[:, p].copy()
                col_q = mat[:, q].copy()
                new_p = c * col_p - s * col_q
                new_q = s * col_p + c * col_q
                mat[:, p] = new_p
                mat[p, :] = new_p
                mat[:, q] = new_q
                mat[q, :] = new_q
                # rotated diagonal entries in their exact closed form
                mat[p, p] = app - t * apq
                mat[q, q] = aqq + t * apq
                mat[p, q] = 0.0
                mat[q, p] = 0.0
                vec_p = vec[:, p].copy()
                vec[:, p] = c * vec_p - s * vec[:, q]
                vec[:, q] = s * vec_p + c * vec[:, q]
    return mat.diagonal().copy(), vec


def symmetric_eigen(a) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Cyclic plane rotations up to n = 200, LAPACK above. Eigenvalues
    ascend; each vector's largest-magnitude entry is positive.
    """
    mat = np.asarray(a, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise ValueError(f"matrix must be square and nonempty, got {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix entries must be finite")
    if not np.array_equal(mat, mat.T):
        raise ValueError("matrix must be symmetric")
    if mat.shape[0] > JACOBI_MAX_N:
        values, vectors = np.linalg.eigh(mat)
    else:
        values, vectors = _jacobi(mat)
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(
        values=values[order],
        vectors=_canonical_signs(vectors[:, order]),
    )


def eigen_gap_count(values) -> int:
    """Cluster count suggested by the largest gap in the low spectrum.

    Only gaps among the first min(N-1, max(1, N//2)) consecutive pairs
    are scanned; the count is the 1-based position of the largest gap,
    earliest on ties.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    n = vals.shape[0]
    if n < 2:
        return 1
    span = min(n - 1, max(1, n // 2))
    gaps = np.diff(vals)[:span]
    return int(np.argmax(gaps)) + 1


@dataclass
class SpectralResult:
    """Partition plus the spectrum that produced it."""

    assignment: ClusterAssignment
    eigenvalues: np.ndarray
    k: int
    sigma: float


def spectral_cluster(
    points,
    k: int | None = None,
    potential: PotentialSpec | None = None,
    restarts: int = 100,
    seed: int = 0,
    max_iters: int = 300,
) -> SpectralResult:
    """Partition points via the interaction Laplacian's low eigenvectors.

    With k=None the count comes from the largest eigenvalue gap. Rows
    of the k-column eigenvector embedding are normalized (zero rows are
    kept as zeros) and clustered with restarted k-means; the reported
    centers are plain means in the original coordinates.
    """
    pts = _check_points(points)
    n = pts.shape[0]
    spec = potential if potential is not None else PotentialSpec(sigma=auto_tune_sigma(pts))
    lap = build_laplacian(ParticleState.from_points(pts), spec)
    dec = symmetric_eigen(lap)
    kk = eigen_gap_count(dec.values) if k is None else int(k)
    if kk < 1 or kk > n:
        raise ValueError(f"cluster count {kk} out of range for {n} points")
    emb = dec.vectors[:, :kk].copy()
    norms = np.linalg.norm(emb, axis=1)
    rows = norms > 0.0
    emb[rows] /= norms[rows, None]
    asg_emb, _ = kmeans(
        emb, KMeansConfig(k=kk, restarts=restarts, max_iters=max_iters, seed=seed)
    )
    centers = np.vstack(
        [pts[asg_emb.labels == lab].mean(axis=0) for lab in range(kk)]
    )
    assignment = ClusterAssignment(
        labels=asg_emb.labels, centers=centers, sizes=asg_emb.sizes
    )
    return SpectralResult(
        assignment=assignment, eigenvalues=dec.values, k=kk, sigma=spec.sigma
    )
