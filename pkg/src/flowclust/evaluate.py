"""Partition scoring against reference labels, and a benchmark runner.

Cluster ids carry no meaning, so scoring first reorders the confusion
matrix columns to put as much mass as possible on the diagonal (an
assignment problem; ties resolve to the lexicographically smallest
column order). The matrix is zero-padded square first, which lets a
cluster match a later class when clusters are scarce and parks surplus
clusters on padding rows. Total error is then everything off the
diagonal, and macro F1 averages per-class F1 over the real classes.
"""

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .baselines import KMeansConfig, kmeans, spectral_cluster
from .engine import FlowConfig, cluster
from .graph import evolve_distances, extract_graph_clusters
from .potentials import R_STAR_FACTOR, auto_tune_sigma

__all__ = [
    "BenchmarkReport",
    "MethodStats",
    "confusion_matrix",
    "diagonal_heavy_sort",
    "macro_f1",
    "run_benchmark",
    "total_error",
]


def _check_labels(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind not in "iu":
        raise ValueError(f"{name} must be integers")
    arr = arr.astype(np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if arr.min() < 0:
        raise ValueError(f"{name} must be nonnegative")
    return arr


def confusion_matrix(truth, predicted) -> np.ndarray:
    """Count matrix with one row per true class, one column per cluster."""
    t = _check_labels(truth, "truth")
    p = _check_labels(predicted, "predicted")
    if t.shape != p.shape:
        raise ValueError("truth and predicted must have the same length")
    rows = int(t.max()) + 1
    cols = int(p.max()) + 1
    flat = np.bincount(t * cols + p, minlength=rows * cols)
    return flat.reshape(rows, cols)


def _assignment_trace(matrix: np.ndarray) -> int:
    r, c = linear_sum_assignment(matrix, maximize=True)
    return int(matrix[r, c].sum())


def diagonal_heavy_sort(matrix):
    """Column order maximizing the diagonal of the padded square matrix.

    Returns (sorted_matrix, perm): sorted_matrix is the zero-padded
    n x n matrix (n = max(classes, clusters)) with columns permuted so
    its trace is the best achievable matched count; perm[i] is the
    original column id now at position i (ids >= the real column count
    are padding). Among all optimal orders the lexicographically
    smallest perm is returned, so the sort is deterministic.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"need a nonempty 2-D count matrix, got shape {m.shape}")
    if np.any(m < 0):
        raise ValueError("counts must be nonnegative")
    m = m.astype(np.int64)
    c, p = m.shape
    n = max(c, p)
    padded = np.zeros((n, n), dtype=np.int64)
    padded[:c, :p] = m
    target = _assignment_trace(padded)
    remaining = list(range(n))
    perm = []
    prefix = 0
    for pos in range(n):
        for cand in remaining:
            rest_cols = [col for col in remaining if col != cand]
            rest = prefix + int(padded[pos, cand])
            if rest_cols:
                rest += _assignment_trace(padded[pos + 1 :, rest_cols])
            if rest == target:
                perm.append(cand)
                remaining.remove(cand)
                prefix += int(padded[pos, cand])
                break
        else:
            raise AssertionError("no feasible column completes the optimum")
    perm = np.array(perm, dtype=np.int64)
    return padded[:, perm], perm


def total_error(matrix) -> int:
    """Points left off the diagonal after the diagonal-heavy sort."""
    sorted_m, _ = diagonal_heavy_sort(matrix)
    return int(sorted_m.sum() - np.trace(sorted_m))


def macro_f1(matrix) -> float:
    """Mean per-class F1 after matching clusters to classes.

    Pass the raw confusion matrix (rows = classes). A class whose
    matched cluster holds none of its points scores zero.
    """
    m = np.asarray(matrix)
    classes = m.shape[0]
    sorted_m, _ = diagonal_heavy_sort(m)
    scores = []
    for i in range(classes):
        tp = int(sorted_m[i, i])
        if tp == 0:
            scores.append(0.0)
            continue
        fp = int(sorted_m[:, i].sum()) - tp
        fn = int(sorted_m[i, :].sum()) - tp
        scores.append(2.0 * tp / (2.0 * tp + fp + fn))
    return float(np.mean(scores))


@dataclass
class MethodStats:
    """Score summary for one method across its benchmark runs."""

    name: str
    n_runs: int
    errors: list
    f1_scores: list
    min_error: int
    mean_error: float
    sd_error: float
    min_f1: float
    mean_f1: float
    sd_f1: float
    wall_time_seconds: float
    cluster_count: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_runs": int(self.n_runs),
            "errors": [int(e) for e in self.errors],
            "f1_scores": [float(f) for f in self.f1_scores],
            "min_error": int(self.min_error),
            "mean_error": float(self.mean_error),
            "sd_error": float(self.sd_error),
            "min_f1": float(self.min_f1),
            "mean_f1": float(self.mean_f1),
            "sd_f1": float(self.sd_f1),
            "wall_time_seconds": float(self.wall_time_seconds),
            "cluster_count": int(self.cluster_count),
        }


@dataclass
class BenchmarkReport:
    """All method summaries for one labeled dataset."""

    methods: list
    n_points: int
    n_classes: int
    runs: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "methods": [m.to_dict() for m in self.methods],
            "n_points": int(self.n_points),
            "n_classes": int(self.n_classes),
            "runs": int(self.runs),
            "seed": int(self.seed),
        }


def _summarize(name, labels_runs, counts, truth, elapsed) -> MethodStats:
    errors = []
    f1s = []
    for labels in labels_runs:
        cm = confusion_matrix(truth, labels)
        errors.append(total_error(cm))
        f1s.append(macro_f1(cm))
    best = int(np.argmin(errors))
    return MethodStats(
        name=name,
        n_runs=len(labels_runs),
        errors=errors,
        f1_scores=f1s,
        min_error=int(np.min(errors)),
        mean_error=float(np.mean(errors)),
        sd_error=float(np.std(errors)),
        min_f1=float(np.min(f1s)),
        mean_f1=float(np.mean(f1s)),
        sd_f1=float(np.std(f1s)),
        wall_time_seconds=elapsed,
        cluster_count=int(counts[best]),
    )


KNOWN_METHODS = ("flow", "graph", "kmeans", "spectral")


def run_benchmark(
    points,
    truth,
    methods=("flow", "kmeans", "spectral"),
    runs: int = 10,
    seed: int = 0,
    k: int | None = None,
    restarts: int = 100,
    flow_config: FlowConfig | None = None,
) -> BenchmarkReport:
    """Score each method on one labeled dataset.

    The flow and matrix pipelines are deterministic and run once; the
    seeded baselines run `runs` times with seeds seed, seed+1, ...
    Baselines receive k = the true class count unless k is given.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError(f"points must be a nonempty (N, M) array, got {pts.shape}")
    t = _check_labels(truth, "truth")
    if t.shape[0] != pts.shape[0]:
        raise ValueError("truth must label every point")
    for name in methods:
        if name not in KNOWN_METHODS:
            raise ValueError(f"unknown method {name!r}, expected one of {KNOWN_METHODS}")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    k_eff = int(k) if k is not None else int(t.max()) + 1

    out = []
    for name in methods:
        start = time.perf_counter()
        if name == "flow":
            res = cluster(pts, flow_config)
            labels_runs = [res.assignment.labels]
            counts = [res.assignment.n_clusters]
        elif name == "graph":
            # same interaction scale the flow would tune, so the two
            # deterministic pipelines stay comparable
            sigma = (
                flow_config.potential.sigma
                if flow_config is not None and flow_config.potential is not None
                else auto_tune_sigma(pts)
            )
            evo = evolve_distances(cdist(pts, pts), sigma=sigma)
            asg = extract_graph_clusters(evo.distances, threshold=R_STAR_FACTOR * sigma)
            labels_runs = [asg.labels]
            counts = [asg.n_clusters]
        elif name == "kmeans":
            labels_runs = []
            counts = []
            for i in range(runs):
                asg, _ = kmeans(
                    pts, KMeansConfig(k=k_eff, restarts=restarts, seed=seed + i)
                )
                labels_runs.append(asg.labels)
                counts.append(asg.n_clusters)
        else:
            labels_runs = []
            counts = []
            for i in range(runs):
                res = spectral_cluster(
                    pts, k=k_eff, restarts=restarts, seed=seed + i
                )
                labels_runs.append(res.assignment.labels)
                counts.append(res.assignment.n_clusters)
        elapsed = time.perf_counter() - start
        out.append(_summarize(name, labels_runs, counts, t, elapsed))
    return BenchmarkReport(
        methods=out,
        n_points=pts.shape[0],
        n_classes=int(t.max()) + 1,
        runs=runs,
        seed=seed,
    )
