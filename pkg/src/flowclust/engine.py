"""End-to-end flow clustering driver.

Pipeline: optional bandwidth auto-tune, duplicate coalescing, explicit
Euler evolution under the kernel flow until the pairwise configuration
stops changing, then connected-component extraction at the kernel cutoff
and absorption of undersized clusters.

Everything is deterministic: rerunning on the same input yields
bit-identical results.
"""

from dataclasses import dataclass, field

import math

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .dynamics import (
    ParticleState,
    euler_step,
    pairwise_distances,
    stability_max_dt,
)
from .potentials import PotentialSpec, auto_tune_sigma

# cadence (in steps) for refreshing the auto step size and the prune mask
REFRESH_EVERY = 50


@dataclass
class FlowConfig:
    """Knobs for the clustering driver. Defaults suit most inputs.

    potential: kernel to use; None tunes a gaussian bandwidth from the data.
    dt: Euler step; None picks 0.9x the stability bound (capped at 1.0),
        refreshed every 50 steps.
    max_iters / stop_tol: the run stops when the mean per-pair change of
        the difference vectors drops below stop_tol, or after max_iters.
    raw_stop_rule: use the absolute-scale stop test S < N * r_star
        instead of the normalized default.
    min_cluster_fraction: clusters smaller than max(2, ceil(frac * N))
        are absorbed into their nearest surviving cluster.
    coalesce_eps: merge radius for near-duplicate input points; None
        means the kernel bandwidth sigma. Zero merges exact duplicates only.
    prune_threshold: optional distance beyond which pairs are dropped
        from the force computation (mask refreshed every 50 steps);
        None disables pruning.
    """

    potential: PotentialSpec | None = None
    dt: float | None = None
    max_iters: int = 10_000
    stop_tol: float = 1e-5
    raw_stop_rule: bool = False
    min_cluster_fraction: float = 0.01
    coalesce_eps: float | None = None
    prune_threshold: float | None = None

    def validate(self):
        if self.potential is not None and not isinstance(self.potential, PotentialSpec):
            raise ValueError("potential must be a PotentialSpec or None")
        if self.dt is not None:
            if not (math.isfinite(self.dt) and self.dt > 0.0):
                raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not (math.isfinite(self.stop_tol) and self.stop_tol > 0.0):
            raise ValueError(f"stop_tol must be positive, got {self.stop_tol!r}")
        if not (0.0 <= self.min_cluster_fraction < 1.0):
            raise ValueError(
                f"min_cluster_fraction must be in [0, 1), got {self.min_cluster_fraction!r}"
            )
        if self.coalesce_eps is not None:
            if not (math.isfinite(self.coalesce_eps) and self.coalesce_eps >= 0.0):
                raise ValueError(f"coalesce_eps must be >= 0, got {self.coalesce_eps!r}")
        if self.prune_threshold is not None:
            if not (math.isfinite(self.prune_threshold) and self.prune_threshold > 0.0):
                raise ValueError(
                    f"prune_threshold must be positive, got {self.prune_threshold!r}"
                )


@dataclass
class ClusterAssignment:
    """A hard partition: per-point labels, cluster centers, cluster sizes.

    Labels are 0..P-1 with every cluster nonempty; sizes count original
    data points. centers is (P, M); distance-only pipelines use M = 0.
    """

    labels: np.ndarray
    centers: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.sizes = np.asarray(self.sizes, dtype=np.int64)
        if self.labels.ndim != 1 or self.labels.size == 0:
            raise ValueError("labels must be a nonempty 1-D array")
        if self.labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        p = int(self.labels.max()) + 1
        counts = np.bincount(self.labels, minlength=p)
        if np.any(counts == 0):
            raise ValueError("every label in 0..P-1 must appear at least once")
        if self.centers.ndim != 2 or self.centers.shape[0] != p:
            raise ValueError(f"centers must be (P, M) with P = {p}")
        if self.sizes.shape != (p,) or np.any(self.sizes < 1):
            raise ValueError(f"sizes must be (P,) positive counts with P = {p}")

    @property
    def n_clusters(self) -> int:
        return int(self.sizes.shape[0])


@dataclass
class FlowResult:
    """Driver output: the partition plus run diagnostics."""

    assignment: ClusterAssignment
    iterations_used: int
    dispersion_trace: np.ndarray
    warnings: list
    tuned_sigma: float
    initial_spread: float
    dt: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "labels": self.assignment.labels.tolist(),
            "centers": self.assignment.centers.tolist(),
            "sizes": self.assignment.sizes.tolist(),
            "iterations_used": int(self.iterations_used),
            "dispersion_trace": [float(s) for s in self.dispersion_trace],
            "warnings": list(self.warnings),
            "tuned_sigma": float(self.tuned_sigma),
            "initial_spread": float(self.initial_spread),
            "dt": float(self.dt),
            "converged": bool(self.converged),
        }


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def canonicalize_labels(labels):
    """Relabel so cluster ids appear in first-appearance order.

    Returns (new_labels, order) where order[new_id] = old_id.
    """
    labels = np.asarray(labels, dtype=np.int64)
    order = []
    mapping = {}
    for lab in labels.tolist():
        if lab not in mapping:
            mapping[lab] = len(order)
            order.append(lab)
    new_labels = np.array([mapping[lab] for lab in labels.tolist()], dtype=np.int64)
    return new_labels, np.array(order, dtype=np.int64)


def dispersion(prev, curr) -> float:
    """Configuration change between consecutive states:

        S = sum_{i<j} || e_ij(t+1) - e_ij(t) ||,   e_ij = x_i - x_j

    which equals the sum of pairwise distances of the per-particle
    displacement vectors. Zero for rigid translations.
    """
    a = getattr(prev, "positions", prev)
    b = getattr(curr, "positions", curr)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"states must share an (N, M) shape, got {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        return 0.0
    return float(pdist(b - a).sum())


def coalesce_particles(state: ParticleState, eps: float):
    """Greedy duplicate merge: scanning points in index order, each joins
    the first representative whose current mass-weighted mean lies within
    eps (<=), else starts a new one. Masses add; positions become the
    mass-weighted member means.

    Returns (coalesced_state, rep_map) with rep_map[i] = index of point
    i's representative in the new state. Total mass is preserved and
    labels computed on the coalesced particles transfer through rep_map.
    """
    eps = float(eps)
    if not (math.isfinite(eps) and eps >= 0.0):
        raise ValueError(f"eps must be a nonnegative real, got {eps!r}")
    x = state.positions
    m = state.masses
    n, dim = x.shape
    rep_sum = np.empty((n, dim))
    rep_pos = np.empty((n, dim))
    rep_mass = np.empty(n)
    rep_map = np.empty(n, dtype=np.int64)
    count = 0
    for i in range(n):
        if count:
            diff = rep_pos[:count] - x[i]
            dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            hits = np.nonzero(dist <= eps)[0]
        else:
            hits = ()
        if len(hits):
            r = int(hits[0])
            rep_sum[r] += m[i] * x[i]
            rep_mass[r] += m[i]
            rep_pos[r] = rep_sum[r] / rep_mass[r]
            rep_map[i] = r
        else:
            rep_sum[count] = m[i] * x[i]
            rep_mass[count] = m[i]
            rep_pos[count] = rep_sum[count] / rep_mass[count]
            rep_map[i] = count
            count += 1
    merged = ParticleState(
        positions=rep_pos[:count].copy(),
        masses=rep_mass[:count].copy(),
        step_index=state.step_index,
    )
    return merged, rep_map


def extract_clusters(state: ParticleState, r_star: float) -> ClusterAssignment:
    """Connected components of the pairs-closer-than-r_star graph
    (strict <). Centers are mass-weighted component means; sizes are the
    rounded component mass totals (original point counts)."""
    r_star = float(r_star)
    if not (math.isfinite(r_star) and r_star > 0.0):
        raise ValueError(f"r_star must be positive, got {r_star!r}")
    n = len(state)
    uf = UnionFind(n)
    if n > 1:
        d = pairwise_distances(state.positions)
        iu, ju = np.triu_indices(n, k=1)
        close = d[iu, ju] < r_star
        for a, b in zip(iu[close].tolist(), ju[close].tolist()):
            uf.union(a, b)
    roots = np.array([uf.find(i) for i in range(n)], dtype=np.int64)
    labels, _ = canonicalize_labels(roots)
    return _assignment_from_particles(labels, state)


def _assignment_from_particles(labels, state) -> ClusterAssignment:
    p = int(labels.max()) + 1
    dim = state.positions.shape[1]
    centers = np.empty((p, dim))
    sizes = np.empty(p, dtype=np.int64)
    for c in range(p):
        members = labels == c
        mass = state.masses[members]
        centers[c] = (mass[:, None] * state.positions[members]).sum(axis=0) / mass.sum()
        sizes[c] = int(np.rint(mass.sum()))
    return ClusterAssignment(labels=labels, centers=centers, sizes=sizes)


def merge_small_clusters(
    assignment: ClusterAssignment, state: ParticleState, min_size: int
) -> ClusterAssignment:
    """Absorb clusters below min_size, smallest first (ties: lower id),
    each into the surviving cluster with the smallest mass-weighted
    average distance between their members. Stops when all survivors
    reach min_size or only one cluster remains."""
    min_size = int(min_size)
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    labels = assignment.labels.copy()
    x = state.positions
    m = state.masses
    if labels.shape[0] != len(state):
        raise ValueError("assignment and state disagree on particle count")

    while True:
        ids = np.unique(labels)
        if ids.size <= 1:
            break
        mass_by = {int(c): float(m[labels == c].sum()) for c in ids}
        small = sorted(
            (c for c in mass_by if mass_by[c] < min_size),
            key=lambda c: (mass_by[c], c),
        )
        if not small:
            break
        victim = small[0]
        vm = labels == victim
        best = None
        for c in sorted(mass_by):
            if c == victim:
                continue
            cm = labels == c
            d = cdist(x[vm], x[cm])
            w = m[vm][:, None] * m[cm][None, :]
            avg = float((d * w).sum() / w.sum())
            if best is None or avg < best[0]:
                best = (avg, c)
        labels[vm] = best[1]

    labels, _ = canonicalize_labels(labels)
    return _assignment_from_particles(labels, state)


def _single_point_result(data, sigma_val) -> "FlowResult":
    assignment = ClusterAssignment(
        labels=np.zeros(1, dtype=np.int64),
        centers=data.copy(),
        sizes=np.ones(1, dtype=np.int64),
    )
    return FlowResult(
        assignment=assignment,
        iterations_used=0,
        dispersion_trace=np.zeros(0),
        warnings=["single input point; dynamics skipped"],
        tuned_sigma=sigma_val,
        initial_spread=0.0,
        dt=0.0,
        converged=True,
    )


def cluster(data, config: FlowConfig | None = None) -> FlowResult:
    """Cluster rows of an (N, M) array by running the kernel flow.

    See FlowConfig for the knobs. The returned FlowResult carries the
    assignment over the original rows (ids in first-appearance order),
    one dispersion value per Euler step, and any warnings raised along
    the way. Deterministic: identical inputs give bit-identical results.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise ValueError(f"data must be a nonempty (N, M) array, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("data must be finite")
    cfg = config or FlowConfig()
    cfg.validate()
    n0 = data.shape[0]

    if n0 == 1:
        return _single_point_result(
            data, cfg.potential.sigma if cfg.potential else 0.0
        )

    spec = cfg.potential or PotentialSpec(sigma=auto_tune_sigma(data))
    warnings: list = []

    eps = spec.sigma if cfg.coalesce_eps is None else cfg.coalesce_eps
    state, rep_map = coalesce_particles(ParticleState.from_points(data), eps)

    initial_spread = (
        float(pdist(state.positions).max()) if len(state) > 1 else 0.0
    )

    auto_dt = cfg.dt is None

    def _auto_dt_value(st):
        bound = stability_max_dt(st, spec)
        return 1.0 if math.isinf(bound) else min(0.9 * bound, 1.0)

    if auto_dt:
        dt = _auto_dt_value(state) if len(state) > 1 else 1.0
    else:
        dt = float(cfg.dt)
        if len(state) > 1 and dt > stability_max_dt(state, spec):
            warnings.append(
                f"dt={dt:g} exceeds the stability bound at step 0; "
                "the flow may overshoot"
            )
    dt_initial = dt

    pruning = cfg.prune_threshold is not None
    if pruning and cfg.prune_threshold < spec.r_star:
        warnings.append(
            f"prune_threshold={cfg.prune_threshold:g} is below the kernel cutoff "
            f"r_star={spec.r_star:g}; interacting pairs will be dropped"
        )

    def _prune_mask(st):
        if not pruning:
            return None
        return pairwise_distances(st.positions) <= cfg.prune_threshold

    mask = _prune_mask(state)
    trace = []
    converged = len(state) < 2
    warned_dt = bool(warnings) and not auto_dt

    for it in range(cfg.max_iters):
        if len(state) < 2:
            converged = True
            break
        if it > 0 and it % REFRESH_EVERY == 0:
            if auto_dt:
                dt = _auto_dt_value(state)
            elif not warned_dt and dt > stability_max_dt(state, spec):
                warnings.append(
                    f"dt={dt:g} exceeds the stability bound at step {it}; "
                    "the flow may overshoot"
                )
                warned_dt = True
            mask = _prune_mask(state)
        prev = state.positions
        state = euler_step(state, spec, dt, pair_mask=mask)
        s = dispersion(prev, state.positions)
        trace.append(s)
        n_p = len(state)
        if cfg.raw_stop_rule:
            stop = s < n_p * spec.r_star
        else:
            stop = s / (n_p * (n_p - 1) / 2.0) < cfg.stop_tol
        if stop:
            converged = True
            break
    if not converged:
        warnings.append(
            f"no convergence within {cfg.max_iters} steps; "
            "extracting clusters from the current state"
        )

    particle_assignment = extract_clusters(state, spec.r_star)
    min_size = max(2, math.ceil(cfg.min_cluster_fraction * n0))
    particle_assignment = merge_small_clusters(particle_assignment, state, min_size)

    point_labels = particle_assignment.labels[rep_map]
    point_labels, order = canonicalize_labels(point_labels)
    centers = particle_assignment.centers[order]
    sizes = np.bincount(point_labels)
    assignment = ClusterAssignment(labels=point_labels, centers=centers, sizes=sizes)

    return FlowResult(
        assignment=assignment,
        iterations_used=len(trace),
        dispersion_trace=np.asarray(trace, dtype=np.float64),
        warnings=warnings,
        tuned_sigma=spec.sigma,
        initial_spread=initial_spread,
        dt=dt_initial,
        converged=converged,
    )
