"""Particle flow dynamics.

The state is a set of particles with positions x_k and masses m_k. Each
particle drifts with velocity

    dx_k/dt = sum_l m_l * phi(||x_k - x_l||) * (x_l - x_k)

so mutually reachable particles (pairwise distance below the kernel's
r_star) attract and collapse onto their common mass-weighted mean, while
groups separated beyond r_star never influence each other.

Determinism contract: every reduction over particle indices runs in
strictly ascending index order (a sequential running sum, not a blocked
or pairwise-tree sum). Beyond-support pairs contribute exact floating
point zeros, and adding zeros to a running sum is a no-op, so a group's
trajectory inside a larger system is bit-identical to the same group
evolved alone. The decoupling tests rely on this.
"""

from dataclasses import dataclass, field

import math

import numpy as np
from scipy.spatial.distance import cdist

from .potentials import PotentialSpec, interaction_weight, potential_value


@dataclass
class ParticleState:
    """Positions (N, M), positive masses (N,), and a step counter.

    Arrays are stored as float64. Masses default to 1 per particle; a
    coalesced particle carries the total mass of the points it absorbed.
    """

    positions: np.ndarray
    masses: np.ndarray = None
    step_index: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.ndim != 2 or self.positions.shape[1] < 1:
            raise ValueError(
                f"positions must be (N, M) with M >= 1, got shape {self.positions.shape}"
            )
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        n = self.positions.shape[0]
        if self.masses is None:
            self.masses = np.ones(n, dtype=np.float64)
        else:
            self.masses = np.asarray(self.masses, dtype=np.float64)
        if self.masses.shape != (n,):
            raise ValueError(
                f"masses must have shape ({n},), got {self.masses.shape}"
            )
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses <= 0.0):
            raise ValueError("masses must be positive and finite")
        self.step_index = int(self.step_index)
        if self.step_index < 0:
            raise ValueError("step_index must be nonnegative")

    @classmethod
    def from_points(cls, points, masses=None):
        points = np.array(points, dtype=np.float64, copy=True)
        return cls(positions=points, masses=masses)

    def copy(self):
        return ParticleState(
            positions=self.positions.copy(),
            masses=self.masses.copy(),
            step_index=self.step_index,
        )

    def __len__(self):
        return self.positions.shape[0]


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix. Each entry depends only on its
    own pair of rows, so submatrices match isolated computations bitwise."""
    return cdist(positions, positions)


def _seq_rowsum(a: np.ndarray) -> np.ndarray:
    # strictly left-to-right running sum per row; see module docstring
    return np.cumsum(a, axis=1)[:, -1]


def _weights(state, spec, pair_mask):
    w = interaction_weight(pairwise_distances(state.positions), spec)
    if pair_mask is not None:
        mask = np.asarray(pair_mask)
        if mask.shape != w.shape:
            raise ValueError(f"pair_mask must have shape {w.shape}")
        w = w * mask
    return w


# rows are mutually independent, so the force loop walks row blocks:
# per-row values are bit-identical to a whole-matrix pass, but the
# (block, N) temporaries stay cache-sized and the per-step cost scales
# like N^2 instead of degrading once (N, N) buffers outgrow the cache
_ROW_BLOCK = 128


def force_field(state: ParticleState, spec: PotentialSpec, pair_mask=None) -> np.ndarray:
    """Velocity of every particle: row k is sum_l m_l phi(d_kl) (x_l - x_k).

    The self term is zero. `pair_mask` optionally zeroes pruned pairs
    (boolean (N, N)). Row k is computed as

        sum_l m_l phi d_kl * x_l  -  (sum_l m_l phi d_kl) * x_k

    with both sums taken in ascending l order.
    """
    x = state.positions
    masses = state.masses
    n = x.shape[0]
    if pair_mask is not None:
        pair_mask = np.asarray(pair_mask)
        if pair_mask.shape != (n, n):
            raise ValueError(f"pair_mask must have shape {(n, n)}")
    out = np.empty_like(x)
    for lo in range(0, n, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, n)
        w = interaction_weight(cdist(x[lo:hi], x), spec)
        if pair_mask is not None:
            w = w * pair_mask[lo:hi]
        wm = w * masses[None, :]
        s0 = _seq_rowsum(wm)
        for j in range(x.shape[1]):
            out[lo:hi, j] = _seq_rowsum(wm * x[:, j][None, :]) - s0 * x[lo:hi, j]
    return out


def euler_step(
    state: ParticleState, spec: PotentialSpec, dt: float, pair_mask=None
) -> ParticleState:
    """One explicit Euler step x <- x + dt * force, all rows in lockstep.

    Masses are unchanged; the step counter advances by one. The caller
    owns the choice of dt; values above stability_max_dt() overshoot.
    """
    dt = float(dt)
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be a positive real, got {dt!r}")
    f = force_field(state, spec, pair_mask=pair_mask)
    return ParticleState(
        positions=state.positions + dt * f,
        masses=state.masses.copy(),
        step_index=state.step_index + 1,
    )


def stability_max_dt(state: ParticleState, spec: PotentialSpec) -> float:
    """Largest dt keeping each update a convex combination of positions:

        1 / max_k sum_{l != k} m_l phi(||x_k - x_l||)

    +inf when no pair interacts. Steps at or below this bound cannot
    overshoot; the engine warns when a user-supplied dt exceeds it.
    """
    wm = _weights(state, spec, None) * state.masses[None, :]
    np.fill_diagonal(wm, 0.0)
    mx = float(wm.sum(axis=1).max()) if len(state) else 0.0
    if mx <= 0.0:
        return math.inf
    return 1.0 / mx


def total_potential(state: ParticleState, spec: PotentialSpec) -> float:
    """Interaction energy sum_{i != j} m_i m_j U(d_ij), always <= 0."""
    n = len(state)
    if n < 2:
        return 0.0
    d = pairwise_distances(state.positions)
    iu, ju = np.triu_indices(n, k=1)
    u = potential_value(d[iu, ju], spec)
    return float(2.0 * np.sum(state.masses[iu] * state.masses[ju] * u))


def lyapunov_value(state: ParticleState, members) -> float:
    """Spread energy of a particle group around its highest-indexed member:

        V = 1/2 sum_{i in members} ||x_i - x_ref||^2,  ref = max(members)

    Strictly decreases along the flow for a group whose pairwise
    distances all stay below r_star, with dt below the stability bound.
    """
    members = np.asarray(members, dtype=np.int64)
    if members.ndim != 1 or members.size == 0:
        raise ValueError("members must be a nonempty 1-D index array")
    n = len(state)
    if members.min() < 0 or members.max() >= n:
        raise ValueError(f"member indices must lie in [0, {n})")
    if np.unique(members).size != members.size:
        raise ValueError("member indices must be unique")
    ref = int(members.max())
    diffs = state.positions[members] - state.positions[ref]
    return float(0.5 * np.sum(diffs * diffs))


def build_laplacian(state: ParticleState, spec: PotentialSpec) -> np.ndarray:
    """Weighted graph Laplacian of the interaction pattern at this state.

    Off-diagonal (i, j) is -phi(d_ij) * sqrt(m_i m_j); the diagonal
    compensates so every row sums to zero. Symmetric positive
    semidefinite; the zero eigenvalue multiplicity equals the number of
    connected components of the pairs-within-r_star graph.

    Used columnwise against (N, M) position blocks; never materialize a
    Kronecker expansion of it.
    """
    w = interaction_weight(pairwise_distances(state.positions), spec)
    root_m = np.sqrt(state.masses)
    # form the symmetric mass factor first: a*b == b*a exactly, while
    # (w*a)*b and (w*b)*a can differ in the last ulp
    mass_prod = root_m[:, None] * root_m[None, :]
    off = -(w * mass_prod)
    np.fill_diagonal(off, 0.0)
    lap = off
    lap[np.diag_indices(len(state))] = -_seq_rowsum(off)
    return lap
