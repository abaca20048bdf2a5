"""Interaction kernels and bandwidth selection.

A kernel assigns every pairwise distance r an attraction weight
phi(r) in [0, 1] that vanishes exactly at and beyond a support radius
r_star. Two kernels are provided:

    gaussian   phi(r) = exp(-r^2 / sigma^2)        for r < r_star, else 0
    quartic    phi(r) = (1 - r^2 / r_star^2)^2     for r < r_star, else 0

The matching pair potential is U(r) = -phi(r): unit depth at r = 0,
strictly increasing toward 0 on the support, hard zero outside. Particles
separated by at least r_star never interact, which is what makes
well-separated groups evolve independently.
"""

from dataclasses import dataclass

import math

import numpy as np
from scipy.spatial.distance import pdist

GAUSSIAN = "gaussian"
QUARTIC = "quartic"
_KINDS = (GAUSSIAN, QUARTIC)

# support radius defaults to this multiple of sigma
R_STAR_FACTOR = 3.0


@dataclass
class PotentialSpec:
    """Kernel choice plus its two length scales.

    sigma sets the interaction bandwidth, r_star the hard support cutoff
    (default 3 * sigma). The quartic kernel only uses r_star but keeps
    sigma for bandwidth bookkeeping (auto-tuning, coalescing radii).
    """

    sigma: float
    r_star: float | None = None
    kind: str = GAUSSIAN

    def __post_init__(self):
        self.sigma = float(self.sigma)
        if not math.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ValueError(f"sigma must be a positive real, got {self.sigma!r}")
        if self.r_star is None:
            self.r_star = R_STAR_FACTOR * self.sigma
        self.r_star = float(self.r_star)
        if not self.r_star > 0.0:
            raise ValueError(f"r_star must be positive, got {self.r_star!r}")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {_KINDS}")


def _as_array(r):
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("distances must be nonnegative")
    return arr


def interaction_weight(r, spec: PotentialSpec):
    """Attraction weight phi(r); exact 0.0 for r >= r_star.

    Accepts scalars or arrays of nonnegative distances; returns the same
    shape. phi(0) = 1 for both kernels and phi is strictly decreasing on
    the support.
    """
    arr = _as_array(r)
    if spec.kind == GAUSSIAN:
        w = np.exp(-(arr * arr) / (spec.sigma * spec.sigma))
    else:
        t = arr / spec.r_star
        w = np.square(1.0 - t * t)
    w = np.where(arr < spec.r_star, w, 0.0)
    if np.isscalar(r) or np.ndim(r) == 0:
        return float(w)
    return w


def potential_value(r, spec: PotentialSpec):
    """Pair potential U(r) = -phi(r): in [-1, 0], zero for r >= r_star."""
    w = interaction_weight(r, spec)
    if isinstance(w, float):
        return -w
    return -w


def _sigma_from_distances(dists: np.ndarray, dim: int) -> float:
    """Shared tuning rule: sample s.d. of the distances divided by dim.

    Falls back to mean/dim when the s.d. is zero or undefined (fewer than
    two distances); raises when even the mean is zero (coincident input).
    """
    dists = np.asarray(dists, dtype=np.float64)
    if dists.size == 0:
        raise ValueError("need at least one pairwise distance to tune sigma")
    if dists.size > 1:
        sd = float(dists.std(ddof=1))
        if sd > 0.0:
            return sd / dim
    mean = float(dists.mean())
    if mean > 0.0:
        return mean / dim
    raise ValueError(
        "cannot tune sigma: all pairwise distances are zero "
        "(coincident points); pass an explicit PotentialSpec"
    )


def auto_tune_sigma(data) -> float:
    """Bandwidth heuristic: s.d. of all pairwise distances over the dimension.

    Accepts an (N, M) array or anything with a .positions attribute.
    Requires N >= 2. The sample standard deviation uses denominator N-1;
    when it degenerates to zero the mean pairwise distance is used instead.
    """
    positions = getattr(data, "positions", data)
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2:
        raise ValueError(f"expected an (N, M) array, got shape {positions.shape}")
    n, dim = positions.shape
    if n < 2:
        raise ValueError("sigma tuning needs at least two points")
    return _sigma_from_distances(pdist(positions), dim)
