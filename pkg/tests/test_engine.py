"""Engine tests: coalescing, extraction, merging, and the full driver."""

import json
import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from flowclust.dynamics import ParticleState
from flowclust.engine import (
    ClusterAssignment,
    FlowConfig,
    FlowResult,
    cluster,
    coalesce_particles,
    dispersion,
    extract_clusters,
    merge_small_clusters,
)
from flowclust.potentials import PotentialSpec
from flowclust.prng import SplitMix64


def two_blob_points(seed=0, n_per=40, gap=50.0, spread=0.5):
    rng = SplitMix64(seed)
    a = spread * rng.normals(2 * n_per).reshape(n_per, 2)
    b = spread * rng.normals(2 * n_per).reshape(n_per, 2)
    b[:, 0] += gap
    return np.vstack([a, b])


# ---------------------------------------------------------------- dispersion


def test_dispersion_hand_value():
    # single pair, (0, 1) -> (0.2, 0.8): the pair difference vector moves
    # from -1 to -0.6, so S = 0.4
    prev = np.array([[0.0], [1.0]])
    curr = np.array([[0.2], [0.8]])
    assert abs(dispersion(prev, curr) - 0.4) < 1e-15


def test_dispersion_translation_invariant():
    # dyadic-grid coordinates so adding the shift is exact in floating
    # point and every displacement vector is bit-identical
    rng = SplitMix64(1)
    prev = np.round(8.0 * rng.normals(12)).reshape(6, 2) / 8.0
    curr = prev + np.array([3.0, -2.0])
    assert dispersion(prev, curr) == 0.0


def test_dispersion_accepts_states():
    prev = ParticleState.from_points(np.array([[0.0], [1.0]]))
    curr = ParticleState.from_points(np.array([[0.2], [0.8]]))
    assert abs(dispersion(prev, curr) - 0.4) < 1e-15
    with pytest.raises(ValueError):
        dispersion(np.zeros((2, 1)), np.zeros((3, 1)))


# ----------------------------------------------------------------- coalesce


def test_coalesce_eps_zero_is_identity_on_distinct_points():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    st, rep_map = coalesce_particles(ParticleState.from_points(pts), 0.0)
    assert np.array_equal(st.positions, pts)
    assert np.array_equal(st.masses, np.ones(3))
    assert np.array_equal(rep_map, np.arange(3))


def test_coalesce_merges_exact_duplicates_at_eps_zero():
    pts = np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]])
    st, rep_map = coalesce_particles(ParticleState.from_points(pts), 0.0)
    assert len(st) == 2
    assert np.array_equal(st.masses, np.array([2.0, 1.0]))
    assert np.array_equal(st.positions[0], np.array([1.0, 1.0]))
    assert np.array_equal(rep_map, np.array([0, 0, 1]))


def test_coalesce_jittered_duplicates_oracle():
    # 20 distinct sites, 5 copies each jittered by 1e-6; eps = 1e-3 must
    # recover exactly the number of distinct sites (duplicate removal)
    rng = SplitMix64(9)
    sites = 10.0 * rng.normals(40).reshape(20, 2)
    pts = np.repeat(sites, 5, axis=0)
    pts += 1e-6 * rng.normals(pts.size).reshape(pts.shape)
    st, rep_map = coalesce_particles(ParticleState.from_points(pts), 1e-3)
    assert len(st) == 20
    assert st.masses.sum() == 100.0
    assert np.all(st.masses == 5.0)
    # each group's representative is the mass-weighted member mean
    for r in range(20):
        members = pts[rep_map == r]
        assert np.allclose(st.positions[r], members.mean(axis=0), atol=1e-12)


def test_coalesce_mass_conservation_and_validation():
    rng = SplitMix64(3)
    pts = rng.normals(30).reshape(15, 2)
    st, _ = coalesce_particles(ParticleState.from_points(pts), 0.7)
    assert abs(st.masses.sum() - 15.0) < 1e-12
    with pytest.raises(ValueError):
        coalesce_particles(ParticleState.from_points(pts), -0.1)


# ------------------------------------------------------------------ extract


def test_extract_transitive_chain():
    # 0-1-2 spaced 1 apart with r_star 1.5: a chain is one component even
    # though the endpoints are 2 apart
    st = ParticleState.from_points(np.array([[0.0], [1.0], [2.0]]))
    asg = extract_clusters(st, r_star=1.5)
    assert asg.n_clusters == 1
    assert np.array_equal(asg.labels, np.zeros(3, dtype=np.int64))


def test_extract_strict_threshold():
    # distance exactly r_star does not connect
    st = ParticleState.from_points(np.array([[0.0], [1.5]]))
    asg = extract_clusters(st, r_star=1.5)
    assert asg.n_clusters == 2


def test_extract_two_groups_first_appearance_labels():
    st = ParticleState.from_points(
        np.array([[0.0], [10.0], [0.1], [10.1]])
    )
    asg = extract_clusters(st, r_star=1.0)
    assert np.array_equal(asg.labels, np.array([0, 1, 0, 1]))
    assert np.array_equal(asg.sizes, np.array([2, 2]))
    assert np.allclose(asg.centers, np.array([[0.05], [10.05]]))


def test_extract_mass_weighted_centers_and_sizes():
    st = ParticleState(
        positions=np.array([[0.0], [1.0]]),
        masses=np.array([3.0, 1.0]),
    )
    asg = extract_clusters(st, r_star=2.0)
    assert asg.n_clusters == 1
    assert np.array_equal(asg.sizes, np.array([4]))
    assert abs(asg.centers[0, 0] - 0.25) < 1e-15


# -------------------------------------------------------------------- merge


def _assignment_for(state, r_star):
    return extract_clusters(state, r_star)


def test_merge_small_into_nearest_by_average_distance():
    # clusters: A around 0 (3 pts), B around 10 (3 pts), tiny C at 2.5
    # (1 pt); min_size 2 absorbs C into A (closer on average)
    pts = np.array([[0.0], [0.2], [0.4], [10.0], [10.2], [10.4], [2.5]])
    st = ParticleState.from_points(pts)
    asg = _assignment_for(st, r_star=1.0)
    assert asg.n_clusters == 3
    merged = merge_small_clusters(asg, st, min_size=2)
    assert merged.n_clusters == 2
    assert merged.labels[6] == merged.labels[0]
    assert np.array_equal(np.sort(merged.sizes), np.array([3, 4]))


def test_merge_smallest_first_tie_by_lower_id():
    # two singletons, one on each side; the lower-id singleton merges
    # first; both end up in their nearest big cluster
    pts = np.array([[0.0], [0.1], [0.2], [9.0], [9.1], [9.2], [1.5], [7.5]])
    st = ParticleState.from_points(pts)
    asg = _assignment_for(st, r_star=0.5)
    assert asg.n_clusters == 4
    merged = merge_small_clusters(asg, st, min_size=3)
    assert merged.n_clusters == 2
    assert merged.labels[6] == merged.labels[0]
    assert merged.labels[7] == merged.labels[3]


def test_merge_until_one_remains():
    pts = np.array([[0.0], [5.0], [10.0]])
    st = ParticleState.from_points(pts)
    asg = _assignment_for(st, r_star=1.0)
    merged = merge_small_clusters(asg, st, min_size=10)
    assert merged.n_clusters == 1
    assert np.array_equal(merged.sizes, np.array([3]))


def test_merge_noop_when_all_large_enough():
    pts = np.array([[0.0], [0.1], [10.0], [10.1]])
    st = ParticleState.from_points(pts)
    asg = _assignment_for(st, r_star=1.0)
    merged = merge_small_clusters(asg, st, min_size=2)
    assert np.array_equal(merged.labels, asg.labels)
    assert np.array_equal(merged.sizes, asg.sizes)


# ------------------------------------------------------------------- driver


def test_cluster_single_point():
    res = cluster(np.array([[3.0, 4.0]]))
    assert isinstance(res, FlowResult)
    assert res.assignment.n_clusters == 1
    assert np.array_equal(res.assignment.labels, np.array([0]))
    assert np.array_equal(res.assignment.centers, np.array([[3.0, 4.0]]))
    assert res.iterations_used == 0
    assert res.converged
    assert len(res.dispersion_trace) == 0


def test_cluster_rejects_bad_input():
    with pytest.raises(ValueError):
        cluster(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        cluster(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        cluster(np.array([[np.inf, 0.0]]))


def test_cluster_coincident_needs_explicit_sigma():
    pts = np.ones((4, 2))
    with pytest.raises(ValueError):
        cluster(pts)
    res = cluster(pts, FlowConfig(potential=PotentialSpec(sigma=1.0)))
    assert res.assignment.n_clusters == 1
    assert np.array_equal(res.assignment.sizes, np.array([4]))


def test_cluster_two_blobs_exact_recovery():
    pts = two_blob_points()
    res = cluster(pts)
    asg = res.assignment
    assert asg.n_clusters == 2
    assert np.array_equal(asg.labels[:40], np.zeros(40, dtype=np.int64))
    assert np.array_equal(asg.labels[40:], np.ones(40, dtype=np.int64))
    assert np.array_equal(asg.sizes, np.array([40, 40]))
    # centers match the per-blob data means: the flow conserves each
    # group's mass-weighted centroid and the groups are independent
    for g, rows in ((0, slice(0, 40)), (1, slice(40, 80))):
        mean = pts[rows].mean(axis=0)
        rel = np.linalg.norm(asg.centers[g] - mean) / np.linalg.norm(mean + 1e-30)
        assert rel <= 1e-6 or np.linalg.norm(asg.centers[g] - mean) <= 1e-8
    assert res.converged
    assert res.iterations_used == len(res.dispersion_trace)
    assert res.tuned_sigma > 0.0


def test_cluster_dispersion_trace_decreases():
    # disable coalescing so the run starts away from a fixed point and
    # the blobs actually contract over multiple steps
    pts = two_blob_points(seed=21)
    res = cluster(pts, FlowConfig(coalesce_eps=0.0))
    assert res.iterations_used > 1
    assert res.dispersion_trace[-1] < res.dispersion_trace[0]


def test_cluster_is_deterministic():
    pts = two_blob_points(seed=5)
    a = cluster(pts)
    b = cluster(pts)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_cluster_labels_canonical_by_first_appearance():
    # put a point of the "second" blob first: it must get label 0
    pts = two_blob_points(seed=2)
    pts = np.vstack([pts[40], pts])
    res = cluster(pts)
    assert res.assignment.labels[0] == 0
    assert res.assignment.labels[1] == 1


def test_cluster_nonconvergence_warning():
    # keep all particles alive (no coalescing) so two steps cannot reach
    # the stop tolerance
    pts = two_blob_points(seed=3)
    res = cluster(pts, FlowConfig(max_iters=2, coalesce_eps=0.0))
    assert not res.converged
    assert res.iterations_used == 2
    assert any("convergence" in w for w in res.warnings)


def test_cluster_raw_stop_rule_stops_earlier():
    pts = two_blob_points(seed=4)
    default = cluster(pts)
    raw = cluster(pts, FlowConfig(raw_stop_rule=True))
    assert raw.iterations_used <= default.iterations_used
    assert raw.converged


def test_cluster_dt_warning_when_exceeding_bound():
    # uncoalesced blob particles interact strongly, so the stability
    # bound is finite and far below 50
    pts = two_blob_points(seed=6)
    res = cluster(pts, FlowConfig(dt=50.0, coalesce_eps=0.0, max_iters=40))
    assert any("stability" in w for w in res.warnings)


def test_cluster_explicit_dt_and_potential():
    pts = two_blob_points(seed=7)
    spec = PotentialSpec(sigma=1.0)
    res = cluster(pts, FlowConfig(potential=spec, dt=0.05))
    assert res.tuned_sigma == 1.0
    assert res.dt == 0.05
    assert res.assignment.n_clusters == 2


def test_cluster_prune_above_cutoff_is_bit_identical():
    pts = two_blob_points(seed=8)
    plain = cluster(pts)
    pruned = cluster(pts, FlowConfig(prune_threshold=1e9))
    assert np.array_equal(plain.assignment.labels, pruned.assignment.labels)
    assert np.array_equal(
        np.asarray(plain.dispersion_trace), np.asarray(pruned.dispersion_trace)
    )
    assert np.array_equal(plain.assignment.centers, pruned.assignment.centers)


def test_cluster_prune_below_cutoff_warns():
    pts = two_blob_points(seed=8)
    res = cluster(pts, FlowConfig(prune_threshold=0.05, max_iters=50))
    assert any("prune" in w.lower() for w in res.warnings)


def test_cluster_min_fraction_absorbs_outliers():
    rng = SplitMix64(11)
    blob = 0.3 * rng.normals(60).reshape(30, 2)
    outliers = np.array([[8.0, 8.0], [8.2, 8.0]])
    pts = np.vstack([blob, outliers])
    # fraction 0.2 of 32 points -> min_size 7: the far pair is absorbed
    res = cluster(pts, FlowConfig(min_cluster_fraction=0.2))
    assert res.assignment.n_clusters == 1
    assert np.array_equal(res.assignment.sizes, np.array([32]))


def test_cluster_coalesce_off_matches_default_partition():
    pts = two_blob_points(seed=12)
    on = cluster(pts)
    off = cluster(pts, FlowConfig(coalesce_eps=0.0))
    assert np.array_equal(on.assignment.labels, off.assignment.labels)
    assert np.allclose(on.assignment.centers, off.assignment.centers, atol=1e-5)


def test_cluster_initial_spread_without_coalescing():
    pts = two_blob_points(seed=13)
    res = cluster(pts, FlowConfig(coalesce_eps=0.0))
    assert abs(res.initial_spread - float(pdist(pts).max())) < 1e-12


def test_config_validation():
    for bad in (
        FlowConfig(max_iters=0),
        FlowConfig(stop_tol=0.0),
        FlowConfig(stop_tol=-1.0),
        FlowConfig(min_cluster_fraction=-0.1),
        FlowConfig(min_cluster_fraction=1.0),
        FlowConfig(coalesce_eps=-1.0),
        FlowConfig(prune_threshold=0.0),
        FlowConfig(dt=0.0),
    ):
        with pytest.raises(ValueError):
            cluster(np.array([[0.0], [1.0]]), bad)


def test_assignment_validation():
    with pytest.raises(ValueError):
        ClusterAssignment(
            labels=np.array([0, 2]),  # label 1 missing
            centers=np.zeros((3, 1)),
            sizes=np.array([1, 0, 1]),
        )
    asg = ClusterAssignment(
        labels=np.array([0, 1, 0]),
        centers=np.zeros((2, 2)),
        sizes=np.array([2, 1]),
    )
    assert asg.n_clusters == 2
