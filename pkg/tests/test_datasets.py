"""Generator, preset, and CSV round-trip tests."""

import numpy as np
import pytest

from flowclust.datasets import (
    LabeledDataset,
    gen_concentric_spheres,
    gen_gaussian_mixture,
    gen_hypersphere_clusters,
    load_csv,
    load_iris,
    make_preset,
    save_csv,
)

CENTERS_2D = np.array([[0.0, 0.0], [10.0, 0.0]])


def test_mixture_shapes_and_labels():
    ds = gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[30, 20], seed=1)
    assert isinstance(ds, LabeledDataset)
    assert ds.points.shape == (50, 2)
    assert np.array_equal(ds.labels, np.repeat([0, 1], [30, 20]))
    assert "seed=1" in ds.provenance


def test_mixture_deterministic_and_seed_sensitive():
    a = gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[10, 10], seed=7)
    b = gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[10, 10], seed=7)
    c = gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[10, 10], seed=8)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_mixture_component_moments():
    ds = gen_gaussian_mixture(CENTERS_2D, sds=[0.35, 0.35], sizes=[400, 400], seed=3)
    for lab, center in enumerate(CENTERS_2D):
        block = ds.points[ds.labels == lab]
        assert np.max(np.abs(block.mean(axis=0) - center)) < 0.1
        assert abs((block - center).std() - 0.35) < 0.05


def test_mixture_full_covariance_and_zero_spread():
    cov = np.array([[1.0, 0.9], [0.9, 1.0]])
    ds = gen_gaussian_mixture(
        [[0.0, 0.0]], covariances=[cov], sizes=[2000], seed=5
    )
    sample = np.cov(ds.points.T)
    assert sample[0, 1] > 0.5
    ds0 = gen_gaussian_mixture([[3.0, 4.0]], sds=[0.0], sizes=[5], seed=5)
    assert np.array_equal(ds0.points, np.tile([3.0, 4.0], (5, 1)))


def test_mixture_validation():
    with pytest.raises(ValueError):
        gen_gaussian_mixture(CENTERS_2D, sds=[0.5], sizes=[10, 10])  # count mismatch
    with pytest.raises(ValueError):
        gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[10, 0])
    with pytest.raises(ValueError):
        gen_gaussian_mixture(
            CENTERS_2D, covariances=[np.array([[1.0, 2.0], [2.0, 1.0]])] * 2,
            sizes=[5, 5],
        )  # not positive definite
    with pytest.raises(ValueError):
        gen_gaussian_mixture(CENTERS_2D, sizes=[5, 5])  # neither sds nor covariances


def test_hypersphere_within_radius_and_uniform():
    ds = gen_hypersphere_clusters(
        [[0.0, 0.0, 0.0]], radii=[1.0], sizes=[1000], seed=11
    )
    norms = np.linalg.norm(ds.points, axis=1)
    assert np.all(norms <= 1.0 + 1e-12)
    # uniform in the ball: the half-radius ball holds (1/2)^3 of the mass
    frac = float(np.mean(norms <= 0.5))
    assert 0.07 < frac < 0.19


def test_hypersphere_centers_offset():
    ds = gen_hypersphere_clusters(
        [[0.0, 0.0], [10.0, 0.0]], radii=[1.0, 2.0], sizes=[50, 50], seed=13
    )
    far = ds.points[ds.labels == 1]
    assert np.all(np.linalg.norm(far - np.array([10.0, 0.0]), axis=1) <= 2.0 + 1e-12)


def test_concentric_spheres_radii_and_labels():
    ds = gen_concentric_spheres(radii=[5.0, 10.0], sizes=[300, 300], noise=0.1, seed=17)
    assert ds.points.shape == (600, 3)
    inner = np.linalg.norm(ds.points[ds.labels == 0], axis=1)
    outer = np.linalg.norm(ds.points[ds.labels == 1], axis=1)
    assert np.all(np.abs(inner - 5.0) < 0.6)
    assert np.all(np.abs(outer - 10.0) < 0.6)


def test_presets():
    mix = make_preset("mixture", seed=0)
    assert mix.points.shape == (400, 5)
    assert np.array_equal(np.bincount(mix.labels), [100] * 4)
    spheres = make_preset("spheres", seed=0)
    assert spheres.points.shape == (600, 3)
    shells = make_preset("shells", seed=0)
    assert shells.points.shape == (2000, 3)
    blobs = make_preset("blobs", seed=0)
    assert blobs.points.shape == (120, 2)
    assert np.array_equal(np.bincount(blobs.labels), [30] * 4)
    again = make_preset("blobs", seed=0)
    assert np.array_equal(blobs.points, again.points)
    with pytest.raises(ValueError):
        make_preset("nonesuch")


def test_csv_round_trip_exact(tmp_path):
    ds = gen_gaussian_mixture(CENTERS_2D, sds=[0.5, 0.5], sizes=[4, 4], seed=19)
    ds = LabeledDataset(
        points=ds.points,
        labels=ds.labels,
        name="roundtrip",
        provenance=ds.provenance,
        class_names=["alpha", "beta"],
    )
    path = tmp_path / "round.csv"
    save_csv(ds, path)
    back = load_csv(path, label_col="label")
    assert np.array_equal(back.points, ds.points)  # repr round-trips floats
    assert np.array_equal(back.labels, ds.labels)
    assert back.class_names == ["alpha", "beta"]
    assert "sha256=" in back.provenance


def test_csv_no_labels(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("x,y\n1.0,2.0\n3.5,4.5\n")
    ds = load_csv(path)
    assert ds.labels is None
    assert np.array_equal(ds.points, np.array([[1.0, 2.0], [3.5, 4.5]]))


def test_csv_headerless(tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text("1.0,2.0\n3.0,4.0\n")
    ds = load_csv(path)
    assert ds.points.shape == (2, 2)


def test_csv_label_by_index_and_name(tmp_path):
    path = tmp_path / "lab.csv"
    path.write_text("a,b,kind\n1.0,2.0,cat\n3.0,4.0,dog\n5.0,6.0,cat\n")
    by_name = load_csv(path, label_col="kind")
    assert np.array_equal(by_name.labels, [0, 1, 0])
    assert by_name.class_names == ["cat", "dog"]
    assert by_name.points.shape == (3, 2)
    by_index = load_csv(path, label_col=2)
    assert np.array_equal(by_index.labels, by_name.labels)


def test_csv_error_messages(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b\n1.0,2.0\n3.0\n")
    with pytest.raises(ValueError, match="row 3"):
        load_csv(ragged)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(ValueError, match="row 3.*column 2"):
        load_csv(bad)
    missing_col = tmp_path / "cols.csv"
    missing_col.write_text("a,b\n1.0,2.0\n")
    with pytest.raises(ValueError, match="kind"):
        load_csv(missing_col, label_col="kind")
    with pytest.raises(ValueError):
        load_csv(missing_col, label_col=5)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError):
        load_csv(empty)
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "absent.csv")


def test_load_iris():
    ds = load_iris()
    assert ds.points.shape == (150, 4)
    assert np.array_equal(np.bincount(ds.labels), [50, 50, 50])
    assert ds.class_names == ["setosa", "versicolor", "virginica"]
    assert ds.labels[0] == 0 and ds.labels[-1] == 2
    assert "sha256=" in ds.provenance
    assert ds.name == "iris"
