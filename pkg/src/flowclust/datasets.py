"""Labeled point sets: seeded synthetic generators and CSV ingestion.

All generators consume a single SplitMix64 stream in component order,
so a (parameters, seed) pair pins every coordinate. Provenance strings
record how each dataset came to be: generator settings for synthetic
data, path plus content digest for files.
"""

import csv
import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .prng import SplitMix64

__all__ = [
    "LabeledDataset",
    "PRESET_NAMES",
    "csv_text",
    "gen_concentric_spheres",
    "gen_gaussian_mixture",
    "gen_hypersphere_clusters",
    "load_csv",
    "load_iris",
    "make_preset",
    "save_csv",
]


@dataclass
class LabeledDataset:
    """Points with optional integer labels and naming metadata."""

    points: np.ndarray
    labels: np.ndarray | None
    name: str
    provenance: str
    class_names: list | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError(f"points must be (N, M) and nonempty, got {self.points.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError("labels must match the number of points")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "points": self.points.tolist(),
            "labels": None if self.labels is None else self.labels.tolist(),
            "class_names": self.class_names,
        }


def _check_sizes(sizes, count: int) -> list:
    sizes = [int(s) for s in sizes]
    if len(sizes) != count:
        raise ValueError(f"need one size per component: {len(sizes)} != {count}")
    if any(s < 1 for s in sizes):
        raise ValueError("component sizes must be >= 1")
    return sizes


def _unit_directions(rng: SplitMix64, n: int, m: int) -> np.ndarray:
    dirs = rng.normals(n * m).reshape(n, m)
    norms = np.linalg.norm(dirs, axis=1)
    for i in np.nonzero(norms == 0.0)[0]:  # essentially never
        while norms[i] == 0.0:
            dirs[i] = rng.normals(m)
            norms[i] = np.linalg.norm(dirs[i])
    return dirs / norms[:, None]


def _labels_for(sizes) -> np.ndarray:
    return np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)


def gen_gaussian_mixture(
    centers, sds=None, covariances=None, sizes=None, seed: int = 0
) -> LabeledDataset:
    """Normal blobs around given centers.

    Spread comes from either per-component scalar sds or full
    covariance matrices (exactly one of the two). A zero spread pins
    the whole component at its center.
    """
    ctr = np.asarray(centers, dtype=np.float64)
    if ctr.ndim != 2 or ctr.shape[0] == 0:
        raise ValueError(f"centers must be (C, M), got {ctr.shape}")
    c, m = ctr.shape
    if (sds is None) == (covariances is None):
        raise ValueError("give exactly one of sds or covariances")
    if sizes is None:
        raise ValueError("sizes is required")
    sizes = _check_sizes(sizes, c)

    scales = []
    if sds is not None:
        if len(sds) != c:
            raise ValueError(f"need one sd per component: {len(sds)} != {c}")
        for sd in sds:
            sd = float(sd)
            if sd < 0.0 or not np.isfinite(sd):
                raise ValueError(f"sd must be finite and >= 0, got {sd}")
            scales.append(sd)
    else:
        if len(covariances) != c:
            raise ValueError(
                f"need one covariance per component: {len(covariances)} != {c}"
            )
        for cov in covariances:
            cov = np.asarray(cov, dtype=np.float64)
            if cov.shape != (m, m) or not np.array_equal(cov, cov.T):
                raise ValueError(f"covariance must be symmetric ({m}, {m})")
            if np.all(cov == 0.0):
                scales.append(np.zeros((m, m)))
                continue
            try:
                scales.append(np.linalg.cholesky(cov))
            except np.linalg.LinAlgError:
                raise ValueError("covariance must be positive definite") from None

    rng = SplitMix64(seed)
    blocks = []
    for center, scale, n in zip(ctr, scales, sizes):
        z = rng.normals(n * m).reshape(n, m)
        if np.isscalar(scale) or np.ndim(scale) == 0:
            blocks.append(center + scale * z)
        else:
            blocks.append(center + z @ np.asarray(scale).T)
    return LabeledDataset(
        points=np.vstack(blocks),
        labels=_labels_for(sizes),
        name="mixture",
        provenance=f"generated:gaussian_mixture seed={seed} sizes={sizes}",
    )


def gen_hypersphere_clusters(centers, radii, sizes, seed: int = 0) -> LabeledDataset:
    """Uniform solid-ball clusters: direction uniform, radius R u^(1/M)."""
    ctr = np.asarray(centers, dtype=np.float64)
    if ctr.ndim != 2 or ctr.shape[0] == 0:
        raise ValueError(f"centers must be (C, M), got {ctr.shape}")
    c, m = ctr.shape
    sizes = _check_sizes(sizes, c)
    if len(radii) != c:
        raise ValueError(f"need one radius per component: {len(radii)} != {c}")
    radii = [float(r) for r in radii]
    if any(r <= 0 or not np.isfinite(r) for r in radii):
        raise ValueError("radii must be positive and finite")

    rng = SplitMix64(seed)
    blocks = []
    for center, radius, n in zip(ctr, radii, sizes):
        dirs = _unit_directions(rng, n, m)
        r = radius * rng.uniforms(n) ** (1.0 / m)
        blocks.append(center + dirs * r[:, None])
    return LabeledDataset(
        points=np.vstack(blocks),
        labels=_labels_for(sizes),
        name="spheres",
        provenance=f"generated:hypersphere_clusters seed={seed} sizes={sizes}",
    )


def gen_concentric_spheres(
    radii, sizes, noise: float = 0.1, seed: int = 0, dim: int = 3
) -> LabeledDataset:
    """Nested shell surfaces sharing one center, with radial jitter."""
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 or not np.isfinite(r) for r in radii):
        raise ValueError("radii must be positive and finite")
    sizes = _check_sizes(sizes, len(radii))
    noise = float(noise)
    if noise < 0.0 or not np.isfinite(noise):
        raise ValueError(f"noise must be finite and >= 0, got {noise}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")

    rng = SplitMix64(seed)
    blocks = []
    for radius, n in zip(radii, sizes):
        dirs = _unit_directions(rng, n, dim)
        radial = radius + noise * rng.normals(n)
        blocks.append(dirs * radial[:, None])
    return LabeledDataset(
        points=np.vstack(blocks),
        labels=_labels_for(sizes),
        name="shells",
        provenance=f"generated:concentric_spheres seed={seed} sizes={sizes}",
    )


PRESET_NAMES = ("mixture", "spheres", "shells", "blobs")


def make_preset(name: str, seed: int = 0) -> LabeledDataset:
    """Fixed benchmark configurations, varied only through the seed."""
    if name == "mixture":
        centers = np.zeros((4, 5))
        for i in range(4):
            centers[i, i] = 10.0
        ds = gen_gaussian_mixture(centers, sds=[0.35] * 4, sizes=[100] * 4, seed=seed)
    elif name == "spheres":
        ds = gen_hypersphere_clusters(
            [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]],
            radii=[1.0, 1.0, 1.0],
            sizes=[200, 200, 200],
            seed=seed,
        )
    elif name == "shells":
        ds = gen_concentric_spheres(
            radii=[5.0, 10.0], sizes=[1000, 1000], noise=0.1, seed=seed
        )
    elif name == "blobs":
        ds = gen_gaussian_mixture(
            [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]],
            sds=[0.3] * 4,
            sizes=[30] * 4,
            seed=seed,
        )
    else:
        raise ValueError(f"unknown preset {name!r}, expected one of {PRESET_NAMES}")
    ds.name = name
    return ds


def csv_text(dataset: LabeledDataset) -> str:
    """The dataset as CSV text with round-trip floats, one trailing newline."""
    m = dataset.points.shape[1]
    header = [f"x{j}" for j in range(m)]
    if dataset.labels is not None:
        header.append("label")
    lines = [",".join(header)]
    for i, row in enumerate(dataset.points):
        cells = [repr(float(v)) for v in row]
        if dataset.labels is not None:
            lab = int(dataset.labels[i])
            if dataset.class_names is not None:
                cells.append(str(dataset.class_names[lab]))
            else:
                cells.append(str(lab))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def save_csv(dataset: LabeledDataset, path) -> None:
    """Write points (and labels, when present) with round-trip floats."""
    Path(path).write_text(csv_text(dataset))


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_csv(path, label_col=None, header: bool | None = None) -> LabeledDataset:
    """Read a numeric CSV, optionally peeling one label column.

    header=None sniffs the first row: any non-numeric cell makes it a
    header. label_col picks the label column by name (header required)
    or 0-based index; label values map to ids in first-appearance
    order with the original strings kept as class_names. Errors cite
    1-based file row and column numbers.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path} is empty")

    names = None
    start = 0
    has_header = header
    if has_header is None:
        has_header = not all(_is_float(cell) for cell in rows[0])
    if has_header:
        names = [cell.strip() for cell in rows[0]]
        start = 1
        if len(rows) == 1:
            raise ValueError(f"{path} has a header but no data rows")
    width = len(rows[start])

    label_idx = None
    if label_col is not None:
        if isinstance(label_col, str):
            if names is None:
                raise ValueError("label_col by name needs a header row")
            if label_col not in names:
                raise ValueError(f"no column named {label_col!r} in {names}")
            label_idx = names.index(label_col)
        else:
            label_idx = int(label_col)
            if not 0 <= label_idx < width:
                raise ValueError(f"label column {label_idx} out of range for {width} columns")

    points = []
    raw_labels = []
    for r, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise ValueError(f"row {r} has {len(row)} cells, expected {width}")
        vals = []
        for j, cell in enumerate(row):
            if j == label_idx:
                raw_labels.append(cell.strip())
                continue
            cell = cell.strip()
            if not _is_float(cell):
                raise ValueError(f"row {r} column {j + 1}: {cell!r} is not numeric")
            vals.append(float(cell))
        points.append(vals)

    labels = None
    class_names = None
    if label_idx is not None:
        class_names = []
        ids = {}
        labels = np.empty(len(raw_labels), dtype=np.int64)
        for i, token in enumerate(raw_labels):
            if token not in ids:
                ids[token] = len(class_names)
                class_names.append(token)
            labels[i] = ids[token]

    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return LabeledDataset(
        points=np.asarray(points, dtype=np.float64),
        labels=labels,
        name=path.stem,
        provenance=f"{path} sha256={digest}",
        class_names=class_names,
    )


def load_iris() -> LabeledDataset:
    """The packaged 150-flower measurement table, species as labels."""
    source = resources.files("flowclust").joinpath("data", "iris.csv")
    with resources.as_file(source) as real:
        return load_csv(real, label_col="species")
