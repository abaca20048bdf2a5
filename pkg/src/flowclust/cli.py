"""Command-line front end.

Each subcommand loads its input, runs one pipeline, and emits a run
record: tool version, the exact command, an input checksum, every
resolved setting, and the result. Identical commands on identical
inputs therefore produce byte-identical files for the deterministic
pipelines. Wall-clock timing goes to stderr only, never into the
artifact.

Exit codes: 0 success, 1 runtime failure (unreadable content, solver
blowup, write errors), 2 argument problems including missing inputs.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import (
    KMeansConfig,
    eigen_gap_count,
    kmeans,
    spectral_cluster,
    symmetric_eigen,
)
from .datasets import PRESET_NAMES, csv_text, load_csv, make_preset
from .dynamics import ParticleState, build_laplacian
from .engine import FlowConfig, cluster
from .evaluate import (
    KNOWN_METHODS,
    confusion_matrix,
    diagonal_heavy_sort,
    macro_f1,
    run_benchmark,
    total_error,
)
from .graph import evolve_distances, extract_graph_clusters, validate_distance_matrix
from .potentials import GAUSSIAN, QUARTIC, R_STAR_FACTOR, PotentialSpec, auto_tune_sigma


class _UsageError(Exception):
    """Argument-level problem: report and exit 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowclust",
        description="Deterministic clustering via attractive particle flows.",
    )
    parser.add_argument(
        "--version", action="version", version=f"flowclust {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    io_flags = argparse.ArgumentParser(add_help=False)
    io_flags.add_argument(
        "--output", metavar="PATH", help="write the artifact here instead of stdout"
    )
    io_flags.add_argument(
        "--format",
        choices=("json", "csv"),
        default=None,
        help="artifact format (default: json; csv for gen)",
    )

    table_flags = argparse.ArgumentParser(add_help=False)
    table_flags.add_argument(
        "--label-col",
        metavar="COL",
        help="class column, by header name or 0-based index; enables scoring",
    )
    table_flags.add_argument(
        "--header",
        choices=("auto", "yes", "no"),
        default="auto",
        help="whether the first CSV row is a header (default: sniff)",
    )

    kernel_flags = argparse.ArgumentParser(add_help=False)
    kernel_flags.add_argument(
        "--sigma", type=float, help="kernel bandwidth (default: tuned from the data)"
    )
    kernel_flags.add_argument(
        "--rstar", type=float, help="support radius (default: 3 * sigma)"
    )
    kernel_flags.add_argument(
        "--kernel", choices=(GAUSSIAN, QUARTIC), default=GAUSSIAN
    )

    flow_flags = argparse.ArgumentParser(add_help=False, parents=[kernel_flags])
    flow_flags.add_argument(
        "--dt", type=float, help="Euler step (default: from the stability bound)"
    )
    flow_flags.add_argument("--max-iter", type=int, default=10_000)
    flow_flags.add_argument("--stop-tol", type=float, default=1e-5)
    flow_flags.add_argument(
        "--raw-stop-rule",
        action="store_true",
        help="stop on the absolute displacement scale instead of the "
        "per-pair normalized one",
    )
    flow_flags.add_argument("--min-cluster-frac", type=float, default=0.01)
    flow_flags.add_argument(
        "--coalesce-eps",
        type=float,
        default=None,
        help="merge radius for duplicate inputs (default: sigma)",
    )
    flow_flags.add_argument("--prune-threshold", type=float, default=None)

    p = sub.add_parser(
        "cluster",
        parents=[flow_flags, table_flags, io_flags],
        help="run the particle flow on a CSV of points",
    )
    p.add_argument("input", help="CSV of points, one row per observation")

    p = sub.add_parser(
        "graph-cluster",
        parents=[io_flags],
        help="run the distance-matrix flow on a square CSV",
    )
    p.add_argument("input", help="CSV holding a symmetric distance matrix")
    p.add_argument("--sigma", type=float, help="weight bandwidth (default: tuned)")
    p.add_argument(
        "--rstar",
        type=float,
        help="cluster extraction threshold (default: 3 * sigma)",
    )
    p.add_argument("--dt", type=float, help="step size (default: per-step bound)")
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--stop-tol", type=float, default=1e-5)
    p.add_argument(
        "--header",
        choices=("auto", "yes", "no"),
        default="auto",
        help="whether the first CSV row is a header (default: sniff)",
    )

    p = sub.add_parser(
        "kmeans",
        parents=[table_flags, io_flags],
        help="restarted Lloyd iteration baseline",
    )
    p.add_argument("input", help="CSV of points")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)

    p = sub.add_parser(
        "spectral",
        parents=[kernel_flags, table_flags, io_flags],
        help="Laplacian eigenvector embedding + restarted k-means",
    )
    p.add_argument("input", help="CSV of points")
    p.add_argument(
        "--k", type=int, default=None, help="cluster count (default: eigenvalue gap)"
    )
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)

    p = sub.add_parser(
        "gen", parents=[io_flags], help="emit a seeded synthetic dataset as CSV"
    )
    p.add_argument("preset", choices=PRESET_NAMES)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser(
        "bench",
        parents=[flow_flags, table_flags, io_flags],
        help="score several methods against the labels of one dataset",
    )
    p.add_argument("input", help="CSV of labeled points (--label-col required)")
    p.add_argument(
        "--methods",
        default="flow,kmeans,spectral",
        help=f"comma-separated subset of {','.join(KNOWN_METHODS)}",
    )
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="override the class count")
    p.add_argument("--restarts", type=int, default=100)

    p = sub.add_parser(
        "eigen",
        parents=[kernel_flags, table_flags, io_flags],
        help="emit the interaction Laplacian spectrum (index,eigenvalue)",
    )
    p.add_argument("input", help="CSV of points")

    return parser


def _check_args(args) -> None:
    """Range checks argparse cannot express; failures exit 2."""

    def positive(name, strict=True):
        value = getattr(args, name, None)
        if value is None:
            return
        value = float(value)
        bad = value <= 0.0 if strict else value < 0.0
        if bad or not np.isfinite(value):
            bound = "> 0" if strict else ">= 0"
            raise _UsageError(f"--{name.replace('_', '-')} must be {bound}, got {value:g}")

    positive("sigma")
    positive("rstar")
    positive("dt")
    positive("stop_tol")
    positive("coalesce_eps", strict=False)
    positive("prune_threshold")
    for name in ("max_iter", "k", "restarts", "runs"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise _UsageError(f"--{name.replace('_', '-')} must be >= 1, got {value}")
    frac = getattr(args, "min_cluster_frac", None)
    if frac is not None and not 0.0 <= frac < 1.0:
        raise _UsageError(f"--min-cluster-frac must be in [0, 1), got {frac:g}")


def _load_table(args):
    header = {"auto": None, "yes": True, "no": False}[args.header]
    label_col = getattr(args, "label_col", None)
    if label_col is not None and label_col.lstrip("-").isdigit():
        label_col = int(label_col)
    return load_csv(args.input, label_col=label_col, header=header)


def _input_meta(path, rows: int, columns: int) -> dict:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return {
        "path": str(path),
        "sha256": digest,
        "rows": int(rows),
        "columns": int(columns),
    }


def _evaluation(truth, labels, class_names) -> dict:
    cm = confusion_matrix(truth, labels)
    sorted_m, perm = diagonal_heavy_sort(cm)
    return {
        "confusion_sorted": sorted_m.tolist(),
        "column_permutation": [int(v) for v in perm],
        "total_error": total_error(cm),
        "macro_f1": macro_f1(cm),
        "class_names": class_names,
    }


def _assignment_csv(labels) -> str:
    lines = ["index,label"]
    lines.extend(f"{i},{int(lab)}" for i, lab in enumerate(labels))
    return "\n".join(lines) + "\n"


def _potential_from(args, points) -> PotentialSpec:
    sigma = args.sigma if args.sigma is not None else auto_tune_sigma(points)
    return PotentialSpec(sigma=sigma, r_star=args.rstar, kind=args.kernel)


def _run_cluster(args):
    ds = _load_table(args)
    spec = _potential_from(args, ds.points)
    cfg = FlowConfig(
        potential=spec,
        dt=args.dt,
        max_iters=args.max_iter,
        stop_tol=args.stop_tol,
        raw_stop_rule=args.raw_stop_rule,
        min_cluster_fraction=args.min_cluster_frac,
        coalesce_eps=args.coalesce_eps,
        prune_threshold=args.prune_threshold,
    )
    res = cluster(ds.points, cfg)
    config = {
        "sigma": float(spec.sigma),
        "r_star": float(spec.r_star),
        "kernel": spec.kind,
        "dt": float(res.dt),
        "max_iters": int(args.max_iter),
        "stop_tol": float(args.stop_tol),
        "raw_stop_rule": bool(args.raw_stop_rule),
        "min_cluster_fraction": float(args.min_cluster_frac),
        "coalesce_eps": None if args.coalesce_eps is None else float(args.coalesce_eps),
        "prune_threshold": (
            None if args.prune_threshold is None else float(args.prune_threshold)
        ),
        "label_col": getattr(args, "label_col", None),
    }
    result = res.to_dict()
    result["cluster_count"] = res.assignment.n_clusters
    if ds.labels is not None:
        result["evaluation"] = _evaluation(
            ds.labels, res.assignment.labels, ds.class_names
        )
    meta = _input_meta(args.input, ds.points.shape[0], ds.points.shape[1])
    return "json", meta, config, result, _assignment_csv(res.assignment.labels)


def _run_graph_cluster(args):
    header = {"auto": None, "yes": True, "no": False}[args.header]
    ds = load_csv(args.input, header=header)
    d = validate_distance_matrix(ds.points)
    evo = evolve_distances(
        d,
        sigma=args.sigma,
        dt=args.dt,
        max_iters=args.max_iter,
        stop_tol=args.stop_tol,
    )
    threshold = args.rstar if args.rstar is not None else R_STAR_FACTOR * evo.sigma
    assignment = extract_graph_clusters(evo.distances, threshold)
    config = {
        "sigma": float(evo.sigma),
        "dt": float(evo.dt),
        "max_iters": int(args.max_iter),
        "stop_tol": float(args.stop_tol),
        "threshold": float(threshold),
    }
    result = {
        "labels": assignment.labels.tolist(),
        "sizes": assignment.sizes.tolist(),
        "cluster_count": assignment.n_clusters,
        "iterations": int(evo.iterations),
        "converged": bool(evo.converged),
        "clamp_events": int(evo.clamp_events),
        "warnings": list(evo.warnings),
    }
    meta = _input_meta(args.input, d.shape[0], d.shape[1])
    return "json", meta, config, result, _assignment_csv(assignment.labels)


def _run_kmeans(args):
    ds = _load_table(args)
    assignment, inertia = kmeans(
        ds.points,
        KMeansConfig(
            k=args.k, restarts=args.restarts, max_iters=args.max_iter, seed=args.seed
        ),
    )
    config = {
        "k": int(args.k),
        "restarts": int(args.restarts),
        "seed": int(args.seed),
        "max_iters": int(args.max_iter),
        "label_col": getattr(args, "label_col", None),
    }
    result = {
        "labels": assignment.labels.tolist(),
        "centers": assignment.centers.tolist(),
        "sizes": assignment.sizes.tolist(),
        "cluster_count": assignment.n_clusters,
        "inertia": float(inertia),
    }
    if ds.labels is not None:
        result["evaluation"] = _evaluation(ds.labels, assignment.labels, ds.class_names)
    meta = _input_meta(args.input, ds.points.shape[0], ds.points.shape[1])
    return "json", meta, config, result, _assignment_csv(assignment.labels)


def _run_spectral(args):
    ds = _load_table(args)
    spec = _potential_from(args, ds.points)
    res = spectral_cluster(
        ds.points,
        k=args.k,
        potential=spec,
        restarts=args.restarts,
        seed=args.seed,
        max_iters=args.max_iter,
    )
    config = {
        "k": int(res.k),
        "sigma": float(spec.sigma),
        "r_star": float(spec.r_star),
        "kernel": spec.kind,
        "restarts": int(args.restarts),
        "seed": int(args.seed),
        "max_iters": int(args.max_iter),
        "label_col": getattr(args, "label_col", None),
    }
    assignment = res.assignment
    result = {
        "labels": assignment.labels.tolist(),
        "centers": assignment.centers.tolist(),
        "sizes": assignment.sizes.tolist(),
        "cluster_count": assignment.n_clusters,
        "eigenvalues": [float(v) for v in res.eigenvalues],
    }
    if ds.labels is not None:
        result["evaluation"] = _evaluation(ds.labels, assignment.labels, ds.class_names)
    meta = _input_meta(args.input, ds.points.shape[0], ds.points.shape[1])
    return "json", meta, config, result, _assignment_csv(assignment.labels)


def _run_gen(args):
    ds = make_preset(args.preset, seed=args.seed)
    config = {"preset": args.preset, "seed": int(args.seed)}
    return "csv", dict(config), config, ds.to_dict(), csv_text(ds)


def _run_bench(args):
    if args.label_col is None:
        raise _UsageError("bench needs --label-col to know the true classes")
    methods = tuple(s.strip() for s in args.methods.split(",") if s.strip())
    for name in methods:
        if name not in KNOWN_METHODS:
            raise _UsageError(
                f"unknown method {name!r}; choose from {','.join(KNOWN_METHODS)}"
            )
    ds = _load_table(args)
    flow_cfg = FlowConfig(
        potential=(
            None
            if args.sigma is None and args.rstar is None and args.kernel == GAUSSIAN
            else _potential_from(args, ds.points)
        ),
        dt=args.dt,
        max_iters=args.max_iter,
        stop_tol=args.stop_tol,
        raw_stop_rule=args.raw_stop_rule,
        min_cluster_fraction=args.min_cluster_frac,
        coalesce_eps=args.coalesce_eps,
        prune_threshold=args.prune_threshold,
    )
    report = run_benchmark(
        ds.points,
        ds.labels,
        methods=methods,
        runs=args.runs,
        seed=args.seed,
        k=args.k,
        restarts=args.restarts,
        flow_config=flow_cfg,
    )
    config = {
        "methods": list(methods),
        "runs": int(args.runs),
        "seed": int(args.seed),
        "k": None if args.k is None else int(args.k),
        "restarts": int(args.restarts),
        "label_col": args.label_col,
    }
    header = (
        "method,n_runs,min_error,mean_error,sd_error,"
        "min_f1,mean_f1,sd_f1,cluster_count,wall_time_seconds"
    )
    rows = [header]
    for m in report.methods:
        rows.append(
            f"{m.name},{m.n_runs},{m.min_error},{m.mean_error:g},{m.sd_error:g},"
            f"{m.min_f1:g},{m.mean_f1:g},{m.sd_f1:g},{m.cluster_count},"
            f"{m.wall_time_seconds:g}"
        )
    meta = _input_meta(args.input, ds.points.shape[0], ds.points.shape[1])
    return "json", meta, config, report.to_dict(), "\n".join(rows) + "\n"


def _run_eigen(args):
    ds = _load_table(args)
    spec = _potential_from(args, ds.points)
    lap = build_laplacian(ParticleState.from_points(ds.points), spec)
    dec = symmetric_eigen(lap)
    config = {
        "sigma": float(spec.sigma),
        "r_star": float(spec.r_star),
        "kernel": spec.kind,
        "label_col": getattr(args, "label_col", None),
    }
    result = {
        "eigenvalues": [float(v) for v in dec.values],
        "gap_count": eigen_gap_count(dec.values),
    }
    lines = ["index,eigenvalue"]
    lines.extend(f"{i},{repr(float(v))}" for i, v in enumerate(dec.values))
    meta = _input_meta(args.input, ds.points.shape[0], ds.points.shape[1])
    return "json", meta, config, result, "\n".join(lines) + "\n"


_HANDLERS = {
    "cluster": _run_cluster,
    "graph-cluster": _run_graph_cluster,
    "kmeans": _run_kmeans,
    "spectral": _run_spectral,
    "gen": _run_gen,
    "bench": _run_bench,
    "eigen": _run_eigen,
}


def _atomic_write(path: Path, text: str) -> None:
    """Land the artifact via a temp file so readers never see a torso."""
    parent = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(parent))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(args, default_format: str, record: dict, csv_body: str) -> None:
    fmt = args.format if args.format is not None else default_format
    if fmt == "json":
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    else:
        text = csv_body
    if args.output:
        _atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else [str(a) for a in argv]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        _check_args(args)
        if hasattr(args, "input") and not Path(args.input).is_file():
            raise _UsageError(f"input file not found: {args.input}")
        started = time.perf_counter()
        default_format, meta, config, result, csv_body = _HANDLERS[args.command](args)
        elapsed = time.perf_counter() - started
        record = {
            "tool": "flowclust",
            "version": __version__,
            "command": argv,
            "input": meta,
            "config": config,
            "result": result,
        }
        _emit(args, default_format, record, csv_body)
        print(f"{args.command}: {elapsed:.3f}s", file=sys.stderr)
        return 0
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
