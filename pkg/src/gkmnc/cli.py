"""Command-line front end.

Subcommands: train, predict, crossval, bench, inspect. Every run writes one
plain-text manifest (command, config snapshot, dataset fingerprint, seed,
wall-clock timings, output paths); all other report files are byte-stable
across identical runs because timings live only in the manifest.

Exit codes: 0 success, 2 usage error, 3 data or model-file error,
4 training failure, 5 I/O failure. GKMNC_SEED and GKMNC_WORKERS override
the seed and worker count when the flags are absent.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import bench
from .dataset import AttributeKind, DataTable, load_schema, load_table
from .errors import (
    AllZero,
    CholeskyFailure,
    CorruptFile,
    EmptyData,
    EmptyInput,
    EmptyValidation,
    FormatVersionMismatch,
    GkmncError,
    InvalidInterval,
    KExceedsRows,
    KTooLarge,
    MissingColumn,
    NoBracketFound,
    NonConvergence,
    PartitionTooLarge,
    SchemaError,
    SingleCluster,
    SplitInfoZero,
    TypeMismatch,
    UnknownTargetLabel,
    UnseenNominalLabel,
    ZeroTotal,
)
from .infogain import compute_gain_report
from .kmeans import select_k
from .pipeline import (
    PipelineConfig,
    config_from_file,
    cross_validate,
    forecast_table,
    train_gkmnc,
)
from .dataset import apply_normalizer, fit_normalizer
from .serialize import load_model, save_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAIN = 4
EXIT_IO = 5

_DATA_ERRORS = (
    SchemaError,
    MissingColumn,
    TypeMismatch,
    UnknownTargetLabel,
    FormatVersionMismatch,
    CorruptFile,
    UnseenNominalLabel,
    EmptyValidation,
    EmptyInput,
    KTooLarge,
    AllZero,
    SplitInfoZero,
)
_TRAIN_ERRORS = (
    EmptyData,
    KExceedsRows,
    PartitionTooLarge,
    NonConvergence,
    CholeskyFailure,
    NoBracketFound,
    InvalidInterval,
    SingleCluster,
    ZeroTotal,
)


def _env_int(name: str) -> int | None:
    value = os.environ.get(name)
    return int(value) if value else None


def _resolve_config(args) -> PipelineConfig:
    cfg = config_from_file(args.config) if getattr(args, "config", None) else PipelineConfig()
    seed = args.seed if getattr(args, "seed", None) is not None else _env_int("GKMNC_SEED")
    workers = (
        args.workers if getattr(args, "workers", None) is not None else _env_int("GKMNC_WORKERS")
    )
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if workers is not None:
        cfg = replace(cfg, worker_count=workers)
    return cfg


def _schema_fingerprint(schema) -> str:
    text = "\n".join(f"{a.name}={a.kind.value}" for a in schema.attributes)
    text += f"\npositive_label={schema.positive_label}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _config_lines(cfg: PipelineConfig) -> list[str]:
    lines = []
    for key, value in sorted(cfg.__dict__.items()):
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"config.{key} = {value}")
    return lines


def _write_manifest(
    path: Path,
    command: str,
    cfg: PipelineConfig | None,
    table: DataTable | None,
    timings: dict[str, float],
    outputs: list[str],
    leaf_seconds: dict | None = None,
) -> None:
    lines = [f"command = {command}"]
    if table is not None:
        lines.append(f"dataset.rows = {table.n_rows}")
        lines.append(f"dataset.schema_hash = {_schema_fingerprint(table.schema)}")
    if cfg is not None:
        lines.append(f"seed = {cfg.seed}")
        lines.extend(_config_lines(cfg))
    for name, seconds in timings.items():
        lines.append(f"seconds.{name} = {seconds:.6f}")
    if leaf_seconds:
        for (label, idx), seconds in sorted(leaf_seconds.items()):
            lines.append(f"seconds.leaf.{label}.{idx} = {seconds:.6f}")
    for out in outputs:
        lines.append(f"output = {out}")
    path.write_text("\n".join(lines) + "\n")


def _train_report_text(report) -> str:
    lines = [f"model = {report.model_name}"]
    lines.append(f"grouping_attribute = {report.grouping_attribute or ''}")
    lines.append(f"hidden_size = {report.hidden_size if report.hidden_size is not None else ''}")
    if report.hidden_search:
        table = ",".join(f"{s}:{a:.6f}" for s, a in sorted(report.hidden_search.items()))
        lines.append(f"hidden_search = {table}")
    lines.append("")
    if report.gain_report is not None:
        lines.append("[gain_ratios]")
        lines.append(report.gain_report.to_table_text().rstrip())
        lines.append("")
    lines.append("[clustering]")
    lines.append(report.cluster_table_text().rstrip())
    lines.append("")
    lines.append("[leaves]")
    lines.append(report.leaf_table_text().rstrip())
    return "\n".join(lines) + "\n"


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    schema = load_schema(args.schema)
    table = load_table(args.data, schema)
    start = time.perf_counter()
    model, report = train_gkmnc(table, None, cfg)
    wall = time.perf_counter() - start

    out = Path(args.out)
    save_model(model, out)
    report_path = Path(args.report) if args.report else out.with_suffix(out.suffix + ".report.txt")
    report_path.write_text(_train_report_text(report))
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(out.suffix + ".manifest.txt")
    _write_manifest(
        manifest_path,
        "train",
        cfg,
        table,
        {**{f"phase.{k}": v for k, v in report.phase_seconds.items()}, "wall": wall},
        [str(out), str(report_path)],
        leaf_seconds=report.leaf_seconds,
    )
    print(f"trained {model.model_name}: {model.leaf_count()} leaves, model at {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    table = load_table(args.data, model.schema)
    start = time.perf_counter()
    results = forecast_table(model, table)
    wall = time.perf_counter() - start
    out = Path(args.out)
    lines = ["predicted_class,probability,group,cluster,unseen_label"]
    for r in results:
        prob = "" if r.probability is None else f"{r.probability:.12g}"
        lines.append(f"{r.klass},{prob},{r.group_label},{r.cluster_index},{int(r.unseen_label)}")
    out.write_text("\n".join(lines) + "\n")
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(out.suffix + ".manifest.txt")
    _write_manifest(manifest_path, "predict", None, table, {"wall": wall}, [str(out)])
    print(f"wrote {len(results)} predictions to {out}")
    return EXIT_OK


def cmd_crossval(args) -> int:
    if args.folds < 2:
        print("crossval: --folds must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    cfg = _resolve_config(args)
    schema = load_schema(args.schema)
    table = load_table(args.data, schema)
    start = time.perf_counter()
    report = cross_validate(table, args.folds, cfg)
    wall = time.perf_counter() - start
    text = report.to_table_text()
    sys.stdout.write(text)
    out = Path(args.out)
    out.write_text(text)
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(out.suffix + ".manifest.txt")
    _write_manifest(manifest_path, "crossval", cfg, table, {"wall": wall}, [str(out)])
    return EXIT_OK


def cmd_bench(args) -> int:
    schema = load_schema(args.schema)
    table = load_table(args.data, schema)
    workers_list = tuple(int(w) for w in args.workers_list.split(","))
    seed = args.seed if args.seed is not None else (_env_int("GKMNC_SEED") or 0)

    lines = ["model,leaf_count,workers,avg_seconds_per_leaf,total_wall_seconds"]
    kinds = set()
    start = time.perf_counter()
    for config_path in args.config_list:
        cfg = replace(config_from_file(config_path), seed=seed)
        kinds.add(cfg.classifier_kind)
        for row in bench.measure_speedup(table, cfg, workers_list):
            lines.append(
                f"{row.model_name},{row.leaf_count},{row.workers},"
                f"{row.avg_seconds_per_leaf:.6f},{row.total_wall_seconds:.6f}"
            )
    for kind in sorted(kinds):
        slope, times = bench.scaling_slope(kind, tuple(args.scaling_sizes), seed=seed)
        sized = ";".join(f"{n}:{t:.6f}" for n, t in times.items())
        lines.append(f"# scaling {kind}: slope={slope:.3f} over {sized}")
    wall = time.perf_counter() - start

    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    out = Path(args.out)
    out.write_text(text)
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(out.suffix + ".manifest.txt")
    _write_manifest(manifest_path, "bench", None, table, {"wall": wall}, [str(out)])
    return EXIT_OK


def cmd_inspect(args) -> int:
    schema = load_schema(args.schema)
    table = load_table(args.data, schema)
    start = time.perf_counter()
    if not schema.nominal_indices():
        sys.stdout.write("attribute,name,gain_ratio,rank\n")
        print("# no nominal attributes in this schema")
    else:
        report = compute_gain_report(table)
        sys.stdout.write(report.to_table_text())
    if args.group_attr is not None:
        attr = schema.feature_by_index(args.group_attr)
        if attr.kind != AttributeKind.NOMINAL:
            print(
                f"inspect: --group-attr {args.group_attr} ({attr.name}) is not nominal",
                file=sys.stderr,
            )
            return EXIT_USAGE
        from .infogain import partition_by_attribute

        seed = args.seed if args.seed is not None else (_env_int("GKMNC_SEED") or 0)
        sys.stdout.write("group,k,dbi\n")
        for label, group in partition_by_attribute(table, args.group_attr).items():
            xn = apply_normalizer(fit_normalizer(group.numeric), group.numeric)
            k_max = min(args.k_max, group.n_rows)
            if k_max < 2:
                continue
            try:
                _, curve = select_k(xn, k_max, seed)
            except KExceedsRows:
                continue
            for k, dbi in curve:
                sys.stdout.write(f"{label},{k},{dbi:.6f}\n")
    wall = time.perf_counter() - start
    manifest_path = Path(args.manifest) if args.manifest else Path("inspect.manifest.txt")
    _write_manifest(manifest_path, "inspect", None, table, {"wall": wall}, [])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkmnc",
        description="Train, apply, and benchmark grouped / clustered nonlinear classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model and write it to disk")
    train.add_argument("--data", required=True)
    train.add_argument("--schema", required=True)
    train.add_argument("--config", help="key-value config file")
    train.add_argument("--out", required=True, help="model file path")
    train.add_argument("--report", help="train report path (default <out>.report.txt)")
    train.add_argument("--manifest", help="manifest path (default <out>.manifest.txt)")
    train.add_argument("--seed", type=int)
    train.add_argument("--workers", type=int)
    train.set_defaults(func=cmd_train)

    predict = sub.add_parser("predict", help="classify a data file with a saved model")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True)
    predict.add_argument("--out", required=True)
    predict.add_argument("--manifest")
    predict.set_defaults(func=cmd_predict)

    crossval = sub.add_parser("crossval", help="k-fold cross-validation")
    crossval.add_argument("--data", required=True)
    crossval.add_argument("--schema", required=True)
    crossval.add_argument("--config")
    crossval.add_argument("--folds", type=int, required=True)
    crossval.add_argument("--seed", type=int)
    crossval.add_argument("--workers", type=int)
    crossval.add_argument("--out", default="crossval_report.csv")
    crossval.add_argument("--manifest")
    crossval.set_defaults(func=cmd_crossval)

    bench_p = sub.add_parser("bench", help="speedup and scaling measurements")
    bench_p.add_argument("--data", required=True)
    bench_p.add_argument("--schema", required=True)
    bench_p.add_argument("--config-list", nargs="+", required=True, dest="config_list")
    bench_p.add_argument("--workers-list", default="1", dest="workers_list")
    bench_p.add_argument(
        "--scaling-sizes", nargs="+", type=int, default=[200, 400, 800], dest="scaling_sizes"
    )
    bench_p.add_argument("--seed", type=int)
    bench_p.add_argument("--out", default="bench_report.csv")
    bench_p.add_argument("--manifest")
    bench_p.set_defaults(func=cmd_bench)

    inspect = sub.add_parser("inspect", help="gain ratios and per-group DBI curves")
    inspect.add_argument("--data", required=True)
    inspect.add_argument("--schema", required=True)
    inspect.add_argument("--group-attr", type=int, dest="group_attr")
    inspect.add_argument("--k-max", type=int, default=8, dest="k_max")
    inspect.add_argument("--seed", type=int)
    inspect.add_argument("--manifest")
    inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"gkmnc {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _TRAIN_ERRORS as exc:
        print(f"gkmnc {args.command}: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except ValueError as exc:
        print(f"gkmnc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GkmncError as exc:
        print(f"gkmnc {args.command}: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except OSError as exc:
        print(f"gkmnc {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
