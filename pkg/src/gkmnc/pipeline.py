"""End-to-end orchestration: group by the best nominal attribute, normalize
per group, cluster each group (K picked by lowest Davies-Bouldin index),
normalize again per cluster, and train one classifier per leaf, in parallel.
Forecasting routes an example group -> nearest centroid -> leaf classifier.

Leaf training tasks are independent and seeded from (master seed, group
label, cluster index), so results are bit-identical no matter how many
workers run them.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from joblib import Parallel, delayed

from .dataset import (
    DataTable,
    NormalizationParams,
    Schema,
    apply_normalizer,
    fit_normalizer,
    split_folds,
)
from .errors import (
    EmptyData,
    EmptyValidation,
    KExceedsRows,
    MissingColumn,
    SchemaError,
    UnseenNominalLabel,
    ZeroTotal,
)
from .gpc import GpcModel, gpc_predict_prob_batch, gpc_train
from .infogain import GainRatioReport, compute_gain_report, partition_by_attribute
from .kmeans import ClusterModel, assign, kmeans_fit, select_k
from .mlp import MlpModel, mlp_classify_batch, mlp_train
from .optim import CgConfig, LineSearchConfig

UNIVERSAL_GROUP = "*"
HIDDEN_SEARCH = "search"


def derive_leaf_seed(seed: int, group_label: str, cluster_index: int | str) -> int:
    """Stable sub-seed for one leaf, independent of worker scheduling."""
    digest = hashlib.sha256(f"{seed}|{group_label}|{cluster_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class PipelineConfig:
    classifier_kind: str = "mlp"  # mlp | gpc
    grouping: int | str = "auto"  # auto | off | 1-based nominal attribute index
    gain_ratio_threshold: float = 0.01
    clustering: str = "auto"  # auto | off | fixed
    cluster_k: int | Mapping[str, int] | None = None  # used when clustering == fixed
    k_max: int = 8
    hidden_size: int | str = 3  # int or "search"
    hidden_candidates: tuple[int, ...] = tuple(range(1, 11))
    min_partition_rows: int = 50
    seed: int = 0
    worker_count: int = 1
    unseen_label_policy: str = "route_to_largest_group"  # or "error"
    gpc_size_cap: int = 3000
    optimize_hyperparams: bool = False
    kmeans_restarts: int = 10
    mlp_max_iterations: int = 500
    gpc_hyper_iterations: int = 100
    gradient_norm_tolerance: float = 1e-5
    line_search_step: float = 0.01
    line_search_tolerance: float = 0.01

    def __post_init__(self) -> None:
        if self.classifier_kind not in ("mlp", "gpc"):
            raise ValueError(f"classifier_kind must be mlp or gpc, got {self.classifier_kind!r}")
        if isinstance(self.grouping, str) and self.grouping not in ("auto", "off"):
            raise ValueError("grouping must be auto, off, or an attribute index")
        if self.clustering not in ("auto", "off", "fixed"):
            raise ValueError("clustering must be auto, off, or fixed")
        if self.clustering == "fixed" and self.cluster_k is None:
            raise ValueError("clustering=fixed requires cluster_k")
        if self.unseen_label_policy not in ("error", "route_to_largest_group"):
            raise ValueError(f"unknown unseen_label_policy {self.unseen_label_policy!r}")
        if self.gain_ratio_threshold <= 0:
            raise ValueError("gain_ratio_threshold must be positive")
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if isinstance(self.hidden_size, str) and self.hidden_size != HIDDEN_SEARCH:
            raise ValueError(f"hidden_size must be an integer or {HIDDEN_SEARCH!r}")

    def line_search(self) -> LineSearchConfig:
        return LineSearchConfig(step=self.line_search_step, tolerance=self.line_search_tolerance)

    def mlp_cg(self) -> CgConfig:
        return CgConfig(
            max_iterations=self.mlp_max_iterations,
            gradient_norm_tolerance=self.gradient_norm_tolerance,
        )

    def gpc_hyper_cg(self) -> CgConfig:
        return CgConfig(max_iterations=self.gpc_hyper_iterations, gradient_norm_tolerance=1e-3)


# --- config file parsing -----------------------------------------------------

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_cluster_k(text: str) -> int | dict[str, int]:
    if ":" not in text:
        return int(text)
    out: dict[str, int] = {}
    for part in text.split(","):
        label, _, k = part.partition(":")
        out[label.strip()] = int(k)
    return out


def config_from_mapping(values: Mapping[str, str]) -> PipelineConfig:
    """Build a PipelineConfig from string key-value pairs (config file or
    CLI overrides). Unknown keys are rejected."""
    kwargs: dict[str, object] = {}
    for key, raw in values.items():
        raw = raw.strip()
        if key == "grouping":
            kwargs[key] = raw if raw in ("auto", "off") else int(raw)
        elif key == "hidden_size":
            kwargs[key] = raw if raw == HIDDEN_SEARCH else int(raw)
        elif key == "cluster_k":
            kwargs[key] = _parse_cluster_k(raw)
        elif key == "hidden_candidates":
            kwargs[key] = tuple(int(v) for v in raw.replace(" ", "").split(","))
        elif key in ("classifier_kind", "clustering", "unseen_label_policy"):
            kwargs[key] = raw
        elif key == "optimize_hyperparams":
            if raw.lower() not in _BOOL_VALUES:
                raise ValueError(f"config: {key} must be a boolean, got {raw!r}")
            kwargs[key] = _BOOL_VALUES[raw.lower()]
        elif key in (
            "k_max",
            "min_partition_rows",
            "seed",
            "worker_count",
            "gpc_size_cap",
            "kmeans_restarts",
            "mlp_max_iterations",
            "gpc_hyper_iterations",
        ):
            kwargs[key] = int(raw)
        elif key in (
            "gain_ratio_threshold",
            "gradient_norm_tolerance",
            "line_search_step",
            "line_search_tolerance",
        ):
            kwargs[key] = float(raw)
        else:
            raise ValueError(f"config: unknown key {key!r}")
    return PipelineConfig(**kwargs)


def config_from_file(path) -> PipelineConfig:
    """Parse a plain key-value config file (``key = value`` lines)."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return config_from_mapping(values)


# --- model structure ---------------------------------------------------------


@dataclass(frozen=True)
class LeafNode:
    classifier: MlpModel | GpcModel
    training_row_count: int

    @property
    def leaf_normalizer(self) -> NormalizationParams:
        return self.classifier.normalizer


@dataclass(frozen=True)
class GroupNode:
    group_normalizer: NormalizationParams
    cluster_model: ClusterModel | None
    leaves: tuple[LeafNode, ...]
    training_row_count: int


@dataclass(frozen=True)
class GkmncModel:
    """The full trained artifact: routing structure plus leaf classifiers."""

    schema: Schema
    classifier_kind: str
    grouping_attribute: int | None  # 1-based feature index
    groups: dict[str, GroupNode]
    unseen_label_policy: str
    hidden_size: int | None  # shared MLP hidden size, None for gpc

    @property
    def grouping_attribute_name(self) -> str | None:
        if self.grouping_attribute is None:
            return None
        return self.schema.feature_by_index(self.grouping_attribute).name

    @property
    def model_name(self) -> str:
        """Notation: grouping attribute, per-group chosen K values in sorted
        group-label order, classifier kind. Examples: G1-[7,8,5,5]-GPC,
        G1-GPC (no clustering anywhere), Universal-MLP."""
        kind = self.classifier_kind.upper()
        parts: list[str] = []
        if self.grouping_attribute is not None:
            parts.append(f"G{self.grouping_attribute}")
        ks = [len(self.groups[label].leaves) for label in sorted(self.groups)]
        if any(k > 1 for k in ks):
            parts.append("[" + ",".join(str(k) for k in ks) + "]")
        if not parts:
            return f"Universal-{kind}"
        return "-".join(parts + [kind])

    def largest_group_label(self) -> str:
        return max(
            sorted(self.groups), key=lambda label: self.groups[label].training_row_count
        )

    def leaf_count(self) -> int:
        return sum(len(g.leaves) for g in self.groups.values())


@dataclass(frozen=True)
class GroupTrainInfo:
    label: str
    rows: int
    chosen_k: int
    dbi_curve: tuple[tuple[int, float], ...]
    clustering_skipped_reason: str = ""


@dataclass(frozen=True)
class TrainReport:
    model_name: str
    grouping_attribute: int | None
    gain_report: GainRatioReport | None
    groups: tuple[GroupTrainInfo, ...]
    hidden_size: int | None
    hidden_search: dict[int, float] | None
    leaf_rows: dict[tuple[str, int], int]
    leaf_seconds: dict[tuple[str, int], float]
    phase_seconds: dict[str, float]

    def cluster_table_text(self) -> str:
        """Per-group DBI curves: group, k, dbi, selected flag."""
        lines = ["group,k,dbi,selected"]
        for info in self.groups:
            for k, dbi in info.dbi_curve:
                sel = "1" if k == info.chosen_k else ""
                lines.append(f"{info.label},{k},{dbi:.6f},{sel}")
            if not info.dbi_curve:
                lines.append(f"{info.label},1,,1")
        return "\n".join(lines) + "\n"

    def leaf_table_text(self) -> str:
        lines = ["group,cluster,rows"]
        for (label, idx), rows in sorted(self.leaf_rows.items()):
            lines.append(f"{label},{idx},{rows}")
        return "\n".join(lines) + "\n"


# --- training ----------------------------------------------------------------


@dataclass(frozen=True)
class _LeafTask:
    group_label: str
    cluster_index: int
    features: np.ndarray
    targets: np.ndarray
    sub_seed: int


@dataclass(frozen=True)
class _GroupPlan:
    label: str
    table: DataTable
    normalizer: NormalizationParams
    cluster_model: ClusterModel | None
    dbi_curve: tuple[tuple[int, float], ...]
    skip_reason: str


def _train_leaf(task: _LeafTask, cfg: PipelineConfig, hidden_size: int):
    start = time.perf_counter()
    if cfg.classifier_kind == "mlp":
        clf = mlp_train(
            task.features,
            task.targets,
            hidden_size,
            task.sub_seed,
            cg=cfg.mlp_cg(),
            ls=cfg.line_search(),
        )
    else:
        clf = gpc_train(
            task.features,
            task.targets,
            seed=task.sub_seed,
            optimize_hyperparams=cfg.optimize_hyperparams,
            cg=cfg.gpc_hyper_cg(),
            ls=cfg.line_search(),
            size_cap=cfg.gpc_size_cap,
        )
    return clf, time.perf_counter() - start


def _resolve_grouping(train: DataTable, cfg: PipelineConfig):
    gain_report = None
    if train.schema.nominal_indices():
        gain_report = compute_gain_report(train)
    if cfg.grouping == "off":
        return None, gain_report
    if cfg.grouping == "auto":
        if gain_report is None:
            return None, None
        ranked = gain_report.ranked()
        if not ranked or ranked[0].gain_ratio <= cfg.gain_ratio_threshold:
            return None, gain_report
        return ranked[0].attribute_index, gain_report
    index = int(cfg.grouping)
    attr = train.schema.feature_by_index(index)
    if attr.kind.value != "nominal":
        raise SchemaError(f"grouping attribute {index} ({attr.name}) is not nominal")
    return index, gain_report


def _fixed_k_for(cfg: PipelineConfig, label: str) -> int:
    if isinstance(cfg.cluster_k, Mapping):
        return int(cfg.cluster_k.get(label, 1))
    return int(cfg.cluster_k)


def _plan_group(label: str, table: DataTable, cfg: PipelineConfig) -> _GroupPlan:
    normalizer = fit_normalizer(table.numeric)
    cluster_model = None
    curve: tuple[tuple[int, float], ...] = ()
    skip = ""
    if cfg.clustering == "off":
        skip = "clustering off"
    elif cfg.clustering == "fixed":
        k = _fixed_k_for(cfg, label)
        if k > 1:
            xn = apply_normalizer(normalizer, table.numeric)
            cluster_model = kmeans_fit(
                xn, k, derive_leaf_seed(cfg.seed, label, "kmeans"), cfg.kmeans_restarts
            )
        else:
            skip = "fixed k=1"
    else:  # auto
        if table.n_rows < cfg.min_partition_rows:
            skip = f"group has {table.n_rows} rows, below min_partition_rows={cfg.min_partition_rows}"
        else:
            k_max = min(cfg.k_max, table.n_rows)
            xn = apply_normalizer(normalizer, table.numeric)
            try:
                chosen, dbi_curve = select_k(
                    xn, k_max, derive_leaf_seed(cfg.seed, label, "kmeans"), cfg.kmeans_restarts
                )
                curve = tuple(dbi_curve)
                dbis = [d for _, d in dbi_curve]
                at_boundary = int(np.argmin(dbis)) == len(dbis) - 1
                strictly_decreasing = all(b < a for a, b in zip(dbis, dbis[1:]))
                if len(dbis) >= 2 and at_boundary and strictly_decreasing:
                    skip = "tight group: DBI still decreasing at k_max, no interior minimum"
                else:
                    cluster_model = chosen
            except KExceedsRows:
                skip = "tight group: too few distinct points to cluster"
    return _GroupPlan(
        label=label,
        table=table,
        normalizer=normalizer,
        cluster_model=cluster_model,
        dbi_curve=curve,
        skip_reason=skip,
    )


def _build_structure(train: DataTable, cfg: PipelineConfig):
    grouping_attribute, gain_report = _resolve_grouping(train, cfg)
    if grouping_attribute is not None:
        tables = partition_by_attribute(train, grouping_attribute)
    else:
        tables = {UNIVERSAL_GROUP: train}
    plans = {label: _plan_group(label, tables[label], cfg) for label in sorted(tables)}
    return grouping_attribute, gain_report, plans


def _leaf_tasks(plans: dict[str, _GroupPlan], cfg: PipelineConfig) -> list[_LeafTask]:
    tasks = []
    for label in sorted(plans):
        plan = plans[label]
        y = plan.table.targets
        if plan.cluster_model is not None:
            xn = apply_normalizer(plan.normalizer, plan.table.numeric)
            for idx in range(plan.cluster_model.k):
                members = plan.cluster_model.assignments == idx
                tasks.append(
                    _LeafTask(
                        group_label=label,
                        cluster_index=idx,
                        features=xn[members],
                        targets=y[members],
                        sub_seed=derive_leaf_seed(cfg.seed, label, idx),
                    )
                )
        else:
            # no cluster stage: the classifier's own normalizer provides the
            # single normalization pass for this group
            tasks.append(
                _LeafTask(
                    group_label=label,
                    cluster_index=0,
                    features=plan.table.numeric,
                    targets=y,
                    sub_seed=derive_leaf_seed(cfg.seed, label, 0),
                )
            )
    return tasks


def _run_tasks(tasks: list[_LeafTask], cfg: PipelineConfig, hidden_size: int):
    if cfg.worker_count == 1:
        results = []
        for task in tasks:
            try:
                results.append(_train_leaf(task, cfg, hidden_size))
            except Exception as exc:
                raise exc.__class__(
                    f"leaf (group={task.group_label!r}, cluster={task.cluster_index}): {exc}"
                ) from exc
        return results
    try:
        return Parallel(n_jobs=cfg.worker_count)(
            delayed(_train_leaf)(task, cfg, hidden_size) for task in tasks
        )
    except Exception as exc:
        raise exc.__class__(f"leaf training failed: {exc}") from exc


def _assemble(
    train: DataTable,
    cfg: PipelineConfig,
    grouping_attribute: int | None,
    plans: dict[str, _GroupPlan],
    hidden_size: int | None,
) -> tuple[GkmncModel, dict[tuple[str, int], int], dict[tuple[str, int], float]]:
    tasks = _leaf_tasks(plans, cfg)
    results = _run_tasks(tasks, cfg, hidden_size if hidden_size is not None else 1)
    leaves_by_group: dict[str, list[LeafNode]] = {label: [] for label in plans}
    leaf_rows: dict[tuple[str, int], int] = {}
    leaf_seconds: dict[tuple[str, int], float] = {}
    for task, (clf, seconds) in zip(tasks, results):
        leaves_by_group[task.group_label].append(
            LeafNode(classifier=clf, training_row_count=len(task.targets))
        )
        leaf_rows[(task.group_label, task.cluster_index)] = len(task.targets)
        leaf_seconds[(task.group_label, task.cluster_index)] = seconds
    groups = {
        label: GroupNode(
            group_normalizer=plan.normalizer,
            cluster_model=plan.cluster_model,
            leaves=tuple(leaves_by_group[label]),
            training_row_count=plan.table.n_rows,
        )
        for label, plan in plans.items()
    }
    model = GkmncModel(
        schema=train.schema,
        classifier_kind=cfg.classifier_kind,
        grouping_attribute=grouping_attribute,
        groups=groups,
        unseen_label_policy=cfg.unseen_label_policy,
        hidden_size=hidden_size if cfg.classifier_kind == "mlp" else None,
    )
    return model, leaf_rows, leaf_seconds


def train_gkmnc(
    train: DataTable,
    validation: DataTable | None = None,
    config: PipelineConfig | None = None,
) -> tuple[GkmncModel, TrainReport]:
    """Train the full grouped / clustered model.

    With classifier_kind=mlp and hidden_size="search", one hidden size is
    searched per run and shared across all groups and clusters: each
    candidate trains the complete leaf set and the size with the best
    validation accuracy wins (ties to the smaller size). Without an explicit
    validation table the search scores candidates on an internal 80/20
    holdout, then retrains on the full data at the winning size.
    """
    cfg = config or PipelineConfig()
    if train.n_rows == 0:
        raise EmptyData("training table is empty")
    if train.targets is None:
        raise EmptyData("training table carries no targets")

    t0 = time.perf_counter()
    grouping_attribute, gain_report, plans = _build_structure(train, cfg)
    t_structure = time.perf_counter() - t0

    hidden_search: dict[int, float] | None = None
    if cfg.classifier_kind == "mlp" and cfg.hidden_size == HIDDEN_SEARCH:
        if validation is not None:
            hidden_search = {}
            best: tuple[GkmncModel, dict, dict] | None = None
            best_size = None
            for size in cfg.hidden_candidates:
                candidate = _assemble(train, cfg, grouping_attribute, plans, size)
                acc = evaluate(candidate[0], validation).overall_accuracy
                hidden_search[size] = acc
                if best_size is None or acc > hidden_search[best_size] or (
                    acc == hidden_search[best_size] and size < best_size
                ):
                    best, best_size = candidate, size
            model, leaf_rows, leaf_seconds = best
            hidden = best_size
        else:
            holdout = split_folds(train, 5, cfg.seed)[0]
            sub_attr, _, sub_plans = _build_structure(holdout.train, cfg)
            hidden_search = {}
            for size in cfg.hidden_candidates:
                candidate_model, _, _ = _assemble(holdout.train, cfg, sub_attr, sub_plans, size)
                hidden_search[size] = evaluate(candidate_model, holdout.validation).overall_accuracy
            hidden = min(sorted(hidden_search), key=lambda s: (-hidden_search[s], s))
            model, leaf_rows, leaf_seconds = _assemble(
                train, cfg, grouping_attribute, plans, hidden
            )
    else:
        hidden = cfg.hidden_size if cfg.classifier_kind == "mlp" else None
        model, leaf_rows, leaf_seconds = _assemble(
            train, cfg, grouping_attribute, plans, hidden
        )
    t_total = time.perf_counter() - t0

    report = TrainReport(
        model_name=model.model_name,
        grouping_attribute=grouping_attribute,
        gain_report=gain_report,
        groups=tuple(
            GroupTrainInfo(
                label=label,
                rows=plan.table.n_rows,
                chosen_k=plan.cluster_model.k if plan.cluster_model else 1,
                dbi_curve=plan.dbi_curve,
                clustering_skipped_reason=plan.skip_reason,
            )
            for label, plan in plans.items()
        ),
        hidden_size=hidden,
        hidden_search=hidden_search,
        leaf_rows=leaf_rows,
        leaf_seconds=leaf_seconds,
        phase_seconds={
            "structure": t_structure,
            "leaf_training": t_total - t_structure,
            "total": t_total,
        },
    )
    return model, report


# --- forecast and evaluation ---------------------------------------------------


@dataclass(frozen=True)
class ForecastResult:
    klass: int  # +1 or -1
    probability: float | None  # class +1 probability; None for MLP leaves
    group_label: str
    cluster_index: int
    unseen_label: bool = False


def _numeric_vector(model: GkmncModel, record: Mapping[str, object]) -> np.ndarray:
    try:
        return np.array([float(record[name]) for name in model.schema.numeric_names])
    except KeyError as exc:
        raise MissingColumn(f"record lacks numeric attribute {exc.args[0]!r}") from None


def _route_group(model: GkmncModel, record: Mapping[str, object]) -> tuple[str, bool]:
    if model.grouping_attribute is None:
        return UNIVERSAL_GROUP, False
    name = model.grouping_attribute_name
    try:
        label = str(record[name])
    except KeyError:
        raise MissingColumn(f"record lacks grouping attribute {name!r}") from None
    if label in model.groups:
        return label, False
    if model.unseen_label_policy == "error":
        raise UnseenNominalLabel(
            f"label {label!r} of attribute {name!r} never appeared in training"
        )
    return model.largest_group_label(), True


def forecast(model: GkmncModel, record: Mapping[str, object]) -> ForecastResult:
    """Classify one raw record: route to its nominal group, normalize with
    the group scheme, route to the nearest centroid, normalize with the leaf
    scheme, and run the leaf classifier."""
    x = _numeric_vector(model, record)
    label, unseen = _route_group(model, record)
    node = model.groups[label]
    if node.cluster_model is not None:
        xg = apply_normalizer(node.group_normalizer, x)
        idx = assign(node.cluster_model.centroids, xg)
        leaf_input = xg
    else:
        idx = 0
        leaf_input = x
    leaf = node.leaves[idx]
    if model.classifier_kind == "gpc":
        prob = float(gpc_predict_prob_batch(leaf.classifier, leaf_input[None, :])[0])
        klass = 1 if prob > 0.5 else -1
        return ForecastResult(klass, prob, label, idx, unseen)
    klass = int(mlp_classify_batch(leaf.classifier, leaf_input[None, :])[0])
    return ForecastResult(klass, None, label, idx, unseen)


def forecast_table(model: GkmncModel, table: DataTable) -> list[ForecastResult]:
    """Vectorized forecast of a whole table (batched per leaf)."""
    n = table.n_rows
    if model.grouping_attribute is None:
        labels = np.full(n, UNIVERSAL_GROUP, dtype=object)
        unseen = np.zeros(n, dtype=bool)
    else:
        labels = table.nominal_column(model.grouping_attribute).copy()
        known = set(model.groups)
        unseen = np.array([lab not in known for lab in labels])
        if unseen.any():
            if model.unseen_label_policy == "error":
                bad = sorted({str(lab) for lab in labels[unseen]})
                raise UnseenNominalLabel(
                    f"labels {bad} of attribute {model.grouping_attribute_name!r} "
                    "never appeared in training"
                )
            labels[unseen] = model.largest_group_label()

    klass = np.zeros(n, dtype=int)
    prob: np.ndarray | None = (
        np.zeros(n, dtype=float) if model.classifier_kind == "gpc" else None
    )
    cluster_idx = np.zeros(n, dtype=int)
    for label, node in model.groups.items():
        mask = labels == label
        if not mask.any():
            continue
        x = table.numeric[mask]
        if node.cluster_model is not None:
            xg = apply_normalizer(node.group_normalizer, x)
            d2 = ((xg[:, None, :] - node.cluster_model.centroids[None, :, :]) ** 2).sum(axis=2)
            idx = np.argmin(d2, axis=1)
            leaf_input = xg
        else:
            idx = np.zeros(x.shape[0], dtype=int)
            leaf_input = x
        cluster_idx[mask] = idx
        rows = np.flatnonzero(mask)
        for leaf_no, leaf in enumerate(node.leaves):
            sel = idx == leaf_no
            if not sel.any():
                continue
            if model.classifier_kind == "gpc":
                p = gpc_predict_prob_batch(leaf.classifier, leaf_input[sel])
                prob[rows[sel]] = p
                klass[rows[sel]] = np.where(p > 0.5, 1, -1)
            else:
                klass[rows[sel]] = mlp_classify_batch(leaf.classifier, leaf_input[sel])
    return [
        ForecastResult(
            klass=int(klass[i]),
            probability=None if prob is None else float(prob[i]),
            group_label=str(labels[i]),
            cluster_index=int(cluster_idx[i]),
            unseen_label=bool(unseen[i]),
        )
        for i in range(n)
    ]


@dataclass(frozen=True)
class EvaluationReport:
    overall_accuracy: float
    n: int
    true_positive: int
    true_negative: int
    false_positive: int
    false_negative: int
    per_group: tuple[tuple[str, int, float], ...]
    per_leaf: tuple[tuple[str, int, int, float], ...]

    def to_table_text(self) -> str:
        lines = ["group,cluster,n,accuracy"]
        for label, idx, count, acc in self.per_leaf:
            lines.append(f"{label},{idx},{count},{acc:.6f}")
        lines.append(f"overall,,{self.n},{self.overall_accuracy:.6f}")
        return "\n".join(lines) + "\n"


def evaluate(model: GkmncModel, validation: DataTable) -> EvaluationReport:
    """Accuracy (correct / n) overall and per group / leaf, with confusion
    counts. The overall value equals the count-weighted mean of the
    per-group accuracies by construction."""
    if validation.n_rows == 0:
        raise EmptyValidation("validation table is empty")
    if validation.targets is None:
        raise EmptyValidation("validation table carries no targets")
    results = forecast_table(model, validation)
    predicted = np.array([r.klass for r in results])
    y = validation.targets
    correct = predicted == y

    tp = int(np.sum((predicted == 1) & (y == 1)))
    tn = int(np.sum((predicted == -1) & (y == -1)))
    fp = int(np.sum((predicted == 1) & (y == -1)))
    fn = int(np.sum((predicted == -1) & (y == 1)))

    group_labels = np.array([r.group_label for r in results], dtype=object)
    cluster_ids = np.array([r.cluster_index for r in results])
    per_group = []
    per_leaf = []
    for label in sorted(set(group_labels.tolist())):
        mask = group_labels == label
        per_group.append((label, int(mask.sum()), float(correct[mask].mean())))
        for idx in sorted(set(cluster_ids[mask].tolist())):
            sel = mask & (cluster_ids == idx)
            per_leaf.append((label, idx, int(sel.sum()), float(correct[sel].mean())))
    return EvaluationReport(
        overall_accuracy=float(correct.mean()),
        n=validation.n_rows,
        true_positive=tp,
        true_negative=tn,
        false_positive=fp,
        false_negative=fn,
        per_group=tuple(per_group),
        per_leaf=tuple(per_leaf),
    )


def aggregate_accuracy(parts: Sequence[tuple[int, float]]) -> float:
    """Example-count-weighted mean accuracy: sum(n_i * acc_i) / sum(n_i)."""
    total = 0
    weighted = 0.0
    for n, acc in parts:
        if n < 0:
            raise ValueError(f"negative count {n}")
        if not 0.0 <= acc <= 1.0:
            raise ValueError(f"accuracy {acc} outside [0, 1]")
        total += n
        weighted += n * acc
    if total == 0:
        raise ZeroTotal("aggregate over zero examples")
    return weighted / total


@dataclass(frozen=True)
class FoldResult:
    fold_index: int
    model_name: str
    evaluation: EvaluationReport


@dataclass(frozen=True)
class CrossValReport:
    folds: tuple[FoldResult, ...]
    mean_accuracy: float
    mean_gain_ratios: dict[int, float]  # per nominal attribute, over training folds

    def to_table_text(self) -> str:
        lines = ["fold,model,n,accuracy"]
        for f in self.folds:
            lines.append(
                f"{f.fold_index},{f.model_name},{f.evaluation.n},{f.evaluation.overall_accuracy:.6f}"
            )
        lines.append(f"mean,,,{self.mean_accuracy:.6f}")
        return "\n".join(lines) + "\n"

    def gain_table_text(self) -> str:
        lines = ["attribute,mean_gain_ratio"]
        for idx in sorted(self.mean_gain_ratios):
            lines.append(f"{idx},{self.mean_gain_ratios[idx]:.6f}")
        return "\n".join(lines) + "\n"


def cross_validate(
    table: DataTable, folds: int, config: PipelineConfig | None = None
) -> CrossValReport:
    """Train and evaluate once per fold; reports per-fold accuracy, the
    unweighted mean across folds, and the fold-mean gain ratio of every
    nominal attribute. Deterministic for a fixed config seed."""
    cfg = config or PipelineConfig()
    results = []
    gain_sums: dict[int, list[float]] = {}
    for split in split_folds(table, folds, cfg.seed):
        model, train_report = train_gkmnc(split.train, None, cfg)
        if train_report.gain_report is not None:
            for entry in train_report.gain_report.entries:
                if not entry.excluded:
                    gain_sums.setdefault(entry.attribute_index, []).append(entry.gain_ratio)
        results.append(
            FoldResult(
                fold_index=split.fold_index,
                model_name=model.model_name,
                evaluation=evaluate(model, split.validation),
            )
        )
    mean = float(np.mean([r.evaluation.overall_accuracy for r in results]))
    return CrossValReport(
        folds=tuple(results),
        mean_accuracy=mean,
        mean_gain_ratios={idx: float(np.mean(vals)) for idx, vals in gain_sums.items()},
    )
