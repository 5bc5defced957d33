"""Wall-clock measurements: training-time scaling in the partition size and
multi-worker speedup of partitioned training.

Scaling runs pin the BLAS thread pools to one thread (when threadpoolctl is
available) so the fitted log-log slope reflects the algorithm, not thread
scheduling. Absolute times are machine-dependent and never asserted;
only orderings and slopes are meaningful.
"""

from __future__ import annotations

import time
from contextlib import nullcontext
from dataclasses import dataclass, replace

import numpy as np

from .dataset import DataTable
from .gpc import gpc_train
from .mlp import mlp_train
from .optim import CgConfig, LineSearchConfig
from .pipeline import PipelineConfig, train_gkmnc

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


def _single_threaded_blas():
    if threadpool_limits is None:
        return nullcontext()
    return threadpool_limits(limits=1)


def _synthetic_problem(n_rows: int, n_features: int, seed: int):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_rows, n_features))
    y = np.where(x[:, 0] + 0.5 * rng.standard_normal(n_rows) > 0, 1, -1)
    if len(np.unique(y)) == 1:  # keep both classes present
        y[0] = -y[0]
    return x, y


def time_classifier_training(
    kind: str, n_rows: int, n_features: int = 5, seed: int = 0, repeats: int = 3
) -> float:
    """Best-of-repeats wall time of one classifier fit on synthetic data.

    MLP runs a fixed iteration budget so its cost is proportional to the
    row count; GPC runs its normal Newton iteration.
    """
    x, y = _synthetic_problem(n_rows, n_features, seed)
    best = np.inf
    with _single_threaded_blas():
        for _ in range(repeats):
            start = time.perf_counter()
            if kind == "mlp":
                mlp_train(
                    x,
                    y,
                    hidden_size=5,
                    seed=seed,
                    cg=CgConfig(max_iterations=30, gradient_norm_tolerance=1e-12),
                    ls=LineSearchConfig(),
                )
            else:
                gpc_train(x, y, seed=seed, size_cap=max(n_rows, 3000))
            best = min(best, time.perf_counter() - start)
    return float(best)


def scaling_slope(
    kind: str,
    sizes: tuple[int, ...] = (200, 400, 800),
    n_features: int = 5,
    seed: int = 0,
    repeats: int = 3,
) -> tuple[float, dict[int, float]]:
    """Least-squares slope of log(training time) against log(partition size)."""
    times = {n: time_classifier_training(kind, n, n_features, seed, repeats) for n in sizes}
    slope = float(
        np.polyfit(np.log(list(times.keys())), np.log(list(times.values())), 1)[0]
    )
    return slope, times


@dataclass(frozen=True)
class SpeedupRow:
    model_name: str
    leaf_count: int
    workers: int
    avg_seconds_per_leaf: float
    total_wall_seconds: float


def measure_speedup(
    train: DataTable, config: PipelineConfig, workers_list: tuple[int, ...]
) -> list[SpeedupRow]:
    """Train the same model at each worker count, recording total wall time
    and the mean per-leaf time measured inside the workers. The process pool
    is warmed first so worker startup is not billed to the first parallel run."""
    from joblib import Parallel, delayed

    if any(w > 1 for w in workers_list):
        Parallel(n_jobs=max(workers_list))(delayed(abs)(i) for i in range(max(workers_list)))
    rows = []
    for workers in workers_list:
        cfg_w = replace(config, worker_count=workers)
        start = time.perf_counter()
        model, report = train_gkmnc(train, None, cfg_w)
        wall = time.perf_counter() - start
        leaf_times = list(report.leaf_seconds.values())
        rows.append(
            SpeedupRow(
                model_name=model.model_name,
                leaf_count=model.leaf_count(),
                workers=workers,
                avg_seconds_per_leaf=float(np.mean(leaf_times)),
                total_wall_seconds=wall,
            )
        )
    return rows
