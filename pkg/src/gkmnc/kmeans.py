"""Lloyd k-means over normalized numeric rows, Davies-Bouldin cluster
validity, K selection by lowest DBI, and nearest-centroid assignment for
forecast routing.

Initialization draws k distinct rows with a seeded generator and keeps the
lowest-SSE restart. Returned centroids are sorted lexicographically so
reports and downstream leaf numbering are order-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, EmptyCentroidList, KExceedsRows, SingleCluster

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True)
class ClusterModel:
    """A fitted clustering: centroids live in the (normalized) feature space
    of the rows they were fitted on and are persisted for forecast routing."""

    k: int
    centroids: np.ndarray  # (k, d)
    assignments: np.ndarray  # (n,) cluster index per training row
    within_cluster_sse: float
    dbi: float | None  # None when k == 1
    sse_trace: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        self.centroids.setflags(write=False)
        self.assignments.setflags(write=False)


def assign(centroids: np.ndarray, point: np.ndarray) -> int:
    """Index of the closest centroid by Euclidean distance, ties toward the
    lowest index."""
    centroids = np.asarray(centroids, dtype=float)
    if centroids.size == 0:
        raise EmptyCentroidList("no centroids to assign against")
    point = np.asarray(point, dtype=float).ravel()
    if point.shape[0] != centroids.shape[1]:
        raise DimensionMismatch(
            f"point has {point.shape[0]} features, centroids have {centroids.shape[1]}"
        )
    return int(np.argmin(np.linalg.norm(centroids - point, axis=1)))


def _lloyd(rows: np.ndarray, init: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """One Lloyd run from given initial centroids. Returns centroids,
    assignments, SSE, and the per-iteration SSE trace (non-increasing)."""
    centroids = init.copy()
    assignments = np.full(rows.shape[0], -1, dtype=int)
    trace: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = cdist(rows, centroids, metric="sqeuclidean")
        new_assignments = np.argmin(d2, axis=1)

        # empty-cluster repair: promote the point farthest from its centroid
        counts = np.bincount(new_assignments, minlength=k)
        if (counts == 0).any():
            dist_to_own = d2[np.arange(rows.shape[0]), new_assignments].copy()
            for j in np.flatnonzero(counts == 0):
                far = int(np.argmax(dist_to_own))
                centroids[j] = rows[far]
                new_assignments[far] = j
                dist_to_own[far] = -1.0
            d2 = cdist(rows, centroids, metric="sqeuclidean")
            new_assignments = np.argmin(d2, axis=1)

        converged = np.array_equal(new_assignments, assignments)
        assignments = new_assignments
        for j in range(k):
            members = rows[assignments == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
        sse = float(
            np.sum((rows - centroids[assignments]) ** 2)
        )
        trace.append(sse)
        if converged:
            break
    return centroids, assignments, trace[-1], trace


def kmeans_fit(rows: np.ndarray, k: int, seed: int, restarts: int = 10) -> ClusterModel:
    """Fit k-means by Lloyd iteration with `restarts` seeded starts, keeping
    the lowest-SSE run. Deterministic for a fixed seed; initial centroids are
    drawn from the sorted distinct rows so the result does not depend on the
    input row order."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        rows = rows.reshape(len(rows), -1)
    if k < 1:
        raise KExceedsRows(f"k must be >= 1, got {k}")
    if k > rows.shape[0]:
        raise KExceedsRows(f"k={k} exceeds {rows.shape[0]} rows")
    distinct = np.unique(rows, axis=0)
    if k > distinct.shape[0]:
        raise KExceedsRows(f"k={k} exceeds {distinct.shape[0]} distinct points")

    if k == 1:
        centroid = rows.mean(axis=0, keepdims=True)
        sse = float(np.sum((rows - centroid) ** 2))
        return ClusterModel(
            k=1,
            centroids=centroid,
            assignments=np.zeros(rows.shape[0], dtype=int),
            within_cluster_sse=sse,
            dbi=None,
            sse_trace=(sse,),
        )

    rng = np.random.default_rng(seed)
    best: tuple[np.ndarray, np.ndarray, float, list[float]] | None = None
    for _ in range(max(restarts, 1)):
        init = distinct[rng.choice(distinct.shape[0], size=k, replace=False)]
        result = _lloyd(rows, init, k)
        if best is None or result[2] < best[2]:
            best = result
    centroids, assignments, sse, trace = best

    # canonical ordering: lexicographic by coordinates
    order = np.lexsort(centroids.T[::-1])
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    model = ClusterModel(
        k=k,
        centroids=centroids[order],
        assignments=remap[assignments],
        within_cluster_sse=sse,
        dbi=None,
        sse_trace=tuple(trace),
    )
    return ClusterModel(
        k=k,
        centroids=model.centroids,
        assignments=model.assignments,
        within_cluster_sse=sse,
        dbi=davies_bouldin(rows, model),
        sse_trace=tuple(trace),
    )


def davies_bouldin(rows: np.ndarray, model: ClusterModel) -> float:
    """Davies-Bouldin index: mean over clusters of the worst ratio
    (S_i + S_j) / M_ij, with S the mean member-to-centroid distance and M
    the centroid separation. Lower is better; undefined for k = 1."""
    if model.k < 2:
        raise SingleCluster("Davies-Bouldin needs at least 2 clusters")
    rows = np.asarray(rows, dtype=float)
    scatter = np.empty(model.k)
    for j in range(model.k):
        members = rows[model.assignments == j]
        scatter[j] = float(np.linalg.norm(members - model.centroids[j], axis=1).mean())
    separation = cdist(model.centroids, model.centroids)
    worst = np.zeros(model.k)
    for i in range(model.k):
        ratios = [
            (scatter[i] + scatter[j]) / separation[i, j]
            for j in range(model.k)
            if j != i and separation[i, j] > 0
        ]
        worst[i] = max(ratios) if ratios else np.inf
    return float(worst.mean())


def select_k(
    rows: np.ndarray, k_max: int, seed: int, restarts: int = 10
) -> tuple[ClusterModel, list[tuple[int, float]]]:
    """Fit k = 2..k_max and return the model with the lowest DBI plus the
    full (k, dbi) curve. Ties break toward the smaller k. Whether k = 1
    (no clustering) is preferable is the caller's policy decision."""
    if k_max < 2:
        raise KExceedsRows(f"k_max must be >= 2, got {k_max}")
    rows = np.asarray(rows, dtype=float)
    if k_max > rows.shape[0]:
        raise KExceedsRows(f"k_max={k_max} exceeds {rows.shape[0]} rows")
    curve: list[tuple[int, float]] = []
    chosen: ClusterModel | None = None
    for k in range(2, k_max + 1):
        model = kmeans_fit(rows, k, seed, restarts)
        curve.append((k, model.dbi))
        if chosen is None or model.dbi < chosen.dbi:
            chosen = model
    return chosen, curve
