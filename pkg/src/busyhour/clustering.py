"""k-means over weekly signatures with silhouette-based model selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .series import HourlyTrace
from .signatures import WeeklySignature

MAX_LLOYD_ITERATIONS = 300
DEFAULT_RESTARTS = 10
WEAK_STRUCTURE_SILHOUETTE = 0.3


@dataclass
class ClusterModel:
    """Fitted clustering: treat as immutable once traffic shares are attached."""

    k: int
    centroids: np.ndarray  # (k, 168)
    assignments: dict[str, int]
    per_cell_silhouette: dict[str, float]
    inertia: float
    seed: int
    labels: dict[int, str] | None = None
    traffic_share: np.ndarray | None = None

    def members(self, cluster: int) -> list[str]:
        return sorted(c for c, a in self.assignments.items() if a == cluster)

    def active_clusters(self, min_share: float = 0.0) -> list[int]:
        """Cluster indices whose traffic share is at least ``min_share``.

        Shares must have been attached by :func:`served_traffic_share`
        when a positive threshold is requested.
        """
        if min_share > 0 and self.traffic_share is None:
            raise ValueError("traffic shares not computed; call served_traffic_share first")
        if self.traffic_share is None:
            return list(range(self.k))
        return [c for c in range(self.k) if self.traffic_share[c] >= min_share]

    def mean_silhouette(self) -> float:
        return float(np.mean(list(self.per_cell_silhouette.values())))


def _signature_matrix(signatures: list[WeeklySignature]) -> tuple[np.ndarray, list[str]]:
    sigs = sorted(signatures, key=lambda s: s.cell_id)
    ids = [s.cell_id for s in sigs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate cell ids in signature set")
    return np.stack([s.values for s in sigs]), ids


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = np.sum((X - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = X[rng.integers(n)]
            continue
        centroids[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((X - centroids[j]) ** 2, axis=1))
    return centroids


def _lloyd(X: np.ndarray, centroids: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray, float]:
    k = centroids.shape[0]
    assign = np.full(X.shape[0], -1)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        # an emptied cluster takes over the point farthest from its centroid
        for j in range(k):
            if not np.any(new_assign == j):
                worst = int(np.argmax(d2[np.arange(X.shape[0]), new_assign]))
                new_assign[worst] = j
                d2[worst, :] = 0.0
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            centroids[j] = X[assign == j].mean(axis=0)
    d2 = ((X - centroids[assign]) ** 2).sum(axis=1)
    return assign, centroids, float(d2.sum())


def kmeans(
    signatures: list[WeeklySignature],
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = MAX_LLOYD_ITERATIONS,
) -> ClusterModel:
    """Best of ``restarts`` k-means++ initializations by within-cluster sum of squares.

    Deterministic for fixed (signatures, k, seed, restarts); silhouettes
    are attached for k >= 2 and are zero for the single-cluster fallback.
    """
    X, ids = _signature_matrix(signatures)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and the number of signatures ({n}), got {k}")
    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, k, r])
        init = _kmeanspp_init(X, k, rng)
        assign, centroids, inertia = _lloyd(X, init.copy(), max_iter)
        if best is None or inertia < best[0]:
            best = (inertia, r, assign, centroids)
    inertia, _, assign, centroids = best
    model = ClusterModel(
        k=k,
        centroids=centroids,
        assignments={cid: int(a) for cid, a in zip(ids, assign)},
        per_cell_silhouette={cid: 0.0 for cid in ids},
        inertia=inertia,
        seed=seed,
    )
    if k >= 2:
        per_cell, _mean = silhouette(model, signatures)
        model.per_cell_silhouette = per_cell
    return model


def silhouette(
    model: ClusterModel, signatures: list[WeeklySignature]
) -> tuple[dict[str, float], float]:
    """Euclidean silhouette per cell and its mean; cells in singleton clusters score 0."""
    if model.k < 2:
        raise ValueError("silhouette is undefined for a single cluster")
    X, ids = _signature_matrix(signatures)
    assign = np.array([model.assignments[cid] for cid in ids])
    n = X.shape[0]
    dist = np.sqrt(np.maximum(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2), 0.0))
    sizes = np.bincount(assign, minlength=model.k)
    out: dict[str, float] = {}
    for i in range(n):
        own = assign[i]
        if sizes[own] <= 1:
            out[ids[i]] = 0.0
            continue
        a = dist[i, assign == own].sum() / (sizes[own] - 1)
        b = np.inf
        for j in range(model.k):
            if j == own or sizes[j] == 0:
                continue
            b = min(b, dist[i, assign == j].mean())
        denom = max(a, b)
        out[ids[i]] = float((b - a) / denom) if denom > 0 else 0.0
    return out, float(np.mean(list(out.values())))


@dataclass(frozen=True)
class KSelection:
    best_k: int
    scores: dict[int, float]
    weak_structure: bool
    model: ClusterModel


def select_k(
    signatures: list[WeeklySignature],
    k_range: range = range(2, 11),
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> KSelection:
    """Grid search over k maximizing the mean silhouette.

    The full score table is returned for reporting; a best mean below
    0.3 flags the configuration as weak structure.
    """
    n = len(signatures)
    if n < 3:
        raise ValueError("need at least three signatures to choose a cluster count")
    scores: dict[int, float] = {}
    models: dict[int, ClusterModel] = {}
    for k in k_range:
        if k < 2 or k > n - 1:
            continue
        model = kmeans(signatures, k, seed=seed, restarts=restarts)
        models[k] = model
        scores[k] = model.mean_silhouette()
    if not scores:
        raise ValueError("no feasible k in the requested range")
    best_k = max(scores, key=lambda k: (scores[k], -k))
    return KSelection(
        best_k=best_k,
        scores=scores,
        weak_structure=scores[best_k] < WEAK_STRUCTURE_SILHOUETTE,
        model=models[best_k],
    )


def served_traffic_share(
    model: ClusterModel,
    traces: list[HourlyTrace],
    window: tuple[datetime, datetime] | None = None,
) -> np.ndarray:
    """Fraction of total served volume per cluster; attaches the result to the model."""
    by_id = {t.cell_id: t for t in traces}
    missing = sorted(set(model.assignments) - set(by_id))
    if missing:
        raise ValueError(f"no traces for assigned cells: {missing[:5]}")
    totals = np.zeros(model.k)
    for cid, cluster in sorted(model.assignments.items()):
        tr = by_id[cid]
        values = tr.values
        if window is not None:
            if not tr.covers(window):
                raise ValueError(f"trace {cid!r} does not cover the share window")
            lo = tr.index_of(window[0])
            hours = int((window[1] - window[0]).total_seconds() // 3600)
            values = values[lo : lo + hours]
        totals[cluster] += float(np.nansum(values))
    grand = totals.sum()
    if grand <= 0:
        raise ValueError("network volume is zero over the window")
    shares = totals / grand
    model.traffic_share = shares
    return shares
