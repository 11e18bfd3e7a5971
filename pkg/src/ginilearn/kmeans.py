"""Lloyd k-means over any MetricSpec with k-means++ seeding.

For Gini kinds the ranks of the training points are frozen to the rank
context of the fitted data, while centroid rank vectors are recomputed at
every iteration by interpolated insertion into the training columns (a
centroid coinciding with a data point receives exactly that point's rank).
Ranks are therefore constant within an iteration and only move between
iterations when the centroids move.

The convergence objective is the sum over points of the squared
dissimilarity to the assigned centroid; assignment itself uses the plain
dissimilarity, which selects the same argmin for non-negative values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, derive_seed, split_folds
from .errors import ConfigError, DomainError
from .evaluation import silhouette_score
from .metrics import MetricSpec, pairwise_dissimilarity
from .ranks import RankContext, build_rank_context, interpolated_insertion_ranks, pooled_rank_split

__all__ = [
    "KMeansModel",
    "kmeanspp_init",
    "kmeans_fit",
    "kmeans_predict",
    "select_nu_silhouette",
    "default_nu_grid",
]

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-9


def default_nu_grid(step: float = 0.1, lo: float = 0.1, hi: float = 6.0) -> list[float]:
    """The nu candidates: lo..hi inclusive in the given step, skipping 1."""
    n_steps = int(round((hi - lo) / step))
    grid = [round(lo + i * step, 10) for i in range(n_steps + 1)]
    return [v for v in grid if v != 1.0]


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    spec: MetricSpec
    ctx: RankContext | None
    iterations: int
    objective_trace: tuple
    converged: bool
    labels: np.ndarray
    train: DataMatrix | None = None  # retained for conditional ranking at predict time


def _values_of(data) -> np.ndarray:
    return np.atleast_2d(getattr(data, "values", data)).astype(np.float64)


def kmeanspp_init(data, k: int, spec: MetricSpec, seed: int) -> np.ndarray:
    """k-means++ seeding under the given dissimilarity.

    The first centroid is drawn uniformly; each further centroid is a data
    row drawn with probability proportional to the squared dissimilarity
    to its nearest already-chosen centroid.  When all remaining mass is
    zero (duplicate rows), the next centroid is drawn uniformly from the
    unchosen rows.
    """
    values = _values_of(data)
    n = values.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, {n}], got {k}")
    ctx = build_rank_context(values, spec.effective_nu) if spec.is_gini else None

    def dist_to(idx):
        if spec.is_gini:
            row_ctx = RankContext(n_ref=ctx.n_ref, asc=ctx.asc[[idx]], desc=ctx.desc[[idx]],
                                  nu=ctx.nu, desc_pow=None if ctx.desc_pow is None else ctx.desc_pow[[idx]])
            return pairwise_dissimilarity(spec, values, values[[idx]], ranks_x=ctx, ranks_y=row_ctx)[:, 0]
        return pairwise_dissimilarity(spec, values, values[[idx]])[:, 0]

    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    best_sq = dist_to(chosen[0]) ** 2
    while len(chosen) < k:
        mass = best_sq.copy()
        mass[chosen] = 0.0
        total = mass.sum()
        if total > 0:
            idx = int(rng.choice(n, p=mass / total))
        else:
            unchosen = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(unchosen))
        chosen.append(idx)
        best_sq = np.minimum(best_sq, dist_to(idx) ** 2)
    return values[np.array(chosen)].copy()


def _centroid_ranks(spec: MetricSpec, train_values, centroids) -> RankContext | None:
    if not spec.is_gini:
        return None
    return interpolated_insertion_ranks(train_values, centroids, spec.effective_nu)


def _assign(spec, values, ctx, centroids, centroid_ctx):
    if spec.is_gini:
        dist = pairwise_dissimilarity(spec, values, centroids, ranks_x=ctx, ranks_y=centroid_ctx)
    else:
        dist = pairwise_dissimilarity(spec, values, centroids)
    labels = dist.argmin(axis=1)
    mins = dist[np.arange(dist.shape[0]), labels]
    return labels, mins


def _repair_empty(labels, mins, k):
    """Reseed each empty cluster with the point farthest from its own centroid."""
    counts = np.bincount(labels, minlength=k)
    stolen = []
    for c in np.flatnonzero(counts == 0):
        order = np.argsort(mins, kind="stable")[::-1]
        for cand in order:
            if cand in stolen or counts[labels[cand]] <= 1:
                continue
            counts[labels[cand]] -= 1
            labels[cand] = c
            counts[c] = 1
            stolen.append(cand)
            break
    return labels


def kmeans_fit(data, k: int, spec: MetricSpec, init, max_iter: int = DEFAULT_MAX_ITER,
               tol: float = DEFAULT_TOL, update_centroid_ranks: bool = True) -> KMeansModel:
    """Alternate nearest-centroid assignment and mean updates until the
    assignment stops changing, the objective change falls below ``tol``,
    or ``max_iter`` update cycles have run.

    ``iterations`` counts update-reassign cycles; the initial assignment is
    iteration 0.  ``objective_trace`` holds the objective after every
    assignment, the initial one included.  ``update_centroid_ranks=False``
    freezes centroid rank vectors at their initial values (research toggle).
    """
    values = _values_of(data)
    if not np.all(np.isfinite(values)):
        raise DomainError("k-means requires finite data")
    n = values.shape[0]
    init = np.atleast_2d(np.asarray(init, dtype=np.float64))
    if init.shape != (k, values.shape[1]):
        raise ConfigError(f"init must be a {k} x {values.shape[1]} matrix, got {init.shape}")
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1")
    if k > n:
        raise ConfigError(f"k={k} exceeds number of rows {n}")

    ctx = build_rank_context(values, spec.effective_nu) if spec.is_gini else None
    centroids = init.copy()
    centroid_ctx = _centroid_ranks(spec, values, centroids)

    labels, mins = _assign(spec, values, ctx, centroids, centroid_ctx)
    trace = [float((mins ** 2).sum())]
    labels = _repair_empty(labels, mins, k)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = values[members].mean(axis=0)
        if update_centroid_ranks or centroid_ctx is None:
            centroid_ctx = _centroid_ranks(spec, values, new_centroids)
        new_labels, mins = _assign(spec, values, ctx, new_centroids, centroid_ctx)
        trace.append(float((mins ** 2).sum()))
        new_labels = _repair_empty(new_labels, mins, k)
        centroids = new_centroids
        if np.array_equal(new_labels, labels):
            labels = new_labels
            converged = True
            break
        labels = new_labels
        if abs(trace[-1] - trace[-2]) <= tol:
            converged = True
            break

    dm = data if isinstance(data, DataMatrix) else DataMatrix(values)
    return KMeansModel(k=k, centroids=centroids, spec=spec, ctx=ctx,
                       iterations=iterations, objective_trace=tuple(trace),
                       converged=converged, labels=labels,
                       train=dm if spec.is_gini else None)


def kmeans_predict(model: KMeansModel, test) -> np.ndarray:
    """Assign each test row to its nearest centroid.

    Gini kinds rank test rows conditionally inside the pooled
    train+test population and insert the centroids into the same pooled
    columns, so both sides share one reference population.
    """
    test_values = _values_of(test)
    if test_values.shape[1] != model.centroids.shape[1]:
        raise DomainError(
            f"column count mismatch: test has {test_values.shape[1]}, centroids have {model.centroids.shape[1]}")
    if model.spec.is_gini:
        nu = model.spec.effective_nu
        _, test_ctx = pooled_rank_split(model.train, test_values, nu)
        pooled_values = np.vstack([model.train.values, test_values])
        centroid_ctx = interpolated_insertion_ranks(pooled_values, model.centroids, nu)
        dist = pairwise_dissimilarity(model.spec, test_values, model.centroids,
                                      ranks_x=test_ctx, ranks_y=centroid_ctx)
    else:
        dist = pairwise_dissimilarity(model.spec, test_values, model.centroids)
    return dist.argmin(axis=1)


def select_nu_silhouette(train, k: int, nu_grid=None, n_folds: int = 5, seed: int = 0) -> float:
    """Pick the nu maximizing the mean in-fold silhouette across folds.

    Per fold and nu: k-means++ seeded on the fold's rows, Lloyd iterations
    to convergence, out-of-fold labels predicted through conditional
    ranks, and the silhouette of the fold's own clustering recorded.  The
    winning nu is the argmax of the fold-mean silhouette; ties prefer the
    smaller nu.
    """
    if nu_grid is None:
        nu_grid = default_nu_grid()
    nu_values = sorted(float(v) for v in nu_grid)
    if not nu_values:
        raise ConfigError("empty nu grid")
    if any(v == 1.0 for v in nu_values):
        raise ConfigError("nu = 1 cannot appear in the grid")
    data = train if isinstance(train, DataMatrix) else DataMatrix(_values_of(train))
    folds = split_folds(data, n_folds, seed)

    mean_scores = []
    for nu in nu_values:
        spec = MetricSpec("gini-gen", nu=nu)
        fold_scores = []
        for f in range(folds.n_folds):
            fold_data = data.subset(folds.fold_indices(f)).without_labels()
            out_data = data.subset(folds.complement_indices(f)).without_labels()
            init = kmeanspp_init(fold_data, k, spec, seed=derive_seed(seed, "nu-select", f))
            model = kmeans_fit(fold_data, k, spec, init)
            kmeans_predict(model, out_data)  # out-of-fold labeling step
            fold_scores.append(silhouette_score(fold_data, model.labels, spec))
        mean_scores.append(float(np.mean(fold_scores)))

    best = int(np.argmax(mean_scores))  # argmax returns the first max: smaller nu wins ties
    return nu_values[best]
