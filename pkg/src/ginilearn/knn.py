"""K-nearest-neighbour classification over any MetricSpec.

For Gini kinds the default prediction mode is transductive: train and test
rows are ranked together inside one pooled population, which is the rank a
test point would hold had it been part of the training data.  A strict
inductive mode ranks each test row against the training columns alone
(interpolated insertion) while training rows keep their original ranks.

Tie rules are part of the contract: neighbours are ordered by ascending
dissimilarity with lower training-row index first; a majority-vote tie is
resolved in favour of the tied class owning the nearest neighbour.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import DataMatrix, FoldPlan
from .errors import ConfigError, DomainError
from .evaluation import classification_report
from .metrics import MetricSpec, pairwise_dissimilarity
from .ranks import RankContext, build_rank_context, interpolated_insertion_ranks, pooled_rank_split

__all__ = ["KnnModel", "GridSearchReport", "knn_fit", "knn_predict", "knn_grid_search", "DEFAULT_K_RANGE"]

DEFAULT_K_RANGE = tuple(range(1, 12))

_OBJECTIVES = ("macro_f1", "precision", "recall")


@dataclass(frozen=True)
class KnnModel:
    train: DataMatrix
    spec: MetricSpec
    k: int
    ctx: RankContext | None = None


@dataclass(frozen=True)
class GridSearchReport:
    """Cross-validated grid-search outcome.

    ``candidates`` holds one (k, nu, mean objective) triple per grid cell;
    ``per_fold`` holds the winner's (precision, recall, f1) per fold.
    """

    objective: str
    best_k: int
    best_nu: float | None
    candidates: list = field(default_factory=list)
    per_fold: list = field(default_factory=list)

    @property
    def mean_scores(self) -> tuple[float, float, float]:
        arr = np.asarray(self.per_fold, dtype=np.float64)
        return tuple(arr.mean(axis=0))


def knn_fit(train: DataMatrix, spec: MetricSpec, k: int) -> KnnModel:
    """Store the training rows; build the rank context for Gini kinds."""
    if train.labels is None:
        raise ConfigError("knn_fit requires labeled training data")
    if not 1 <= k <= train.rows:
        raise ConfigError(f"k must lie in [1, {train.rows}], got {k}")
    ctx = build_rank_context(train, spec.effective_nu) if spec.is_gini else None
    return KnnModel(train=train, spec=spec, k=k, ctx=ctx)


def _distance_matrix(model: KnnModel, test_values: np.ndarray, rank_mode: str) -> np.ndarray:
    spec = model.spec
    if not spec.is_gini:
        return pairwise_dissimilarity(spec, test_values, model.train.values)
    if rank_mode == "transductive":
        train_ranks, test_ranks = pooled_rank_split(model.train, test_values, spec.effective_nu)
    elif rank_mode == "inductive":
        train_ranks = model.ctx
        test_ranks = interpolated_insertion_ranks(model.train, test_values, spec.effective_nu)
    else:
        raise ConfigError(f"unknown rank_mode: {rank_mode!r}")
    return pairwise_dissimilarity(spec, test_values, model.train.values,
                                  ranks_x=test_ranks, ranks_y=train_ranks)


def _with_nu(ctx: RankContext, nu: float) -> RankContext:
    """Re-power an existing context for a different nu (ranks are shared)."""
    return RankContext(n_ref=ctx.n_ref, asc=ctx.asc, desc=ctx.desc, nu=nu,
                       desc_pow=ctx.desc ** (nu - 1.0))


def _vote(neighbor_labels: np.ndarray, n_classes: int) -> int:
    counts = np.bincount(neighbor_labels, minlength=n_classes)
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if tied.size == 1:
        return int(tied[0])
    for lab in neighbor_labels:  # nearest tied class wins
        if counts[lab] == top:
            return int(lab)
    raise AssertionError("unreachable: some neighbour carries a tied class")


def knn_predict(model: KnnModel, test, rank_mode: str = "transductive") -> np.ndarray:
    """Majority vote over the k nearest training rows for each test row."""
    test_values = np.atleast_2d(getattr(test, "values", test)).astype(np.float64)
    if test_values.shape[1] != model.train.cols:
        raise DomainError(
            f"column count mismatch: test has {test_values.shape[1]}, train has {model.train.cols}")
    dist = _distance_matrix(model, test_values, rank_mode)
    return _predict_from_distances(dist, model.train.labels, model.k,
                                   model.train.label_classes)


def _predict_from_distances(dist, train_labels, k, n_classes) -> np.ndarray:
    order = np.argsort(dist, axis=1, kind="stable")
    out = np.empty(dist.shape[0], dtype=np.int64)
    for i in range(dist.shape[0]):
        out[i] = _vote(train_labels[order[i, :k]], n_classes)
    return out


def knn_grid_search(train: DataMatrix, spec_family: MetricSpec, k_range=DEFAULT_K_RANGE,
                    nu_grid=None, folds: FoldPlan | None = None, objective: str = "macro_f1",
                    seed: int = 0, n_folds: int = 3) -> tuple[int, float | None, GridSearchReport]:
    """Cross-validated search over (k, nu); ties prefer smaller k then smaller nu.

    ``nu_grid`` is consulted for gini-gen only; other kinds evaluate a
    single nu-less candidate per k.  ``folds`` defaults to a fresh
    ``split_folds(train, n_folds, seed)`` plan.
    """
    if train.labels is None:
        raise ConfigError("grid search requires labeled training data")
    if objective not in _OBJECTIVES:
        raise ConfigError(f"objective must be one of {_OBJECTIVES}, got {objective!r}")
    k_range = sorted(set(int(k) for k in k_range))
    if not k_range:
        raise ConfigError("empty k grid")
    if spec_family.kind == "gini-gen":
        if nu_grid is None or not len(nu_grid):
            raise ConfigError("gini-gen grid search requires a non-empty nu grid")
        nu_values = sorted(float(v) for v in nu_grid)
        specs = [MetricSpec("gini-gen", nu=v) for v in nu_values]
    else:
        nu_values = [None]
        specs = [spec_family]
    if folds is None:
        from .data import split_folds
        folds = split_folds(train, n_folds, seed)

    max_k = min(k_range[-1], min(len(folds.complement_indices(f)) for f in range(folds.n_folds)))
    usable_k = [k for k in k_range if k <= max_k]
    if not usable_k:
        raise ConfigError("every k in the grid exceeds the smallest training fold")

    obj_idx = {"precision": 0, "recall": 1, "macro_f1": 2}[objective]
    n_classes = train.label_classes
    gini_family = spec_family.is_gini
    # scores[nu][k][fold] -> (precision, recall, f1)
    scores = np.zeros((len(nu_values), len(usable_k), folds.n_folds, 3))
    for f in range(folds.n_folds):
        tr_idx = folds.complement_indices(f)
        te_idx = folds.fold_indices(f)
        tr = train.subset(tr_idx)
        te_values = train.values[te_idx]
        truth = train.labels[te_idx]
        if gini_family:
            # pooled asc/desc ranks are nu-independent; compute once per fold
            tr_base, te_base = pooled_rank_split(tr, te_values, None)
        for si, spec in enumerate(specs):
            if gini_family:
                nu = spec.effective_nu
                dist = pairwise_dissimilarity(spec, te_values, tr.values,
                                              ranks_x=_with_nu(te_base, nu),
                                              ranks_y=_with_nu(tr_base, nu))
            else:
                dist = pairwise_dissimilarity(spec, te_values, tr.values)
            order = np.argsort(dist, axis=1, kind="stable")
            for ki, k in enumerate(usable_k):
                pred = np.array([_vote(tr.labels[order[i, :k]], n_classes)
                                 for i in range(len(te_idx))], dtype=np.int64)
                scores[si, ki, f] = classification_report(pred, truth)

    mean_obj = scores[..., obj_idx].mean(axis=2)
    best_si, best_ki = 0, 0
    best_val = -np.inf
    for ki in range(len(usable_k)):          # k-major: smaller k wins ties
        for si in range(len(nu_values)):     # then smaller nu
            if mean_obj[si, ki] > best_val:
                best_val = mean_obj[si, ki]
                best_si, best_ki = si, ki
    candidates = [(usable_k[ki], nu_values[si], float(mean_obj[si, ki]))
                  for si in range(len(nu_values)) for ki in range(len(usable_k))]
    per_fold = [tuple(scores[best_si, best_ki, f]) for f in range(folds.n_folds)]
    report = GridSearchReport(objective=objective, best_k=usable_k[best_ki],
                              best_nu=nu_values[best_si], candidates=candidates,
                              per_fold=per_fold)
    return usable_k[best_ki], nu_values[best_si], report
