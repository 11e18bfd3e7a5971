"""Scoring and statistics: cluster-label alignment, macro precision/recall/F1,
silhouette under any MetricSpec, the Wilcoxon signed-rank test, and
competition-ranked summary tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import norm, rankdata

from .errors import ConfigError, DomainError
from .metrics import MetricSpec, pairwise_dissimilarity
from .ranks import build_rank_context

__all__ = [
    "EvalReport",
    "hungarian_align",
    "classification_report",
    "silhouette_score",
    "wilcoxon_signed_rank",
    "rank_table",
    "RankTable",
    "competition_ranks",
]


# ---------------------------------------------------------------------------
# cluster-label alignment

def _confusion(pred, truth, k):
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise DomainError("pred and truth must be equal-length non-empty vectors")
    if pred.min() < 0 or pred.max() >= k or truth.min() < 0 or truth.max() >= k:
        raise DomainError(f"labels must lie in [0, {k})")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (pred, truth), 1)
    return counts


def _assignment_value(counts):
    rows, cols = linear_sum_assignment(-counts)
    return int(counts[rows, cols].sum())


def hungarian_align(pred, truth, k: int) -> np.ndarray:
    """Permutation ``perm`` of {0..k-1} maximizing agreement of ``perm[pred]``
    with ``truth``; the lexicographically smallest optimal permutation.

    The optimum is found by min-cost assignment on negated confusion
    counts; the lexicographic tie-break locks one position at a time,
    keeping only prefixes whose best completion still attains the optimum.
    """
    counts = _confusion(pred, truth, k)
    best_total = _assignment_value(counts)
    perm = np.full(k, -1, dtype=np.int64)
    taken = np.zeros(k, dtype=bool)
    prefix = 0
    for c in range(k):
        for t in range(k):
            if taken[t]:
                continue
            remaining = np.delete(np.delete(counts, np.arange(c + 1), axis=0),
                                  np.flatnonzero(taken | (np.arange(k) == t)), axis=1)
            completion = _assignment_value(remaining) if remaining.size else 0
            if prefix + counts[c, t] + completion == best_total:
                perm[c] = t
                taken[t] = True
                prefix += counts[c, t]
                break
    return perm


# ---------------------------------------------------------------------------
# classification metrics

def classification_report(pred, truth) -> tuple[float, float, float]:
    """Macro-averaged (precision, recall, f1) with the 0/0 -> 0 convention.

    Per-class F1 is computed from that class's precision and recall, then
    averaged; classes are the union of labels seen in pred and truth.
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise DomainError("pred and truth must be equal-length non-empty vectors")
    classes = np.union1d(pred, truth)
    precisions, recalls, f1s = [], [], []
    for c in classes:
        tp = np.sum((pred == c) & (truth == c))
        fp = np.sum((pred == c) & (truth != c))
        fn = np.sum((pred != c) & (truth == c))
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    return float(np.mean(precisions)), float(np.mean(recalls)), float(np.mean(f1s))


# ---------------------------------------------------------------------------
# silhouette

def silhouette_score(data, labels, spec: MetricSpec) -> float:
    """Mean of (b - a) / max(a, b) under the given dissimilarity.

    ``a`` is the mean intra-cluster dissimilarity excluding the point
    itself, ``b`` the smallest mean dissimilarity to another cluster.
    Singleton-cluster points score 0, as do points with a = b = 0.
    """
    values = np.atleast_2d(getattr(data, "values", data)).astype(np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (values.shape[0],):
        raise DomainError("labels must have one entry per data row")
    present = np.unique(labels)
    if present.size < 2:
        raise DomainError("silhouette requires at least two clusters")
    if spec.is_gini:
        ctx = build_rank_context(values, spec.effective_nu)
        dist = pairwise_dissimilarity(spec, values, values, ranks_x=ctx, ranks_y=ctx)
    else:
        dist = pairwise_dissimilarity(spec, values, values)
    n = values.shape[0]
    sizes = {int(c): int(np.sum(labels == c)) for c in present}
    scores = np.zeros(n)
    cluster_sums = np.stack([dist[:, labels == c].sum(axis=1) for c in present], axis=1)
    for i in range(n):
        own = int(labels[i])
        own_pos = int(np.searchsorted(present, own))
        if sizes[own] == 1:
            scores[i] = 0.0
            continue
        a = cluster_sums[i, own_pos] / (sizes[own] - 1)
        b = min(cluster_sums[i, pos] / sizes[int(c)]
                for pos, c in enumerate(present) if c != own)
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test

def _signed_rank_stat(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("wilcoxon requires two equal-length vectors")
    diff = a - b
    diff = diff[diff != 0]
    if diff.size == 0:
        raise DomainError("all paired differences are zero")
    ranks = rankdata(np.abs(diff), method="average")
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())
    return ranks, w_plus, w_minus


def _exact_two_sided_p(ranks, w):
    """P(min(W+, W-) <= w) under the 2^n equally likely sign patterns.

    Dynamic program over doubled ranks (integers even with average ties).
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    w2 = int(round(2.0 * w))
    mask = (np.arange(total + 1) <= w2) | (np.arange(total + 1) >= total - w2)
    return float(counts[mask].sum() / counts.sum())


def wilcoxon_signed_rank(a, b, mode: str = "auto") -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test.

    Returns ``(statistic, p)`` with statistic = min(W+, W-) over average-tie
    ranks of the non-zero differences.  ``mode`` is "exact" (full null
    distribution), "approx" (normal approximation with continuity and tie
    corrections), or "auto" (exact up to n = 20).
    """
    ranks, w_plus, w_minus = _signed_rank_stat(a, b)
    w = min(w_plus, w_minus)
    n = ranks.size
    if mode not in ("auto", "exact", "approx"):
        raise ConfigError(f"unknown wilcoxon mode: {mode!r}")
    if mode == "exact" or (mode == "auto" and n <= 20):
        return w, _exact_two_sided_p(ranks, w)
    mu = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(((tie_counts ** 3 - tie_counts) / 48.0).sum())
    sigma = np.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
    if sigma == 0:
        raise DomainError("degenerate variance in the normal approximation")
    z = (w - mu + 0.5) / sigma  # continuity correction toward the mean
    return w, float(min(1.0, 2.0 * norm.cdf(z)))


# ---------------------------------------------------------------------------
# reports and ranking tables

@dataclass(frozen=True)
class EvalReport:
    """Per-(dataset, metric) evaluation: fold scores plus their means."""

    dataset: str
    spec: str
    precision: float
    recall: float
    f1: float
    per_fold: tuple = ()
    iterations: float | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_folds(cls, dataset, spec, per_fold, iterations=None, params=None):
        arr = np.asarray([tuple(f) for f in per_fold], dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise DomainError("per_fold must be a non-empty list of (precision, recall, f1)")
        p, r, f = arr.mean(axis=0)
        return cls(dataset=dataset, spec=str(spec), precision=float(p), recall=float(r),
                   f1=float(f), per_fold=tuple(map(tuple, arr.tolist())),
                   iterations=iterations, params=dict(params or {}))

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "spec": self.spec,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_fold": [list(f) for f in self.per_fold],
            "iterations": self.iterations,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(dataset=d["dataset"], spec=d["spec"], precision=d["precision"],
                   recall=d["recall"], f1=d["f1"],
                   per_fold=tuple(tuple(f) for f in d.get("per_fold", ())),
                   iterations=d.get("iterations"), params=dict(d.get("params", {})))


@dataclass(frozen=True)
class RankTable:
    """Competition ranks of metrics across datasets plus the mean rank.

    Ties share the best rank and the next rank skips (1, 1, 3, ...),
    ranking higher scores better.
    """

    measure: str
    metrics: tuple
    datasets: tuple
    ranks: np.ndarray          # (n_metrics, n_datasets)
    mean_rank: np.ndarray      # (n_metrics,)

    def to_csv(self) -> str:
        lines = ["metric," + ",".join(self.datasets) + ",Rank"]
        for i, m in enumerate(self.metrics):
            cells = [f"{v:g}" for v in self.ranks[i]]
            lines.append(f"{m}," + ",".join(cells) + f",{self.mean_rank[i]:g}")
        return "\n".join(lines) + "\n"


def competition_ranks(scores) -> np.ndarray:
    """Rank descending scores: rank = 1 + number of strictly better scores."""
    scores = np.asarray(scores, dtype=np.float64)
    return 1.0 + np.sum(scores[None, :] > scores[:, None], axis=1)


def rank_table(reports, measure: str = "precision") -> RankTable:
    """Aggregate EvalReports into the metrics x datasets ranking table."""
    if measure not in ("precision", "recall", "f1"):
        raise ConfigError(f"unknown measure: {measure!r}")
    datasets, metrics = [], []
    for rep in reports:
        if rep.dataset not in datasets:
            datasets.append(rep.dataset)
        if rep.spec not in metrics:
            metrics.append(rep.spec)
    cell = {(rep.spec, rep.dataset): getattr(rep, measure) for rep in reports}
    for m, d in itertools.product(metrics, datasets):
        if (m, d) not in cell:
            raise ConfigError(f"missing score for metric {m!r} on dataset {d!r}")
    ranks = np.zeros((len(metrics), len(datasets)))
    for j, d in enumerate(datasets):
        ranks[:, j] = competition_ranks([cell[(m, d)] for m in metrics])
    return RankTable(measure=measure, metrics=tuple(metrics), datasets=tuple(datasets),
                     ranks=ranks, mean_rank=ranks.mean(axis=1))
