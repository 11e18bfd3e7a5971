"""Hierarchical agglomerative clustering: average linkage over any
MetricSpec, plus Ward linkage for the Euclidean case.

Average linkage starts from the pairwise dissimilarity matrix under the
chosen spec (Gini ranks are computed once over the whole input, the
clustering being transductive) and maintains inter-cluster means with the
Lance-Williams update.  Cross-pair means count both orientations of a
pair, so inherently asymmetric zoo members (pearson-chi2) enter through
the symmetrized matrix (d(a,b) + d(b,a)) / 2; symmetric members are
unaffected.  Ward linkage starts from squared Euclidean
distances; its Lance-Williams recursion makes the merge cost equal twice
the within-cluster variance increase, and heights are recorded on that
scale as-is.  Heights are not forced to be monotone: a non-metric
prametric may produce inversions, which are recorded untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .metrics import MetricSpec, pairwise_dissimilarity
from .ranks import build_rank_context

__all__ = ["Dendrogram", "agglomerative_fit"]


@dataclass(frozen=True)
class Dendrogram:
    """Merge history: (cluster_a, cluster_b, height, new_size) per step.

    Leaves are clusters 0..n-1; the merge at step t creates cluster
    ``n_leaves + t``.  Exactly ``n_leaves - 1`` merges are recorded.
    """

    n_leaves: int
    merges: tuple

    def cut(self, k: int) -> np.ndarray:
        """Labels obtained by undoing the last k-1 merges.

        Clusters are numbered 0..k-1 in order of their smallest leaf index.
        """
        if not 1 <= k <= self.n_leaves:
            raise ConfigError(f"cut level must lie in [1, {self.n_leaves}], got {k}")
        parent = list(range(self.n_leaves + len(self.merges)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t, (a, b, _height, _size) in enumerate(self.merges[: self.n_leaves - k]):
            new = self.n_leaves + t
            parent[find(int(a))] = new
            parent[find(int(b))] = new
        roots: dict[int, int] = {}
        labels = np.empty(self.n_leaves, dtype=np.int64)
        for leaf in range(self.n_leaves):
            r = find(leaf)
            if r not in roots:
                roots[r] = len(roots)
            labels[leaf] = roots[r]
        return labels

    def to_json(self) -> str:
        return json.dumps({
            "n_leaves": self.n_leaves,
            "merges": [[int(a), int(b), float(h), int(s)] for a, b, h, s in self.merges],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        raw = json.loads(text)
        merges = tuple((int(a), int(b), float(h), int(s)) for a, b, h, s in raw["merges"])
        return cls(n_leaves=int(raw["n_leaves"]), merges=merges)


def _initial_matrix(values: np.ndarray, spec: MetricSpec, linkage: str) -> np.ndarray:
    if linkage == "ward":
        diff = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2)
        return diff
    if spec.is_gini:
        ctx = build_rank_context(values, spec.effective_nu)
        return pairwise_dissimilarity(spec, values, values, ranks_x=ctx, ranks_y=ctx)
    return pairwise_dissimilarity(spec, values, values)


def agglomerative_fit(data, k: int, spec: MetricSpec, linkage: str = "average",
                      ) -> tuple[Dendrogram, np.ndarray]:
    """Greedy merging of the closest cluster pair down to a single cluster;
    returns the full dendrogram and the labels of the cut at k clusters.

    Equal merge costs are broken in favour of the lexicographically
    smallest (cluster_a, cluster_b) id pair.
    """
    if linkage not in ("average", "ward"):
        raise ConfigError(f"unknown linkage: {linkage!r}")
    if linkage == "ward" and spec.kind != "euclidean":
        raise ConfigError("ward linkage requires the euclidean spec")
    values = np.atleast_2d(getattr(data, "values", data)).astype(np.float64)
    n = values.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, {n}], got {k}")

    dist = _initial_matrix(values, spec, linkage)
    dist = (dist + dist.T) / 2.0  # no-op for symmetric specs; pearson-chi2 is not
    ids = list(range(n))                  # cluster id per active slot
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    work = dist.copy()
    np.fill_diagonal(work, np.inf)

    merges = []
    for step in range(n - 1):
        masked = np.where(np.outer(active, active), work, np.inf)
        np.fill_diagonal(masked, np.inf)
        height = masked.min()
        cand = np.argwhere(masked == height)
        # pick the candidate with smallest (id_a, id_b)
        best = min(((min(ids[i], ids[j]), max(ids[i], ids[j]), i, j)
                    for i, j in cand if i < j))
        id_a, id_b, si, sj = best
        na, nb = sizes[si], sizes[sj]
        new_size = na + nb
        merges.append((id_a, id_b, float(height), int(new_size)))

        others = active.copy()
        others[[si, sj]] = False
        if linkage == "average":
            work[si, others] = (na * work[si, others] + nb * work[sj, others]) / new_size
        else:  # ward
            nc = sizes[others]
            work[si, others] = ((na + nc) * work[si, others] + (nb + nc) * work[sj, others]
                                - nc * height) / (new_size + nc)
        work[others, si] = work[si, others]
        active[sj] = False
        sizes[si] = new_size
        ids[si] = n + step

    dendro = Dendrogram(n_leaves=n, merges=tuple(merges))
    return dendro, dendro.cut(k)
