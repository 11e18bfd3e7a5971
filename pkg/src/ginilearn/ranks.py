"""Per-feature rank tables: ascending/descending average-tie ranks, powered
decumulative ranks, and conditional ranks for held-out points.

Conventions
-----------
Ranks are 1-based and real-valued: tied values all receive the arithmetic
mean of the positions they occupy.  Descending ranks satisfy
``desc = n + 1 - asc`` elementwise, ties included.  For a hyper-parameter
``nu != 1`` the context also stores ``desc ** (nu - 1)``, the quantity the
generalized Gini prametric consumes.

Two ways of ranking points that are not part of the reference population:

* ``conditional_ranks(train, test, nu)`` pools train and test columns,
  ranks the pooled column of length ``n_tr + n_te``, and returns the
  entries belonging to the test rows.  This is the rank a test point would
  hold had it been part of the training data.
* ``interpolated_insertion_ranks(ref, queries, nu)`` ranks each query
  against the reference columns alone, without enlarging the population:
  a query tied with reference values receives their tie-averaged rank, and
  a query falling strictly between two reference values receives the
  half-rank in between.  A query equal to a reference point gets exactly
  that point's rank, which keeps query ranks on the same scale as a frozen
  reference context.  k-means uses this for centroids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, DomainError

__all__ = [
    "RankContext",
    "ascending_ranks",
    "descending_ranks",
    "build_rank_context",
    "conditional_ranks",
    "pooled_rank_split",
    "interpolated_insertion_ranks",
]


@dataclass(frozen=True)
class RankContext:
    """Per-feature rank tables for a reference population of size n_ref.

    ``asc`` and ``desc`` have one row per ranked point and one column per
    feature.  ``desc_pow`` is ``desc ** (nu - 1)`` and is present iff
    ``nu`` is set.
    """

    n_ref: int
    asc: np.ndarray
    desc: np.ndarray
    nu: float | None = None
    desc_pow: np.ndarray | None = None

    def __post_init__(self):
        for name in ("asc", "desc", "desc_pow"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(arr, dtype=np.float64)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def rows(self) -> int:
        return self.asc.shape[0]


def _as_values(data) -> np.ndarray:
    """Accept a DataMatrix or a plain 2-d array."""
    values = getattr(data, "values", data)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise DomainError(f"expected a 2-d matrix, got shape {values.shape}")
    return values


def ascending_ranks(column) -> np.ndarray:
    """1-based ascending ranks with average ties."""
    col = np.asarray(column, dtype=np.float64)
    if col.ndim != 1 or col.size == 0:
        raise DomainError("ascending_ranks expects a non-empty 1-d vector")
    if not np.all(np.isfinite(col)):
        raise DomainError("ranks are defined for finite values only")
    return rankdata(col, method="average")


def descending_ranks(column) -> np.ndarray:
    """1-based descending ranks with average ties.

    Computed by ranking the negated column, which under average ties
    coincides with ``n + 1 - ascending_ranks(column)``.
    """
    col = np.asarray(column, dtype=np.float64)
    if col.ndim != 1 or col.size == 0:
        raise DomainError("descending_ranks expects a non-empty 1-d vector")
    if not np.all(np.isfinite(col)):
        raise DomainError("ranks are defined for finite values only")
    return rankdata(-col, method="average")


def _matrix_ranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    asc = rankdata(values, method="average", axis=0)
    desc = rankdata(-values, method="average", axis=0)
    return asc, desc


def _check_nu(nu):
    if nu is not None and nu == 1:
        raise ConfigError("nu = 1 is excluded: desc**(nu-1) degenerates to a constant")


def build_rank_context(data, nu: float | None = None) -> RankContext:
    """Rank every feature of ``data`` over its own rows."""
    _check_nu(nu)
    values = _as_values(data)
    if values.shape[0] < 1:
        raise DomainError("cannot rank an empty matrix")
    asc, desc = _matrix_ranks(values)
    desc_pow = desc ** (nu - 1.0) if nu is not None else None
    return RankContext(n_ref=values.shape[0], asc=asc, desc=desc, nu=nu, desc_pow=desc_pow)


def pooled_rank_split(train, test, nu: float | None = None,
                      ) -> tuple[RankContext, RankContext]:
    """Rank the pooled train+test population; return (train part, test part).

    Both contexts carry ``n_ref = n_tr + n_te`` so train and test rank
    values are directly comparable.
    """
    _check_nu(nu)
    train_values = _as_values(train)
    test_values = _as_values(test)
    if train_values.shape[1] != test_values.shape[1]:
        raise DomainError(
            f"column count mismatch: train has {train_values.shape[1]}, test has {test_values.shape[1]}")
    n_tr = train_values.shape[0]
    pooled = np.vstack([train_values, test_values])
    asc, desc = _matrix_ranks(pooled)
    desc_pow = desc ** (nu - 1.0) if nu is not None else None
    n = pooled.shape[0]

    def part(sl):
        return RankContext(
            n_ref=n, asc=asc[sl], desc=desc[sl], nu=nu,
            desc_pow=desc_pow[sl] if desc_pow is not None else None)

    return part(slice(0, n_tr)), part(slice(n_tr, n))


def conditional_ranks(train, test, nu: float | None = None, *,
                      scaled_nu_power: bool = False) -> RankContext:
    """Ranks the test rows would hold inside the pooled train+test population.

    With ``scaled_nu_power=True`` the powered column is computed as
    ``desc**nu * (n_te / n)`` instead of ``desc**(nu-1)``.  Both conventions
    order candidate neighbours identically for a fixed population; the
    scaled variant exists for comparison runs only.
    """
    if scaled_nu_power and nu is None:
        raise ConfigError("scaled_nu_power requires nu")
    _, test_ctx = pooled_rank_split(train, test, nu)
    if scaled_nu_power:
        n_te = test_ctx.rows
        desc_pow = test_ctx.desc ** nu * (n_te / test_ctx.n_ref)
        return RankContext(n_ref=test_ctx.n_ref, asc=test_ctx.asc,
                           desc=test_ctx.desc, nu=nu, desc_pow=desc_pow)
    return test_ctx


def interpolated_insertion_ranks(ref, queries, nu: float | None = None) -> RankContext:
    """Rank query rows against reference columns without joining them.

    For query value v in a reference column with ``n_less`` smaller values
    and ``n_eq`` equal values, the ascending rank is
    ``n_less + (n_eq + 1) / 2`` and the descending rank is the usual
    ``n_ref + 1 - asc`` complement.
    """
    _check_nu(nu)
    ref_values = _as_values(ref)
    query_values = _as_values(queries)
    if ref_values.shape[1] != query_values.shape[1]:
        raise DomainError("column count mismatch between reference and queries")
    n = ref_values.shape[0]
    asc = np.empty_like(query_values)
    for j in range(ref_values.shape[1]):
        col = np.sort(ref_values[:, j])
        lo = np.searchsorted(col, query_values[:, j], side="left")
        hi = np.searchsorted(col, query_values[:, j], side="right")
        asc[:, j] = lo + (hi - lo + 1) / 2.0
    desc = n + 1.0 - asc
    desc_pow = desc ** (nu - 1.0) if nu is not None else None
    return RankContext(n_ref=n, asc=asc, desc=desc, nu=nu, desc_pow=desc_pow)
