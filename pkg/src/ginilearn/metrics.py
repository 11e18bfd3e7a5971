"""Dissimilarity zoo plus the Gini prametric family.

Zoo members follow the usual closed forms; terms whose denominator (or log
argument) degenerates contribute zero so that every metric stays finite on
raw, unnormalized data containing zeros or negative entries:

* canberra:         |x-y| / (|x|+|y|)        -> 0 when |x|+|y| = 0
* pearson-chi2:     (x-y)^2 / y^2            -> 0 when y = 0
* squared-chi:      (x-y)^2 / |x+y|          -> 0 when |x+y| = 0
* vicis-symmetric:  (x-y)^2 / min(x,y)^2     -> 0 when min(x,y) = 0
* jensen-shannon:   a mass term contributes only when the mass and the
  pooled mass are both positive (keeps every per-feature contribution,
  hence the total, non-negative)
* hellinger:        sqrt(2 * sum (sqrt(max(x,0)) - sqrt(max(y,0)))^2)
* hassanat is summed over features; per feature, with m = min, M = max:
  1 - (1+m)/(1+M) when m >= 0, else 1 - (1+m+|m|)/(1+M+|m|)

The Gini prametric of two rows is
``sum_j (x_j - y_j) * (R(x_j) - R(y_j))`` over ascending ranks R taken
from one reference population; the generalized form replaces rank
differences by differences of descending ranks raised to ``nu - 1`` and
negates the sum.  For ``nu < 1`` the powered descending rank increases
with the value, which flips the sign of the raw sum, so the result is
multiplied by ``sign(nu - 1)`` to keep the codomain non-negative over the
whole grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .ranks import RankContext

__all__ = [
    "MetricSpec",
    "ZOO_KINDS",
    "GINI_KINDS",
    "ALL_KINDS",
    "parse_metric",
    "zoo_distance",
    "gini_prametric",
    "generalized_gini_prametric",
    "gini_mean_difference",
    "pairwise_dissimilarity",
]

ZOO_KINDS = (
    "euclidean",
    "manhattan",
    "minkowski",
    "cosine",
    "lorentzian",
    "canberra",
    "hellinger",
    "pearson-chi2",
    "squared-chi",
    "jensen-shannon",
    "vicis-symmetric",
    "hassanat",
)
GINI_KINDS = ("gini", "gini-gen")
ALL_KINDS = ZOO_KINDS + GINI_KINDS


@dataclass(frozen=True)
class MetricSpec:
    """Closed enumeration of dissimilarities.

    ``p`` applies to minkowski only (default 3), ``nu`` to gini-gen only
    (any real != 1).  Plain ``gini`` behaves like gini-gen at nu = 2 but
    is evaluated on ascending ranks directly.
    """

    kind: str
    p: float = 3.0
    nu: float = 2.0

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ConfigError(f"unknown metric kind: {self.kind!r}")
        if self.kind == "minkowski" and not self.p > 0:
            raise ConfigError(f"minkowski requires p > 0, got {self.p}")
        if self.kind == "gini-gen" and self.nu == 1:
            raise ConfigError("gini-gen requires nu != 1")

    @property
    def is_gini(self) -> bool:
        return self.kind in GINI_KINDS

    @property
    def effective_nu(self) -> float | None:
        """nu to build rank contexts with: 2 for plain gini, None for the zoo."""
        if self.kind == "gini":
            return 2.0
        if self.kind == "gini-gen":
            return self.nu
        return None

    def __str__(self) -> str:
        if self.kind == "minkowski":
            return f"minkowski:p={_fmt(self.p)}"
        if self.kind == "gini-gen":
            return f"gini-gen:nu={_fmt(self.nu)}"
        return self.kind


def _fmt(x: float) -> str:
    return f"{x:g}"


def parse_metric(text: str) -> MetricSpec:
    """Parse the CLI grammar: "euclidean", "minkowski:p=3", "gini-gen:nu=2.48"."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError(f"invalid metric string: {text!r}")
    head, _, tail = text.strip().partition(":")
    kind = head.strip().lower()
    if kind not in ALL_KINDS:
        raise ConfigError(f"invalid metric string: {text!r} (unknown kind {kind!r})")
    params = {}
    if tail:
        for item in tail.split(","):
            key, eq, value = item.partition("=")
            key = key.strip().lower()
            if not eq or key not in ("p", "nu"):
                raise ConfigError(f"invalid metric string: {text!r} (bad parameter {item!r})")
            try:
                params[key] = float(value)
            except ValueError:
                raise ConfigError(f"invalid metric string: {text!r} (non-numeric {value!r})") from None
    if "p" in params and kind != "minkowski":
        raise ConfigError(f"invalid metric string: {text!r} (p only applies to minkowski)")
    if "nu" in params and kind != "gini-gen":
        raise ConfigError(f"invalid metric string: {text!r} (nu only applies to gini-gen)")
    return MetricSpec(kind, **params)


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise DomainError(f"expected two equal-length vectors, got shapes {x.shape} and {y.shape}")
    return x, y


def zoo_distance(spec: MetricSpec, x, y) -> float:
    """Evaluate one zoo dissimilarity between two feature vectors."""
    if spec.is_gini:
        raise ConfigError("zoo_distance does not evaluate gini kinds; use the prametric functions")
    x, y = _check_pair(x, y)
    return float(pairwise_dissimilarity(spec, x[None, :], y[None, :])[0, 0])


def gini_prametric(x, y, rx, ry) -> float:
    """sum_j (x_j - y_j) * (rx_j - ry_j) over ascending ranks from one context."""
    x, y = _check_pair(x, y)
    rx, ry = _check_pair(rx, ry)
    if rx.shape != x.shape:
        raise DomainError("rank vectors must match the value vectors in length")
    return float(np.dot(x - y, rx - ry))


def generalized_gini_prametric(x, y, rpx, rpy, nu: float) -> float:
    """-sum_j (x_j - y_j) * (rpx_j - rpy_j), sign-corrected for nu < 1.

    ``rpx``/``rpy`` are descending ranks raised to ``nu - 1`` drawn from a
    single rank context.
    """
    if nu == 1:
        raise ConfigError("generalized Gini prametric requires nu != 1")
    x, y = _check_pair(x, y)
    rpx, rpy = _check_pair(rpx, rpy)
    if rpx.shape != x.shape:
        raise DomainError("powered rank vectors must match the value vectors in length")
    raw = -float(np.dot(x - y, rpx - rpy))
    return raw if nu > 1 else -raw


def gini_mean_difference(x, y, ry=None) -> float:
    """Empirical Gini mean difference (2/n^2) * sum_i x_i * (2 R_y(y_i) - 1).

    ``ry`` defaults to the ascending ranks of y within its own population.
    The result is a covariance-type quantity and may be negative.
    """
    x, y = _check_pair(x, y)
    if ry is None:
        from .ranks import ascending_ranks
        ry = ascending_ranks(y)
    ry = np.asarray(ry, dtype=np.float64)
    if ry.shape != y.shape:
        raise DomainError("ry must match y in length")
    n = x.size
    return float(2.0 / (n * n) * np.dot(x, 2.0 * ry - 1.0))


# ---------------------------------------------------------------------------
# pairwise engine

def _rank_arrays(spec: MetricSpec, ranks: RankContext, n_rows: int) -> np.ndarray:
    if ranks is None:
        raise DomainError(f"{spec.kind} requires rank contexts for both sides")
    arr = ranks.asc if spec.kind == "gini" else ranks.desc_pow
    if arr is None:
        raise DomainError("rank context lacks powered descending ranks; build it with nu set")
    if arr.shape[0] != n_rows:
        raise DomainError("rank context rows do not match the value matrix")
    return arr


def pairwise_dissimilarity(spec: MetricSpec, X, Y, ranks_x: RankContext | None = None,
                           ranks_y: RankContext | None = None) -> np.ndarray:
    """Dissimilarity matrix between the rows of X and the rows of Y.

    Gini kinds additionally need rank contexts for both sides, drawn from
    (or conditional on) one reference population.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"column count mismatch: {X.shape[1]} vs {Y.shape[1]}")

    if spec.is_gini:
        rx = _rank_arrays(spec, ranks_x, X.shape[0])
        ry = _rank_arrays(spec, ranks_y, Y.shape[0])
        out = np.zeros((X.shape[0], Y.shape[0]))
        for j in range(X.shape[1]):
            dv = X[:, j, None] - Y[None, :, j]
            dr = rx[:, j, None] - ry[None, :, j]
            out += dv * dr
        if spec.kind == "gini":
            return out
        return -out if spec.nu > 1 else out

    return _pairwise_zoo(spec, X, Y)


def _pairwise_zoo(spec: MetricSpec, X, Y) -> np.ndarray:
    kind = spec.kind
    if kind == "cosine":
        nx = np.sqrt(np.einsum("ij,ij->i", X, X))
        ny = np.sqrt(np.einsum("ij,ij->i", Y, Y))
        if np.any(nx == 0) or np.any(ny == 0):
            raise DomainError("cosine distance is undefined for zero vectors")
        return 1.0 - (X @ Y.T) / np.outer(nx, ny)
    if kind == "hellinger":
        sx = np.sqrt(np.maximum(X, 0.0))
        sy = np.sqrt(np.maximum(Y, 0.0))
        sq = ((sx[:, None, :] - sy[None, :, :]) ** 2).sum(axis=2)
        return np.sqrt(2.0 * sq)

    # remaining kinds are sums of per-feature terms of (x_j, y_j)
    xb = X[:, None, :]
    yb = Y[None, :, :]
    diff = xb - yb
    if kind == "euclidean":
        return np.sqrt((diff ** 2).sum(axis=2))
    if kind == "manhattan":
        return np.abs(diff).sum(axis=2)
    if kind == "minkowski":
        return (np.abs(diff) ** spec.p).sum(axis=2) ** (1.0 / spec.p)
    if kind == "lorentzian":
        return np.log1p(np.abs(diff)).sum(axis=2)
    if kind == "canberra":
        den = np.abs(xb) + np.abs(yb)
        term = np.where(den > 0, np.abs(diff) / np.where(den > 0, den, 1.0), 0.0)
        return term.sum(axis=2)
    if kind == "pearson-chi2":
        den = np.broadcast_to(yb, diff.shape) ** 2
        term = np.where(den > 0, diff ** 2 / np.where(den > 0, den, 1.0), 0.0)
        return term.sum(axis=2)
    if kind == "squared-chi":
        den = np.abs(xb + yb)
        term = np.where(den > 0, diff ** 2 / np.where(den > 0, den, 1.0), 0.0)
        return term.sum(axis=2)
    if kind == "jensen-shannon":
        s = xb + yb
        xs = np.broadcast_to(xb, s.shape)
        ys = np.broadcast_to(yb, s.shape)
        out = np.zeros(s.shape)
        for mass in (xs, ys):
            ok = (mass > 0) & (s > 0)
            ratio = np.where(ok, 2.0 * mass / np.where(ok, s, 1.0), 1.0)
            out += np.where(ok, mass * np.log(ratio), 0.0)
        return 0.5 * out.sum(axis=2)
    if kind == "vicis-symmetric":
        den = np.minimum(xb, yb) ** 2
        term = np.where(den > 0, diff ** 2 / np.where(den > 0, den, 1.0), 0.0)
        return term.sum(axis=2)
    if kind == "hassanat":
        m = np.minimum(xb, yb)
        mx = np.maximum(xb, yb)
        # the m >= 0 branch guarantees 1 + mx >= 1; guard the other lane
        nonneg = 1.0 - (1.0 + m) / np.where(m >= 0, 1.0 + mx, 1.0)
        shifted = 1.0 - (1.0 + m + np.abs(m)) / (1.0 + mx + np.abs(m))
        return np.where(m >= 0, nonneg, shifted).sum(axis=2)
    raise ConfigError(f"unknown metric kind: {kind!r}")  # unreachable for valid specs
