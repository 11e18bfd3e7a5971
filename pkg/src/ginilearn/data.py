"""Dataset ingestion, fold planning and noise injection.

All randomness in this module (and in the rest of the package) goes through
numpy's PCG64 generator via ``numpy.random.default_rng(seed)``, so fold
assignments and noise draws reproduce bit-for-bit across platforms for a
given seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, IngestError

__all__ = [
    "DataMatrix",
    "FoldPlan",
    "load_csv",
    "save_csv",
    "split_folds",
    "inject_noise",
    "load_manifest",
    "derive_seed",
]


@dataclass(frozen=True)
class DataMatrix:
    """An n x d numeric feature matrix with an optional label vector.

    Invariants enforced at construction: values are finite (no NaN/inf),
    labels (when present) are integers in ``[0, label_classes)``, and the
    matrix has at least one row and one column.  Arrays are frozen
    (non-writeable) so instances can be shared freely across threads.
    """

    values: np.ndarray
    labels: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DomainError(f"expected a 2-d matrix with rows>=1, cols>=1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("data matrix contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.ascontiguousarray(self.labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise DomainError("labels length must equal the number of rows")
            if labels.size and labels.min() < 0:
                raise DomainError("labels must be non-negative class ids")
            labels.flags.writeable = False
            object.__setattr__(self, "labels", labels)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != values.shape[1]:
                raise DomainError("feature_names length must equal the number of columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def label_classes(self) -> int:
        """Number of classes M; labels are ids in [0, M).  0 when unlabeled."""
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1

    def subset(self, index) -> "DataMatrix":
        """Row subset as a new DataMatrix (labels carried along)."""
        index = np.asarray(index)
        labels = self.labels[index] if self.labels is not None else None
        return DataMatrix(self.values[index], labels, self.feature_names)

    def without_labels(self) -> "DataMatrix":
        return DataMatrix(self.values, None, self.feature_names)


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic cross-validation fold assignment.

    ``assignments[i]`` is the fold id of row i; fold sizes differ by at
    most one, and the same (rows, n_folds, seed) always yields identical
    assignments.
    """

    n_folds: int
    seed: int
    assignments: np.ndarray

    def __post_init__(self):
        assignments = np.ascontiguousarray(self.assignments, dtype=np.int64)
        assignments.flags.writeable = False
        object.__setattr__(self, "assignments", assignments)

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def complement_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def _parse_number(token: str) -> float | None:
    """Parse a finite number, or None when the token is not numeric."""
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _encode_first_appearance(tokens: list[str]) -> np.ndarray:
    codes: dict[str, int] = {}
    out = np.empty(len(tokens), dtype=np.float64)
    for i, tok in enumerate(tokens):
        if tok not in codes:
            codes[tok] = len(codes)
        out[i] = codes[tok]
    return out


def _encode_labels(tokens: list[str]) -> np.ndarray:
    """Label ids in [0, M).

    Numeric label columns keep their numeric order (sorted distinct values
    map to 0..M-1); non-numeric labels are coded by first appearance.
    """
    numeric = [_parse_number(t) for t in tokens]
    if all(v is not None for v in numeric):
        distinct = sorted(set(numeric))
        mapping = {v: i for i, v in enumerate(distinct)}
        return np.array([mapping[v] for v in numeric], dtype=np.int64)
    return _encode_first_appearance(tokens).astype(np.int64)


def load_csv(path, label_col=None, has_header: bool = False) -> DataMatrix:
    """Load a comma-separated UTF-8 file into a DataMatrix.

    Parameters
    ----------
    path : str or Path
        CSV file.  Missing values are not supported and raise IngestError.
    label_col : int or str, optional
        Column index (negative allowed) or, with ``has_header``, a column
        name.  The column is removed from the features and encoded as
        integer class ids.
    has_header : bool
        Treat the first row as feature names.

    Columns where every cell parses as a finite number become numeric
    features; any other column is treated as categorical and encoded as
    ordinal integers in order of first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh)]
    rows = [row for row in rows if row]  # ignore completely blank lines
    if not rows:
        raise IngestError(f"empty file: {path}")

    header: list[str] | None = None
    if has_header:
        header = [tok.strip() for tok in rows[0]]
        rows = rows[1:]
        if not rows:
            raise IngestError(f"no data rows after header: {path}")

    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise IngestError(f"ragged row {i}: expected {width} cells, got {len(row)}")

    cells = [[tok.strip() for tok in row] for row in rows]
    for i, row in enumerate(cells):
        for j, tok in enumerate(row):
            if tok == "":
                raise IngestError(f"missing value at row {i}, col {j}")

    label_idx: int | None = None
    if label_col is not None:
        if isinstance(label_col, str):
            if header is None:
                raise IngestError("label_col by name requires has_header=True")
            try:
                label_idx = header.index(label_col)
            except ValueError:
                raise IngestError(f"no column named {label_col!r} in header") from None
        else:
            label_idx = int(label_col)
            if label_idx < 0:
                label_idx += width
            if not 0 <= label_idx < width:
                raise IngestError(f"label column {label_col} out of range for width {width}")

    labels = None
    if label_idx is not None:
        labels = _encode_labels([row[label_idx] for row in cells])

    feature_cols = [j for j in range(width) if j != label_idx]
    if not feature_cols:
        raise IngestError("no feature columns left after extracting the label column")

    columns = []
    for j in feature_cols:
        tokens = [row[j] for row in cells]
        numeric = [_parse_number(t) for t in tokens]
        if all(v is not None for v in numeric):
            columns.append(np.array(numeric, dtype=np.float64))
        elif any(v is None and _is_nan_token(t) for v, t in zip(numeric, tokens)):
            i = next(i for i, (v, t) in enumerate(zip(numeric, tokens)) if v is None and _is_nan_token(t))
            raise IngestError(f"unparseable numeric cell at row {i}, col {j}: {tokens[i]!r}")
        else:
            columns.append(_encode_first_appearance(tokens))

    names = None
    if header is not None:
        names = tuple(header[j] for j in feature_cols)
    return DataMatrix(np.column_stack(columns), labels, names)


def _is_nan_token(token: str) -> bool:
    # "nan"/"inf" float-parse but are rejected as non-finite; they mark a
    # numeric cell gone wrong rather than a categorical token.
    try:
        float(token)
    except ValueError:
        return False
    return True


def save_csv(data: DataMatrix, path, label_col_name: str = "label") -> None:
    """Write a DataMatrix back to CSV.

    Floats are written with ``repr`` so reloading reproduces every finite
    double bit-exactly.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if data.feature_names is not None:
            header = list(data.feature_names)
            if data.labels is not None:
                header.append(label_col_name)
            writer.writerow(header)
        for i in range(data.rows):
            row = [repr(float(v)) for v in data.values[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            writer.writerow(row)


def split_folds(data: DataMatrix, n_folds: int, seed: int) -> FoldPlan:
    """Seeded uniform shuffle followed by round-robin fold assignment."""
    if n_folds < 2:
        raise ConfigError(f"n_folds must be >= 2, got {n_folds}")
    if n_folds > data.rows:
        raise ConfigError(f"n_folds={n_folds} exceeds number of rows {data.rows}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(data.rows)
    assignments = np.empty(data.rows, dtype=np.int64)
    assignments[order] = np.arange(data.rows) % n_folds
    return FoldPlan(n_folds=n_folds, seed=seed, assignments=assignments)


def inject_noise(data: DataMatrix, level: float, seed: int) -> DataMatrix:
    """Add standard-normal noise to ceil(level * rows) rows.

    Rows are drawn uniformly without replacement; every feature of a
    selected row receives an independent N(0, 1) draw.  Labels are left
    untouched and the input matrix is not modified.
    """
    if not 0.0 < level < 1.0:
        raise ConfigError(f"noise level must lie in (0, 1), got {level}")
    n_noisy = math.ceil(level * data.rows)
    rng = np.random.default_rng(seed)
    idx = rng.choice(data.rows, size=n_noisy, replace=False)
    values = data.values.copy()
    values[idx] += rng.standard_normal((n_noisy, data.cols))
    return DataMatrix(values, data.labels, data.feature_names)


def load_manifest(path) -> dict[str, dict]:
    """Read a dataset manifest: name -> {path, label_col, n_classes, has_header?}.

    Relative dataset paths are resolved against the manifest's directory.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such manifest: {path}")
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise IngestError("manifest must be a JSON object mapping dataset name to entry")
    manifest = {}
    for name, entry in raw.items():
        if not isinstance(entry, dict) or "path" not in entry or "label_col" not in entry or "n_classes" not in entry:
            raise IngestError(f"manifest entry {name!r} must define path, label_col and n_classes")
        resolved = dict(entry)
        dataset_path = Path(entry["path"])
        if not dataset_path.is_absolute():
            dataset_path = path.parent / dataset_path
        resolved["path"] = str(dataset_path)
        resolved.setdefault("has_header", True)
        manifest[name] = resolved
    return manifest


def derive_seed(seed: int, *tags) -> int:
    """Stable child seed from a base seed and string/int tags.

    Uses SHA-256 rather than the builtin ``hash`` so derived streams are
    identical across interpreter runs and platforms.
    """
    digest = hashlib.sha256()
    digest.update(str(int(seed)).encode())
    for tag in tags:
        digest.update(b"\x1f")
        digest.update(str(tag).encode())
    return int.from_bytes(digest.digest()[:8], "big")
