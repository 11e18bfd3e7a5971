import json
from pathlib import Path

import numpy as np
import pytest

from ginilearn import DataMatrix, load_csv

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def iris() -> DataMatrix:
    return load_csv(DATA_DIR / "iris.csv", label_col="class", has_header=True)


@pytest.fixture(scope="session")
def wine() -> DataMatrix:
    return load_csv(DATA_DIR / "wine.csv", label_col="class", has_header=True)


@pytest.fixture(scope="session")
def breast_cancer() -> DataMatrix:
    return load_csv(DATA_DIR / "breast_cancer.csv", label_col="class", has_header=True)


@pytest.fixture(scope="session")
def manifest_path() -> Path:
    return DATA_DIR / "manifest.json"


def two_blobs(n_per_blob=20, d=2, separation=100.0, spread=1.0, seed=0):
    """Two far-apart gaussian blobs; labels 0/1 by blob."""
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, spread, size=(n_per_blob, d))
    b = rng.normal(separation, spread, size=(n_per_blob, d))
    values = np.vstack([a, b])
    labels = np.repeat([0, 1], n_per_blob)
    return DataMatrix(values, labels)
