#!/usr/bin/env python3
"""Export the UCI datasets that ship with scikit-learn (iris, wine,
breast-cancer) into data/ as plain CSVs plus the dataset manifest.

Only regeneration needs scikit-learn; the package itself never imports it.
Datasets that cannot be redistributed through scikit-learn (banknote,
glass, ...) are fetched separately by scripts/fetch_uci.py on machines
with network access.
"""

import json
from pathlib import Path

from sklearn.datasets import load_breast_cancer, load_iris, load_wine

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

IRIS_CLASS_NAMES = ("setosa", "versicolor", "virginica")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def export(name, bunch, label_names=None):
    header = [c.replace(" ", "_") for c in bunch.feature_names] + ["class"]
    rows = []
    for x, y in zip(bunch.data, bunch.target):
        label = label_names[y] if label_names else str(int(y))
        rows.append([repr(float(v)) for v in x] + [label])
    write_csv(DATA_DIR / f"{name}.csv", header, rows)
    return {
        "path": f"{name}.csv",
        "label_col": "class",
        "n_classes": int(bunch.target.max()) + 1,
        "has_header": True,
    }


def main():
    DATA_DIR.mkdir(exist_ok=True)
    manifest = {
        "iris": export("iris", load_iris(), IRIS_CLASS_NAMES),
        "wine": export("wine", load_wine()),
        "breast_cancer": export("breast_cancer", load_breast_cancer()),
    }
    with open(DATA_DIR / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(manifest)} datasets to {DATA_DIR}")


if __name__ == "__main__":
    main()
