#!/usr/bin/env python3
"""Desk-scale benchmark over the bundled datasets.

Runs the three task protocols (KNN grid search, k-means with Hungarian
alignment, agglomerative clustering) across the twelve experiment metrics
and writes reports plus ranking tables under bench-out/.  With --noise the
whole corpus is perturbed before splitting.

This is the full protocol at small scale; expect a few minutes for the
generalized-Gini KNN grids on breast_cancer.  Pass --fast to shrink the nu
grid for a quick end-to-end check.
"""

import argparse
import sys
from pathlib import Path

from ginilearn.bench import BenchConfig, run_benchmark

ROOT = Path(__file__).resolve().parent.parent

EXPERIMENT_METRICS = (
    "euclidean", "manhattan", "minkowski:p=3", "cosine", "hassanat", "canberra",
    "hellinger", "jensen-shannon", "pearson-chi2", "vicis-symmetric",
    "gini", "gini-gen:nu=2",
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", default=str(ROOT / "data" / "manifest.json"))
    parser.add_argument("--tasks", default="knn,kmeans,agglo")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=None)
    parser.add_argument("--out-dir", default=str(ROOT / "bench-out"))
    parser.add_argument("--fast", action="store_true", help="coarse nu grid")
    args = parser.parse_args()

    nu_grid = (0.5, 2.0, 3.5, 5.0) if args.fast else tuple()
    failures = 0
    for task in args.tasks.split(","):
        settings = dict(
            manifest=args.manifest, task=task, metrics=EXPERIMENT_METRICS,
            seed=args.seed, noise=args.noise,
            folds=3 if task in ("knn", "agglo") else 5,
            out_dir=str(Path(args.out_dir) / task),
        )
        if nu_grid:
            settings["nu_grid"] = nu_grid
        print(f"== task {task} -> {settings['out_dir']}")
        failures += run_benchmark(BenchConfig.from_dict(settings))
    print("done" if not failures else "done with dataset failures (see summary.json)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
