"""End-to-end benchmark protocols over a dataset manifest.

Per (dataset, metric) cell the task protocol runs:

* knn    -- optional noise, fold plan, grid search over (k, nu) with the
            configured objective, winner's cross-validated scores.
* kmeans -- per fold: k-means++ centroids computed once under the
            euclidean spec on the fold's training part and shared by every
            metric; fit on the training part, predict the held-out part,
            align predicted clusters to the true labels (Kuhn-Munkres) and
            score.  gini-gen selects nu either by held-out precision or by
            the silhouette procedure.
* agglo  -- optional noise; per fold the fold's rows are clustered
            transductively, aligned, and scored.

Every random draw comes from a seed derived from (seed, dataset, role,
fold), so results do not depend on execution order.  Reports serialize to
JSON with sorted keys; reruns with identical configs produce identical
bytes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agglomerative import agglomerative_fit
from .data import DataMatrix, derive_seed, inject_noise, load_csv, load_manifest, split_folds
from .errors import ConfigError, GinilearnError
from .evaluation import EvalReport, classification_report, hungarian_align, rank_table
from .kmeans import default_nu_grid, kmeans_fit, kmeans_predict, kmeanspp_init, select_nu_silhouette
from .knn import DEFAULT_K_RANGE, knn_grid_search
from .metrics import MetricSpec, parse_metric

__all__ = ["BenchConfig", "run_benchmark", "write_rank_tables"]

_EUCLIDEAN = MetricSpec("euclidean")


@dataclass(frozen=True)
class BenchConfig:
    """Validated benchmark configuration.

    ``metrics`` are metric strings ("euclidean", "gini-gen:nu=2.48", ...);
    invalid strings are rejected at construction with the offending text.
    """

    manifest: str
    task: str
    metrics: tuple = ("euclidean",)
    folds: int = 5
    seed: int = 0
    noise: float | None = None
    k_range: tuple = DEFAULT_K_RANGE
    nu_grid: tuple = tuple(default_nu_grid())
    k_clusters: int | None = None
    linkage: str = "average"
    objective: str = "macro_f1"
    nu_select: str = "precision"
    out_dir: str = field(default_factory=lambda: os.environ.get("GINILEARN_OUT_DIR", "bench-out"))

    def __post_init__(self):
        if self.task not in ("knn", "kmeans", "agglo"):
            raise ConfigError(f"unknown task: {self.task!r}")
        if not self.metrics:
            raise ConfigError("metrics list is empty")
        for text in self.metrics:
            parse_metric(text)  # raises ConfigError naming the offending string
        if self.noise is not None and not 0.0 < self.noise < 1.0:
            raise ConfigError(f"noise level must lie in (0, 1), got {self.noise}")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.linkage not in ("average", "ward"):
            raise ConfigError(f"unknown linkage: {self.linkage!r}")
        if self.objective not in ("macro_f1", "precision", "recall"):
            raise ConfigError(f"unknown objective: {self.objective!r}")
        if self.nu_select not in ("precision", "silhouette"):
            raise ConfigError(f"unknown nu_select: {self.nu_select!r}")
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "k_range", tuple(int(k) for k in self.k_range))
        object.__setattr__(self, "nu_grid", tuple(float(v) for v in self.nu_grid))

    @classmethod
    def from_dict(cls, d: dict) -> "BenchConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _load_dataset(entry) -> DataMatrix:
    return load_csv(entry["path"], label_col=entry["label_col"],
                    has_header=entry.get("has_header", True))


def _spec_slug(text: str) -> str:
    return text.replace(":", "_").replace("=", "-")


def _knn_cell(config, name, data, folds, spec_text) -> EvalReport:
    spec = parse_metric(spec_text)
    nu_grid = config.nu_grid if spec.kind == "gini-gen" else None
    best_k, best_nu, report = knn_grid_search(
        data, spec, k_range=config.k_range, nu_grid=nu_grid, folds=folds,
        objective=config.objective)
    params = {"k": best_k}
    if best_nu is not None:
        params["nu"] = best_nu
    elif spec.is_gini:
        params["nu"] = spec.effective_nu
    return EvalReport.from_folds(name, spec_text, report.per_fold, params=params)


def _kmeans_protocol(config, name, data, folds, spec, inits):
    """One full CV pass for a fixed spec; returns (per_fold scores, mean iterations)."""
    per_fold, iters = [], []
    k = config.k_clusters or data.label_classes
    for f in range(folds.n_folds):
        tr = data.subset(folds.complement_indices(f))
        te = data.subset(folds.fold_indices(f))
        model = kmeans_fit(tr.without_labels(), k, spec, inits[f])
        pred = kmeans_predict(model, te.without_labels())
        size = max(k, te.label_classes)
        perm = hungarian_align(pred, te.labels, size)
        per_fold.append(classification_report(perm[pred], te.labels))
        iters.append(model.iterations)
    return per_fold, float(np.mean(iters))


def _kmeans_cell(config, name, data, folds, spec_text) -> EvalReport:
    spec = parse_metric(spec_text)
    k = config.k_clusters or data.label_classes
    if k < 1:
        raise ConfigError(f"dataset {name!r} has no labels; set k_clusters")
    inits = [kmeanspp_init(data.subset(folds.complement_indices(f)).without_labels(), k,
                           _EUCLIDEAN, seed=derive_seed(config.seed, name, "init", f))
             for f in range(folds.n_folds)]
    params = {"k_clusters": k}
    if spec.kind == "gini-gen":
        if config.nu_select == "silhouette":
            nu = select_nu_silhouette(data.without_labels(), k, config.nu_grid,
                                      n_folds=config.folds,
                                      seed=derive_seed(config.seed, name, "nu-select"))
            spec = MetricSpec("gini-gen", nu=nu)
            per_fold, mean_iters = _kmeans_protocol(config, name, data, folds, spec, inits)
        else:  # precision-maximizing grid search; ties keep the smaller nu
            best = None
            for nu in sorted(config.nu_grid):
                cand_spec = MetricSpec("gini-gen", nu=nu)
                per_fold_nu, iters_nu = _kmeans_protocol(config, name, data, folds, cand_spec, inits)
                precision = float(np.mean([s[0] for s in per_fold_nu]))
                if best is None or precision > best[0]:
                    best = (precision, nu, per_fold_nu, iters_nu)
            _, nu, per_fold, mean_iters = best
        params["nu"] = nu
    else:
        per_fold, mean_iters = _kmeans_protocol(config, name, data, folds, spec, inits)
        if spec.is_gini:
            params["nu"] = spec.effective_nu
    return EvalReport.from_folds(name, spec_text, per_fold, iterations=mean_iters, params=params)


def _agglo_cell(config, name, data, folds, spec_text) -> EvalReport:
    spec = parse_metric(spec_text)
    k = config.k_clusters or data.label_classes
    if k < 1:
        raise ConfigError(f"dataset {name!r} has no labels; set k_clusters")
    per_fold = []
    for f in range(folds.n_folds):
        sub = data.subset(folds.fold_indices(f))
        _, pred = agglomerative_fit(sub.without_labels(), k, spec, linkage=config.linkage)
        size = max(k, sub.label_classes)
        perm = hungarian_align(pred, sub.labels, size)
        per_fold.append(classification_report(perm[pred], sub.labels))
    return EvalReport.from_folds(name, spec_text, per_fold,
                                 params={"k_clusters": k, "linkage": config.linkage})


_CELL_RUNNERS = {"knn": _knn_cell, "kmeans": _kmeans_cell, "agglo": _agglo_cell}


def run_benchmark(config: BenchConfig) -> int:
    """Run the configured task over every (dataset, metric) cell.

    Writes one EvalReport JSON per cell, a ranking CSV per measure, an
    iterations CSV for the kmeans task, and a summary JSON.  A failing
    dataset aborts that dataset only; the exit code is 0 iff no dataset
    failed.
    """
    manifest = load_manifest(config.manifest)
    out_dir = Path(config.out_dir)
    (out_dir / "reports").mkdir(parents=True, exist_ok=True)
    runner = _CELL_RUNNERS[config.task]

    reports: list[EvalReport] = []
    failures: dict[str, str] = {}
    for name, entry in manifest.items():
        try:
            data = _load_dataset(entry)
            if config.noise is not None:
                data = inject_noise(data, config.noise, seed=derive_seed(config.seed, name, "noise"))
            folds = split_folds(data, config.folds, seed=derive_seed(config.seed, name, "folds"))
            for spec_text in config.metrics:
                reports.append(runner(config, name, data, folds, spec_text))
        except GinilearnError as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"
            reports = [r for r in reports if r.dataset != name]

    for rep in reports:
        path = out_dir / "reports" / f"{config.task}_{rep.dataset}_{_spec_slug(rep.spec)}.json"
        path.write_text(json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")

    if reports:
        write_rank_tables(reports, out_dir, prefix=config.task)
    if config.task == "kmeans" and reports:
        lines = ["dataset,metric,mean_iterations"]
        for rep in reports:
            lines.append(f"{rep.dataset},{rep.spec},{rep.iterations:g}")
        (out_dir / f"iterations_{config.task}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    summary = {
        "task": config.task,
        "datasets": sorted({r.dataset for r in reports}),
        "metrics": list(config.metrics),
        "failures": failures,
        "seed": config.seed,
        "noise": config.noise,
        "folds": config.folds,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n",
                                          encoding="utf-8")
    return 0 if not failures else 1


def write_rank_tables(reports, out_dir, prefix: str) -> None:
    """One competition-ranking CSV per measure, paper-table orientation."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    datasets = {r.dataset for r in reports}
    for measure in ("precision", "recall", "f1"):
        try:
            table = rank_table(reports, measure=measure)
        except ConfigError:
            continue  # incomplete grid (some dataset failed): skip the table
        if len(datasets) >= 1:
            (out_dir / f"ranking_{prefix}_{measure}.csv").write_text(table.to_csv(), encoding="utf-8")
