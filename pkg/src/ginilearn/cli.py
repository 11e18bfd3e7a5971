"""Command-line driver.

Commands: ``bench`` (full manifest protocol), ``knn``, ``kmeans``,
``agglo`` (single-dataset ad-hoc runs), and ``rank-table`` (re-aggregate
saved report JSONs into a ranking CSV).  ``bench`` accepts a JSON config
file via --config; explicit flags override config-file values.  The
``GINILEARN_OUT_DIR`` environment variable sets the default output
directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agglomerative import agglomerative_fit
from .bench import BenchConfig, run_benchmark, write_rank_tables
from .data import load_csv, split_folds
from .errors import GinilearnError
from .evaluation import EvalReport, classification_report, hungarian_align
from .kmeans import DEFAULT_MAX_ITER, kmeans_fit, kmeanspp_init
from .knn import knn_fit, knn_predict
from .metrics import parse_metric


def _parse_int_list(text):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t]


def _parse_float_list(text):
    return [float(t) for t in text.split(",") if t]


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file")
    p.add_argument("--label-col", default=None, help="label column index or name")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--metric", default="euclidean", help='metric string, e.g. "gini-gen:nu=2.5"')


def _load(args):
    label_col = args.label_col
    if label_col is not None:
        try:
            label_col = int(label_col)
        except ValueError:
            pass
    return load_csv(args.data, label_col=label_col, has_header=not args.no_header)


def _emit(payload, out):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_bench(args):
    settings = {}
    if args.config:
        settings.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    overrides = {
        "manifest": args.manifest,
        "task": args.task,
        "metrics": tuple(args.metrics.split(",")) if args.metrics else None,
        "folds": args.folds,
        "seed": args.seed,
        "noise": args.noise,
        "k_range": tuple(_parse_int_list(args.k_range)) if args.k_range else None,
        "nu_grid": tuple(_parse_float_list(args.nu_grid)) if args.nu_grid else None,
        "k_clusters": args.k_clusters,
        "linkage": args.linkage,
        "objective": args.objective,
        "nu_select": args.nu_select,
        "out_dir": args.out_dir,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    config = BenchConfig.from_dict(settings)
    return run_benchmark(config)


def _cmd_knn(args):
    data = _load(args)
    spec = parse_metric(args.metric)
    if args.test:
        model = knn_fit(data, spec, args.k)
        test = load_csv(args.test, has_header=not args.no_header)
        pred = knn_predict(model, test)
        _emit({"predictions": pred.tolist(), "k": args.k, "metric": str(spec)}, args.out)
        return 0
    folds = split_folds(data, args.folds, args.seed)
    per_fold = []
    for f in range(folds.n_folds):
        model = knn_fit(data.subset(folds.complement_indices(f)), spec, args.k)
        pred = knn_predict(model, data.values[folds.fold_indices(f)])
        per_fold.append(classification_report(pred, data.labels[folds.fold_indices(f)]))
    report = EvalReport.from_folds(Path(args.data).stem, str(spec), per_fold, params={"k": args.k})
    _emit(report.to_dict(), args.out)
    return 0


def _cmd_kmeans(args):
    data = _load(args)
    spec = parse_metric(args.metric)
    k = args.k or data.label_classes
    init = kmeanspp_init(data.without_labels(), k, spec, seed=args.seed)
    model = kmeans_fit(data.without_labels(), k, spec, init, max_iter=args.max_iter)
    payload = {
        "metric": str(spec),
        "k": k,
        "labels": model.labels.tolist(),
        "iterations": model.iterations,
        "converged": model.converged,
        "objective_trace": list(model.objective_trace),
        "centroids": model.centroids.tolist(),
    }
    if data.labels is not None:
        size = max(k, data.label_classes)
        perm = hungarian_align(model.labels, data.labels, size)
        p, r, f1 = classification_report(perm[model.labels], data.labels)
        payload["aligned_scores"] = {"precision": p, "recall": r, "f1": f1}
    _emit(payload, args.out)
    return 0


def _cmd_agglo(args):
    data = _load(args)
    spec = parse_metric(args.metric)
    k = args.k or data.label_classes
    dendro, labels = agglomerative_fit(data.without_labels(), k, spec, linkage=args.linkage)
    payload = {
        "metric": str(spec),
        "k": k,
        "linkage": args.linkage,
        "labels": labels.tolist(),
        "dendrogram": json.loads(dendro.to_json()),
    }
    if data.labels is not None:
        size = max(k, data.label_classes)
        perm = hungarian_align(labels, data.labels, size)
        p, r, f1 = classification_report(perm[labels], data.labels)
        payload["aligned_scores"] = {"precision": p, "recall": r, "f1": f1}
    _emit(payload, args.out)
    return 0


def _cmd_rank_table(args):
    reports = []
    for path in sorted(Path(args.reports).glob("*.json")):
        reports.append(EvalReport.from_dict(json.loads(path.read_text(encoding="utf-8"))))
    if not reports:
        raise GinilearnError(f"no report JSONs under {args.reports}")
    # canonical row/column order, independent of filesystem enumeration
    reports.sort(key=lambda r: (r.spec, r.dataset))
    write_rank_tables(reports, args.out_dir, prefix=args.prefix)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ginilearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run the benchmark protocol over a manifest")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--manifest")
    p.add_argument("--task", choices=["knn", "kmeans", "agglo"])
    p.add_argument("--metrics", help="comma-separated metric strings")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--k-range", help='"1:11" or comma list')
    p.add_argument("--nu-grid", help="comma list of nu values")
    p.add_argument("--k-clusters", type=int)
    p.add_argument("--linkage", choices=["average", "ward"])
    p.add_argument("--objective", choices=["macro_f1", "precision", "recall"])
    p.add_argument("--nu-select", choices=["precision", "silhouette"])
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("knn", help="ad-hoc KNN run on one CSV")
    _add_data_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--test", help="CSV of query rows (no label column)")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_knn)

    p = sub.add_parser("kmeans", help="ad-hoc k-means run on one CSV")
    _add_data_args(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_kmeans)

    p = sub.add_parser("agglo", help="ad-hoc agglomerative clustering on one CSV")
    _add_data_args(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--linkage", choices=["average", "ward"], default="average")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_agglo)

    p = sub.add_parser("rank-table", help="re-aggregate saved reports into ranking CSVs")
    p.add_argument("--reports", required=True, help="directory of EvalReport JSONs")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="aggregated")
    p.set_defaults(func=_cmd_rank_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GinilearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
