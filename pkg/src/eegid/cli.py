"""Command-line front end: ingest -> features -> evaluate -> report.

Progress goes to stderr; machine-readable results only to files.  Exit
codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import pickle
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import connectivity, dsp, evaluation, graph
from .errors import (
    EegIdError,
    NoConvergence,
    UnstableDesign,
)
from .io_ingest import build_corpus, load_manifest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _log(msg):
    print(msg, file=sys.stderr)


def _corpus_hash(manifest_path, channel_policy=None) -> str:
    h = hashlib.sha256()
    manifest = load_manifest(manifest_path)
    if channel_policy is not None:
        manifest = replace(manifest, channel_policy=channel_policy)
    h.update(repr((manifest.target_rate_hz, manifest.channel_policy)).encode())
    for entry in manifest.entries:
        h.update(repr((entry.subject_id, entry.dataset_id, entry.condition,
                       entry.window_s, entry.format)).encode())
        h.update(Path(entry.path).read_bytes())
    return h.hexdigest()[:16]


def _cached_corpus(manifest_path, cache_dir, channel_policy=None):
    """Build (or reuse) the corpus cache; returns (corpus, hash, was_cached)."""
    digest = _corpus_hash(manifest_path, channel_policy)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_file = cache_dir / f"corpus-{digest}.pkl"
    if cache_file.exists():
        with open(cache_file, "rb") as fh:
            return pickle.load(fh), digest, True
    manifest = load_manifest(manifest_path)
    if channel_policy is not None:
        manifest = replace(manifest, channel_policy=channel_policy)
    corpus = build_corpus(manifest)
    with open(cache_file, "wb") as fh:
        pickle.dump(corpus, fh)
    return corpus, digest, False


def cmd_ingest(args) -> int:
    corpus, digest, cached = _cached_corpus(args.manifest, args.out)
    if cached:
        _log(f"cache hit: corpus-{digest}.pkl (no recompute)")
    subjects = sorted({r.label for r in corpus})
    rates = sorted({r.sampling_rate_hz for r in corpus})
    _log(f"corpus {digest}: {len(corpus)} recordings, {len(subjects)} subjects, "
         f"rates {rates} Hz")
    return EXIT_OK


def cmd_features(args) -> int:
    if args.metric not in connectivity.METRICS:
        _log(f"unknown metric {args.metric!r}; valid: {', '.join(connectivity.METRICS)}")
        return EXIT_USAGE
    if args.gb is not None and args.gb not in graph.GRAPH_METRICS:
        _log(f"unknown graph metric {args.gb!r}; valid: {', '.join(graph.GRAPH_METRICS)}")
        return EXIT_USAGE
    if args.band not in dsp.BANDS:
        _log(f"unknown band {args.band!r}; valid: {', '.join(sorted(dsp.BANDS))}")
        return EXIT_USAGE
    corpus, digest, _ = _cached_corpus(args.manifest, args.cache)
    config = evaluation.ExperimentConfig(
        metric=args.metric, band=args.band, gb_metric=args.gb,
        epoch_length_s=args.epoch_length, seed=args.seed,
        filter_order=args.filter_order, notch_hz=args.notch_hz,
        notch_q=args.notch_q,
    )
    epochs = evaluation.band_epochs(corpus, config, args.condition)
    features, labels = evaluation.epoch_features(
        epochs, args.metric, args.gb, workers=args.workers)
    with open(args.out, "w", encoding="utf-8") as fh:
        n_feat = features.shape[1]
        fh.write("dataset_id,subject_id,condition," +
                 ",".join(f"f{i}" for i in range(n_feat)) + "\n")
        for epoch, row in zip(epochs, features):
            fh.write(f"{epoch.dataset_id},{epoch.subject_id},{epoch.condition},")
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    _log(f"wrote {features.shape[0]} x {n_feat} feature matrix to {args.out} "
         f"(corpus {digest})")
    return EXIT_OK


def _load_run_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    doc.setdefault("gb_metrics", [None])
    doc.setdefault("epoch_lengths_s", [4.0])
    doc.setdefault("channel_policies", [None])
    doc.setdefault("conditions", [["resting", "resting"]])
    doc.setdefault("seed", 0)
    doc.setdefault("workers", 1)
    doc.setdefault("k1", 10)
    doc.setdefault("k2", 3)
    base = Path(path).parent
    manifest = Path(doc["manifest"])
    if not manifest.is_absolute():
        manifest = base / manifest
    doc["manifest"] = str(manifest)
    doc.setdefault("cache_dir", str(base / "cache"))
    return doc


def _grid_configs(doc, args):
    for policy in doc["channel_policies"]:
        for band in doc["bands"]:
            for metric in doc["metrics"]:
                for gb in doc["gb_metrics"]:
                    for length in doc["epoch_lengths_s"]:
                        for train_cond, test_cond in doc["conditions"]:
                            yield policy, evaluation.ExperimentConfig(
                                metric=metric, band=band, gb_metric=gb,
                                epoch_length_s=float(length),
                                train_condition=train_cond,
                                test_condition=test_cond,
                                seed=int(doc["seed"]),
                                k1=int(doc["k1"]),
                                k2=int(doc["k2"]),
                                filter_order=args.filter_order,
                                notch_hz=args.notch_hz,
                                notch_q=args.notch_q,
                            )


def cmd_evaluate(args) -> int:
    doc = _load_run_config(args.config)
    if not doc.get("bands") or not doc.get("metrics"):
        _log("experiment grid is empty: config needs non-empty bands and metrics")
        return EXIT_USAGE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = args.workers if args.workers is not None else int(doc["workers"])
    reports = []
    for policy, config in _grid_configs(doc, args):
        corpus, digest, _ = _cached_corpus(doc["manifest"], doc["cache_dir"],
                                           channel_policy=policy)
        _log(f"running {config.name()} [{policy or 'manifest policy'}]")
        report = evaluation.run_experiment(
            corpus, config, workers=workers,
            feature_cache_dir=doc["cache_dir"],
            cache_tag=f"{digest}-{policy or 'manifest'}",
        )
        stem = f"{policy or 'default'}_{config.name()}"
        with open(out_dir / f"{stem}.json", "w", encoding="utf-8") as fh:
            fh.write(evaluation.report_to_json(report))
            fh.write("\n")
        with open(out_dir / f"{stem}_confusion.csv", "w", encoding="utf-8") as fh:
            evaluation.confusion_to_csv(report.cv.confusion, report.cv.class_order, fh)
        with open(out_dir / f"{stem}_confusion.pgm", "wb") as fh:
            evaluation.confusion_to_pgm(report.cv.confusion, fh)
        reports.append((policy, report))
        _log(f"  accuracy {report.cv.mean_accuracy:.4f} "
             f"+/- {report.cv.standard_error:.4f}")
    _write_rollup(out_dir, [r.to_dict() for _, r in reports])
    return EXIT_OK


def _write_rollup(out_dir: Path, report_dicts):
    """Accuracy roll-up: one row per config, one column per band."""
    bands = [b.name for b in dsp.ANALYSIS_BANDS] + ["broadband"]
    rows = {}
    for d in report_dicts:
        cfg = d["config"]
        key = (cfg["metric"], cfg["gb_metric"] or "-", f"{cfg['epoch_length_s']:g}",
               cfg["train_condition"], cfg["test_condition"])
        cell = f"{100 * d['mean_accuracy']:.1f}+/-{100 * d['standard_error']:.1f}"
        rows.setdefault(key, {})[cfg["band"]] = cell
    with open(out_dir / "rollup.csv", "w", encoding="utf-8") as fh:
        fh.write("metric,gb_metric,epoch_s,train,test," + ",".join(bands) + "\n")
        for key in sorted(rows):
            cells = [rows[key].get(b, "") for b in bands]
            fh.write(",".join(key) + "," + ",".join(cells) + "\n")


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    report_files = sorted(p for p in out_dir.glob("*.json")
                          if not p.name.endswith("_confusion.json"))
    if not report_files:
        _log(f"no report files found in {out_dir}")
        return EXIT_USAGE
    dicts = []
    for path in report_files:
        with open(path, "r", encoding="utf-8") as fh:
            dicts.append(json.load(fh))
    _write_rollup(out_dir, dicts)
    _log(f"rebuilt rollup.csv from {len(dicts)} report(s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegid",
        description="EEG biometric identification from functional connectivity",
    )
    parser.add_argument("--notch-hz", type=float, default=50.0,
                        help="line-noise notch frequency (0 disables)")
    parser.add_argument("--notch-q", type=float, default=30.0,
                        help="notch quality factor")
    parser.add_argument("--filter-order", type=int, default=4,
                        help="Butterworth prototype order (even, 2-8)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, resample and cache a corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="cache directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="emit a labeled feature CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--cache", default="cache", help="corpus cache directory")
    p.add_argument("--band", required=True)
    p.add_argument("--metric", required=True, help="COR | PLV | PLI")
    p.add_argument("--gb", default=None, help="optional graph metric: ND | EC | BC | CC")
    p.add_argument("--epoch-length", type=float, default=4.0)
    p.add_argument("--condition", default="resting")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("evaluate", help="run an experiment grid from a config file")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--workers", type=int, default=None,
                   help="override the config worker count")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="rebuild the roll-up table from report files")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (UnstableDesign, NoConvergence, np.linalg.LinAlgError) as exc:
        _log(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except (EegIdError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        _log(f"data error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
