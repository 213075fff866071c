"""Command-line entry point: synth | extract | bench | detect | report.

A run is driven by a JSON config file plus flag overrides (flags win).
Identical config + seed produces byte-identical artifacts; wall-clock
timing is therefore opt-in and lands in separate files, leaving the main
report deterministic.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import audio_io
from .audio_io import SynthSpec, load_dataset, load_manifest, synthesize_dataset, write_corpus
from .classifiers import CLASSIFIER_REGISTRY, detect_actuation_cwt, make_classifier
from .evaluation import (
    MIXINGS,
    PROTOCOLS,
    ReportRow,
    build_dataset,
    evaluate,
    make_splits,
    render_report,
    time_benchmark,
    timing_dat,
    timing_json,
)
from .features import build_features, write_feature_block, write_feature_csv
from .framing import frame_signal

logger = logging.getLogger("rda_bench")

DEFAULT_FEATURES = ["mfcc", "cepst", "spect"]
DEFAULT_CLASSIFIERS = [
    {"name": "gmm", "k_max": 4, "cov_types": ["diag"]},
    {"name": "ada", "rounds": 60},
    {"name": "rf", "n_trees": 60},
    {"name": "svm", "kernel": "rbf", "C": 10.0},
]


@dataclass
class RunConfig:
    """Validated mirror of the JSON config file."""

    seed: int
    out: str = "runs/out"
    dataset: str | None = None
    synth: dict = field(default_factory=lambda: {"subjects": 3, "clips_per_subject": 8})
    features: list = field(default_factory=lambda: list(DEFAULT_FEATURES))
    classifiers: list = field(default_factory=lambda: [dict(c) for c in DEFAULT_CLASSIFIERS])
    protocols: list = field(default_factory=lambda: list(PROTOCOLS))
    mixing: list = field(default_factory=lambda: list(MIXINGS))
    frame_ms: float = 40.0
    hop_ms: float = 20.0
    window_frames: int = 15
    folds: int = 5
    jobs: int = 1
    timing: bool = False
    accuracy_mode: str = "pooled"


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge config file and flag overrides; unknown keys are rejected."""
    doc = {}
    if path is not None:
        doc = json.loads(Path(path).read_text())
        if not isinstance(doc, dict):
            raise ValueError(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if "seed" not in doc:
        raise ValueError("a seed is mandatory (config key 'seed' or --seed)")
    cfg = RunConfig(**doc)
    for kind in cfg.features:
        from .features import FEATURE_KINDS

        if kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {kind!r}")
    for spec in cfg.classifiers:
        if spec.get("name") not in CLASSIFIER_REGISTRY:
            raise ValueError(f"unknown classifier {spec.get('name')!r}")
    for protocol in cfg.protocols:
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
    for mixing in cfg.mixing:
        if mixing not in MIXINGS:
            raise ValueError(f"unknown mixing {mixing!r}")
    return cfg


def _corpus_for(cfg: RunConfig):
    if cfg.dataset:
        manifest = load_manifest(cfg.dataset)
        return manifest, load_dataset(manifest)
    spec = SynthSpec(seed=cfg.seed, **cfg.synth)
    return synthesize_dataset(spec)


def cmd_synth(cfg: RunConfig) -> int:
    manifest, records = _corpus_for(cfg)
    out = Path(cfg.out)
    manifest_path = write_corpus(manifest, records, out)
    digest = hashlib.sha256(manifest_path.read_bytes()).hexdigest()
    print(f"wrote {len(records)} clips under {out}")
    print(f"manifest {manifest_path} sha256 {digest}")
    return 0


def cmd_extract(cfg: RunConfig) -> int:
    _, records = _corpus_for(cfg)
    out = Path(cfg.out) / "features"
    out.mkdir(parents=True, exist_ok=True)
    cache_path = out / "cache.json"
    cache = json.loads(cache_path.read_text()) if cache_path.exists() else {}
    written = skipped = 0
    for record in records:
        clip = record.clip
        content = hashlib.sha256(clip.samples.tobytes()).hexdigest()
        for kind in cfg.features:
            key = f"{clip.clip_id}__{kind}"
            stamp = f"{content}:{cfg.frame_ms}:{cfg.hop_ms}"
            target = out / f"{key}.fmx"
            if cache.get(key) == stamp and target.exists():
                skipped += 1
                continue
            series = frame_signal(clip, cfg.frame_ms, cfg.hop_ms)
            matrix = build_features(series, kind)
            write_feature_block(matrix, target)
            write_feature_csv(matrix, out / f"{key}.csv")
            cache[key] = stamp
            written += 1
    cache_path.write_text(json.dumps(cache, indent=2, sort_keys=True) + "\n")
    print(f"extracted {written} feature files ({skipped} cached) under {out}")
    return 0


def _classifier_label(spec: dict) -> str:
    return spec["name"]


def _fold_seed(seed: int, c_idx: int, k_idx: int, protocol: str, mixing: str,
               f_idx: int) -> int:
    entropy = (seed, c_idx, k_idx, PROTOCOLS.index(protocol), MIXINGS.index(mixing), f_idx)
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _bench_cell(cfg: RunConfig, dataset, mixing: str, protocol: str,
                c_idx: int, spec: dict, k_idx: int, kind: str) -> ReportRow:
    name = spec["name"]
    params = {k: v for k, v in spec.items() if k != "name"}
    plan = make_splits(dataset.segment_labels, dataset.segment_subjects,
                       protocol, mixing, seed=cfg.seed, k=cfg.folds)

    def factory(f_idx: int):
        return make_classifier(
            name, seed=_fold_seed(cfg.seed, c_idx, k_idx, protocol, mixing, f_idx), **params
        )

    result = evaluate(plan, factory, dataset, accuracy_mode=cfg.accuracy_mode)
    logger.info("bench %s/%s %s-%s: accuracy %.2f%%",
                mixing, protocol, name, kind, 100.0 * result.accuracy)
    return ReportRow(
        mixing=mixing,
        classifier=name,
        feature=kind,
        protocol=protocol,
        accuracy_pct=100.0 * result.accuracy,
        f1_pct={lbl: 100.0 * f1 for lbl, f1 in result.class_f1().items()},
    )


def cmd_bench(cfg: RunConfig, fmt: str = "text") -> int:
    _, records = _corpus_for(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    datasets = {
        kind: build_dataset(records, kind, cfg.frame_ms, cfg.hop_ms, cfg.window_frames)
        for kind in cfg.features
    }
    cells = [
        (mixing, protocol, c_idx, spec, k_idx, kind)
        for mixing in cfg.mixing
        for protocol in cfg.protocols
        for c_idx, spec in enumerate(cfg.classifiers)
        for k_idx, kind in enumerate(cfg.features)
    ]
    if cfg.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(
                lambda cell: _bench_cell(cfg, datasets[cell[5]], *cell), cells
            ))
    else:
        rows = [_bench_cell(cfg, datasets[cell[5]], *cell) for cell in cells]

    if cfg.timing:
        for spec in cfg.classifiers:
            name = spec["name"]
            params = {k: v for k, v in spec.items() if k != "name"}
            for kind in cfg.features:
                dataset = datasets[kind]
                clf = make_classifier(name, seed=cfg.seed, **params)
                clf.fit(dataset.segment_vectors, dataset.segment_labels)
                timing = time_benchmark(clf, kind, records, cfg.frame_ms, cfg.hop_ms)
                for row in rows:
                    if row.classifier == name and row.feature == kind:
                        row.feat_time_s = timing.feature_time_s
                        row.cls_time_s = timing.classify_time_s
        (out / "timing.json").write_text(timing_json(rows))
        (out / "timing.dat").write_text(timing_dat(rows))

    (out / "report.csv").write_text(render_report(rows, "csv"))
    (out / "report.txt").write_text(render_report(rows, "text"))
    print(render_report(rows, fmt), end="")
    print(f"report written to {out / 'report.csv'}")
    return 0


def cmd_detect(cfg: RunConfig, wav: str) -> int:
    path = Path(wav)
    if not path.exists():
        print(f"error: no such file {path}", file=sys.stderr)
        return 2
    clip = audio_io.load_wav(path)
    events = detect_actuation_cwt(clip)
    for t in events:
        print(f"{t:.3f}")
    print(f"{len(events)} actuation event(s) detected", file=sys.stderr)
    return 0


def cmd_report(cfg: RunConfig, source: str, fmt: str) -> int:
    path = Path(source)
    if not path.exists():
        print(f"error: no such report {path}", file=sys.stderr)
        return 2
    rows = _rows_from_csv(path)
    print(render_report(rows, fmt), end="")
    return 0


def _rows_from_csv(path: Path) -> list[ReportRow]:
    from .audio_io import CLASS_LABELS
    from .evaluation import CSV_HEADER

    lines = path.read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} does not look like a benchmark report")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append(ReportRow(
            mixing=cells[0], classifier=cells[1], feature=cells[2], protocol=cells[3],
            accuracy_pct=float(cells[4]),
            f1_pct={lbl: float(cells[5 + i]) for i, lbl in enumerate(CLASS_LABELS)},
            feat_time_s=float(cells[9]) if cells[9] else None,
            cls_time_s=float(cells[10]) if cells[10] else None,
        ))
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rda-bench",
        description="Respiratory/actuation sound classification benchmark",
    )
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--jobs", type=int,
                        help="worker count; falls back to $RDA_BENCH_JOBS, then 1")
    parser.add_argument("--format", choices=("csv", "text", "json"), default="text",
                        help="stdout rendering for bench/report")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", help="write a synthetic corpus to disk")
    sub.add_parser("extract", help="write per-clip feature files")
    bench = sub.add_parser("bench", help="run the benchmark grid")
    bench.add_argument("--timing", action="store_true",
                       help="also measure per-segment stage timings (non-deterministic)")
    detect = sub.add_parser("detect", help="detect actuation events in one WAV file")
    detect.add_argument("wav", help="path to a mono PCM WAV file")
    report = sub.add_parser("report", help="re-render an existing report.csv")
    report.add_argument("source", help="path to report.csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    jobs = args.jobs
    if jobs is None:
        jobs = int(os.environ.get("RDA_BENCH_JOBS", "1"))
    overrides = {"seed": args.seed, "out": args.out, "jobs": jobs}
    if getattr(args, "timing", False):
        overrides["timing"] = True
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "extract":
            return cmd_extract(cfg)
        if args.command == "bench":
            return cmd_bench(cfg, fmt=args.format)
        if args.command == "detect":
            return cmd_detect(cfg, args.wav)
        if args.command == "report":
            return cmd_report(cfg, args.source, args.format)
        raise ValueError(f"unknown command {args.command!r}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
