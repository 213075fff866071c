"""Cross-validation protocols, metrics, timing, and report rendering.

The splitting unit is the annotated segment. Training always uses the
segment examples (one pooled feature vector per single-class segment);
"mixed" test sets instead use fixed-length sliding windows labeled by their
central frame, each window charged to the segment that owns its center.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .audio_io import CLASS_LABELS, ClipRecord, non_overlapping
from .features import build_features
from .framing import frame_signal


PROTOCOLS = ("MultiSubj", "SingleSubj", "LOSO")
MIXINGS = ("non-mixed", "mixed")

# report column names for the class F1 scores, in CLASS_LABELS order
F1_COLUMNS = {"actuation": "drug_f1", "exhalation": "exhale_f1",
              "inhalation": "inhale_f1", "noise": "noise_f1"}


# ---------------------------------------------------------------------------
# Dataset assembly
# ---------------------------------------------------------------------------

@dataclass
class BenchDataset:
    """Pooled feature vectors for segments (train / non-mixed test) and
    center-labeled windows (mixed test)."""

    kind: str
    segment_vectors: np.ndarray   # (S, d)
    segment_labels: list[str]
    segment_subjects: list[str]
    window_vectors: np.ndarray    # (W, d)
    window_labels: list[str]
    window_segment: np.ndarray    # (W,) owning segment id
    meta: dict = field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return self.segment_vectors.shape[0]


def _frame_segment_ids(frame_times, segments) -> np.ndarray:
    """Segment index owning each frame center, -1 when uncovered."""
    ids = np.full(len(frame_times), -1, dtype=np.int64)
    for si, seg in enumerate(segments):
        inside = (frame_times >= seg.start) & (frame_times < seg.end)
        ids[inside] = si
    return ids


def build_dataset(records: list[ClipRecord], kind: str, frame_ms: float = 40.0,
                  hop_ms: float = 20.0, window_frames: int = 15,
                  feature_params: dict | None = None) -> BenchDataset:
    """Extract one feature kind over a corpus and pool it into examples."""
    feature_params = feature_params or {}
    seg_vectors, seg_labels, seg_subjects = [], [], []
    win_vectors, win_labels, win_segment = [], [], []
    next_id = 0
    for record in records:
        segments = non_overlapping(record.segments)
        try:
            series = frame_signal(record.clip, frame_ms, hop_ms)
        except ValueError:
            warnings.warn(f"clip {record.clip.clip_id!r} shorter than one frame; skipped",
                          stacklevel=2)
            continue
        rows = build_features(series, kind, **feature_params).data
        owner = _frame_segment_ids(series.frame_times, segments)

        local_ids = {}
        for si, seg in enumerate(segments):
            mask = owner == si
            if not np.any(mask):
                warnings.warn(
                    f"segment {si} of {record.clip.clip_id!r} covers no frame centers",
                    stacklevel=2,
                )
                continue
            local_ids[si] = next_id
            seg_vectors.append(rows[mask].mean(axis=0))
            seg_labels.append(seg.label)
            seg_subjects.append(record.clip.subject_id)
            next_id += 1

        n_frames = rows.shape[0]
        if n_frames >= window_frames:
            center_off = (window_frames - 1) // 2
            for pos in range(0, n_frames - window_frames + 1):
                center = pos + center_off
                si = owner[center]
                if si < 0 or si not in local_ids:
                    continue
                win_vectors.append(rows[pos : pos + window_frames].mean(axis=0))
                win_labels.append(segments[si].label)
                win_segment.append(local_ids[si])

    if not seg_vectors:
        raise ValueError("corpus produced no segment examples")
    return BenchDataset(
        kind=kind,
        segment_vectors=np.asarray(seg_vectors),
        segment_labels=seg_labels,
        segment_subjects=seg_subjects,
        window_vectors=(np.asarray(win_vectors) if win_vectors
                        else np.empty((0, np.asarray(seg_vectors).shape[1]))),
        window_labels=win_labels,
        window_segment=np.asarray(win_segment, dtype=np.int64),
        meta={"frame_ms": frame_ms, "hop_ms": hop_ms, "window_frames": window_frames,
              **feature_params},
    )


# ---------------------------------------------------------------------------
# Split plans
# ---------------------------------------------------------------------------

@dataclass
class Fold:
    train_ids: np.ndarray
    test_ids: np.ndarray
    subject: str | None = None


@dataclass
class SplitPlan:
    protocol: str
    mixing: str
    folds: list[Fold]


def _stratified_deal(ids: np.ndarray, labels, k: int, rng: np.random.Generator,
                     context: str) -> list[list[int]]:
    """Deal ids into k folds, class by class, with a rotating offset so fold
    sizes stay within one of each other."""
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for label in CLASS_LABELS:
        members = np.array([i for i in ids if labels[i] == label], dtype=np.int64)
        if members.size == 0:
            continue
        if members.size < k:
            warnings.warn(
                f"{context}: only {members.size} {label!r} segments for {k} folds; "
                "stratification relaxed",
                stacklevel=3,
            )
        members = members[rng.permutation(members.size)]
        for pos, ident in enumerate(members):
            folds[(pos + offset) % k].append(int(ident))
        offset = (offset + members.size) % k
    return folds


def make_splits(labels, subjects, protocol: str, mixing: str, seed: int,
                k: int = 5) -> SplitPlan:
    """Build the fold plan over segment ids for one protocol.

    MultiSubj: stratified k-fold over all segments. SingleSubj: stratified
    k-fold within each subject (folds tagged by subject; downstream accuracy
    averages subjects). LOSO: one fold per subject, testing on the held-out
    subject only.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if mixing not in MIXINGS:
        raise ValueError(f"unknown mixing {mixing!r}")
    labels = list(labels)
    subjects = list(subjects)
    n = len(labels)
    all_ids = np.arange(n, dtype=np.int64)
    subject_order = sorted(set(subjects))

    folds: list[Fold] = []
    if protocol == "MultiSubj":
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
        dealt = _stratified_deal(all_ids, labels, k, rng, "MultiSubj")
        for part in dealt:
            test = np.array(sorted(part), dtype=np.int64)
            train = np.setdiff1d(all_ids, test)
            folds.append(Fold(train_ids=train, test_ids=test))
    elif protocol == "SingleSubj":
        for s_idx, subject in enumerate(subject_order):
            ids = np.array([i for i in range(n) if subjects[i] == subject], dtype=np.int64)
            rng = np.random.default_rng(np.random.SeedSequence((seed, 1, s_idx)))
            dealt = _stratified_deal(ids, labels, k, rng, f"SingleSubj[{subject}]")
            for part in dealt:
                test = np.array(sorted(part), dtype=np.int64)
                train = np.setdiff1d(ids, test)
                folds.append(Fold(train_ids=train, test_ids=test, subject=subject))
    else:  # LOSO
        if len(subject_order) < 2:
            raise ValueError("LOSO needs at least 2 subjects")
        for subject in subject_order:
            test = np.array([i for i in range(n) if subjects[i] == subject], dtype=np.int64)
            train = np.setdiff1d(all_ids, test)
            folds.append(Fold(train_ids=train, test_ids=test, subject=subject))
    return SplitPlan(protocol=protocol, mixing=mixing, folds=folds)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def confusion_from(true_codes, pred_codes, n_classes: int = len(CLASS_LABELS)) -> np.ndarray:
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(true_codes, pred_codes):
        counts[int(t), int(p)] += 1
    return counts


def metrics(confusion: np.ndarray, class_idx: int) -> dict:
    """One-vs-rest collapse of a confusion matrix for one class.

    accuracy = (TP+TN)/total, precision = TP/(TP+FP), recall = TP/(TP+FN),
    specificity = TN/(TN+FP), F1 from precision and standard recall.
    0/0 cases come back as 0.0 with a named flag.
    """
    confusion = np.asarray(confusion)
    total = int(confusion.sum())
    if total <= 0:
        raise ValueError("empty confusion matrix")
    tp = int(confusion[class_idx, class_idx])
    fn = int(confusion[class_idx].sum()) - tp
    fp = int(confusion[:, class_idx].sum()) - tp
    tn = total - tp - fn - fp
    flags = []

    def ratio(num, den, name):
        if den == 0:
            flags.append(f"{name}_zero_division")
            return 0.0
        return num / den

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    specificity = ratio(tn, tn + fp, "specificity")
    f1 = ratio(2.0 * precision * recall, precision + recall, "f1")
    return {
        "accuracy": (tp + tn) / total,
        "precision": precision,
        "recall": recall,
        "specificity": specificity,
        "f1": f1,
        "flags": flags,
    }


# ---------------------------------------------------------------------------
# Fold evaluation
# ---------------------------------------------------------------------------

@dataclass
class FoldResult:
    confusion: np.ndarray
    subject: str | None
    n_test: int


@dataclass
class EvalResult:
    protocol: str
    mixing: str
    confusion: np.ndarray          # pooled over folds
    folds: list[FoldResult]
    accuracy: float                # protocol-appropriate aggregate, in [0, 1]

    def class_f1(self) -> dict[str, float]:
        return {label: metrics(self.confusion, i)["f1"]
                for i, label in enumerate(CLASS_LABELS)}


def _label_codes(labels) -> np.ndarray:
    return np.array([CLASS_LABELS.index(l) for l in labels], dtype=np.int64)


def evaluate(plan: SplitPlan, classifier_factory, dataset: BenchDataset,
             accuracy_mode: str = "pooled") -> EvalResult:
    """Run every fold of a plan: fit on non-mixed segments, test per mixing.

    classifier_factory(fold_index) must return a fresh classifier. Accuracy
    pools confusion counts ("pooled"), averages fold accuracies ("macro"),
    and for SingleSubj always averages the per-subject accuracies.
    """
    if accuracy_mode not in ("pooled", "macro"):
        raise ValueError(f"unknown accuracy mode {accuracy_mode!r}")
    seg_codes = _label_codes(dataset.segment_labels)
    win_codes = (_label_codes(dataset.window_labels) if dataset.window_labels
                 else np.empty(0, dtype=np.int64))

    pooled = np.zeros((len(CLASS_LABELS), len(CLASS_LABELS)), dtype=np.int64)
    fold_results = []
    for f_idx, fold in enumerate(plan.folds):
        if plan.mixing == "mixed":
            mask = np.isin(dataset.window_segment, fold.test_ids)
            X_test = dataset.window_vectors[mask]
            true = win_codes[mask]
        else:
            X_test = dataset.segment_vectors[fold.test_ids]
            true = seg_codes[fold.test_ids]
        if X_test.shape[0] == 0 or fold.train_ids.size == 0:
            warnings.warn(f"fold {f_idx} of {plan.protocol}/{plan.mixing} is empty; skipped",
                          stacklevel=2)
            continue
        classifier = classifier_factory(f_idx)
        classifier.fit(
            dataset.segment_vectors[fold.train_ids],
            [dataset.segment_labels[i] for i in fold.train_ids],
        )
        pred = _label_codes(classifier.predict(X_test))
        confusion = confusion_from(true, pred)
        pooled += confusion
        fold_results.append(FoldResult(confusion=confusion, subject=fold.subject,
                                       n_test=int(true.size)))
    if not fold_results:
        raise ValueError("no fold produced any test example")

    if plan.protocol == "SingleSubj":
        by_subject: dict[str, np.ndarray] = {}
        for fr in fold_results:
            acc = by_subject.setdefault(fr.subject, np.zeros_like(pooled))
            acc += fr.confusion
        per_subject = [np.trace(c) / c.sum() for c in by_subject.values()]
        accuracy = float(np.mean(per_subject))
    elif accuracy_mode == "macro":
        accuracy = float(np.mean([np.trace(fr.confusion) / fr.confusion.sum()
                                  for fr in fold_results]))
    else:
        accuracy = float(np.trace(pooled) / pooled.sum())
    return EvalResult(protocol=plan.protocol, mixing=plan.mixing, confusion=pooled,
                      folds=fold_results, accuracy=accuracy)


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

@dataclass
class TimingResult:
    feature_time_s: float
    classify_time_s: float
    n_segments: int

    @property
    def total_s(self) -> float:
        return self.feature_time_s + self.classify_time_s


def time_benchmark(classifier, kind: str, records: list[ClipRecord],
                   frame_ms: float = 40.0, hop_ms: float = 20.0,
                   feature_params: dict | None = None,
                   min_segments: int = 100) -> TimingResult:
    """Median wall-clock per segment for extraction and classification.

    The classifier must already be fitted on vectors of the same kind. The
    stage boundary sits between "raw slice -> pooled feature row" and
    "feature row -> label"; short corpora are cycled until at least
    min_segments segments were timed.
    """
    feature_params = feature_params or {}
    slices = []
    for record in records:
        for seg in non_overlapping(record.segments):
            lo = int(seg.start * record.clip.sample_rate + 0.5)
            hi = int(seg.end * record.clip.sample_rate + 0.5)
            samples = record.clip.samples[lo:hi]
            frame_len = int(round(frame_ms * record.clip.sample_rate / 1000.0))
            if samples.size >= frame_len:
                slices.append((samples, record.clip.sample_rate))
    if not slices:
        raise ValueError("no usable segments to time")
    timed = [slices[i % len(slices)] for i in range(max(min_segments, len(slices)))]

    def extract(samples, fs):
        from .audio_io import AudioClip

        clip = AudioClip(samples=samples, sample_rate=fs, clip_id="timing")
        series = frame_signal(clip, frame_ms, hop_ms)
        return build_features(series, kind, **feature_params).data.mean(axis=0)

    # warm caches and JIT-ish setup before measuring
    for samples, fs in timed[:3]:
        classifier.predict(extract(samples, fs)[None, :])

    feat_times, cls_times = [], []
    for samples, fs in timed:
        t0 = time.perf_counter()
        vec = extract(samples, fs)
        t1 = time.perf_counter()
        classifier.predict(vec[None, :])
        t2 = time.perf_counter()
        feat_times.append(t1 - t0)
        cls_times.append(t2 - t1)
    return TimingResult(
        feature_time_s=float(median(feat_times)),
        classify_time_s=float(median(cls_times)),
        n_segments=len(timed),
    )


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

@dataclass
class ReportRow:
    mixing: str
    classifier: str
    feature: str
    protocol: str
    accuracy_pct: float
    f1_pct: dict[str, float]               # keyed by class label
    feat_time_s: float | None = None
    cls_time_s: float | None = None


CSV_HEADER = ("mixing,classifier,feature,protocol,accuracy,"
              "drug_f1,exhale_f1,inhale_f1,noise_f1,feat_time_s,cls_time_s,sum_s")


def _row_sort_key(row: ReportRow):
    return (row.mixing, row.classifier, row.feature, row.protocol)


def highlight_top3(rows: list[ReportRow]) -> set[int]:
    """Indices (into the sorted row list) of the top-3 accuracies per
    (mixing, protocol) group."""
    ordered = sorted(rows, key=_row_sort_key)
    groups: dict[tuple, list[int]] = {}
    for idx, row in enumerate(ordered):
        groups.setdefault((row.mixing, row.protocol), []).append(idx)
    flagged = set()
    for idxs in groups.values():
        best = sorted(idxs, key=lambda i: (-ordered[i].accuracy_pct, i))[:3]
        flagged.update(best)
    return flagged


def _fmt_time(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def render_report(rows: list[ReportRow], fmt: str = "text") -> str:
    """Render benchmark rows as CSV, aligned text, or JSON.

    Rows are sorted by (mixing, classifier, feature); text output stars the
    three highest accuracies within each (mixing, protocol) group. Output is
    byte-identical for identical input.
    """
    if not rows:
        raise ValueError("no rows to render")
    ordered = sorted(rows, key=_row_sort_key)
    if fmt == "csv":
        lines = [CSV_HEADER]
        for row in ordered:
            t_sum = (None if row.feat_time_s is None or row.cls_time_s is None
                     else row.feat_time_s + row.cls_time_s)
            cells = [
                row.mixing, row.classifier, row.feature, row.protocol,
                f"{row.accuracy_pct:.2f}",
            ]
            cells += [f"{row.f1_pct[label]:.2f}" for label in CLASS_LABELS]
            cells += [_fmt_time(row.feat_time_s), _fmt_time(row.cls_time_s), _fmt_time(t_sum)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = []
        for row in ordered:
            doc.append({
                "mixing": row.mixing, "classifier": row.classifier,
                "feature": row.feature, "protocol": row.protocol,
                "accuracy": round(row.accuracy_pct, 4),
                **{F1_COLUMNS[label]: round(row.f1_pct[label], 4) for label in CLASS_LABELS},
                "feat_time_s": row.feat_time_s, "cls_time_s": row.cls_time_s,
            })
        return json.dumps({"rows": doc}, indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        flagged = highlight_top3(ordered)
        header = (f"{'':1} {'mixing':<10} {'clf':<5} {'feature':<8} {'protocol':<11} "
                  f"{'acc%':>7} {'drug':>7} {'exhale':>7} {'inhale':>7} {'noise':>7}")
        lines = [header, "-" * len(header)]
        for idx, row in enumerate(ordered):
            star = "*" if idx in flagged else " "
            lines.append(
                f"{star:1} {row.mixing:<10} {row.classifier:<5} {row.feature:<8} "
                f"{row.protocol:<11} {row.accuracy_pct:>7.2f} "
                + " ".join(f"{row.f1_pct[label]:>7.2f}" for label in CLASS_LABELS)
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def _timed_methods(rows: list[ReportRow]) -> list[tuple[str, float, float]]:
    seen = []
    for row in sorted(rows, key=_row_sort_key):
        if row.feat_time_s is None:
            continue
        entry = (f"{row.classifier}-{row.feature}", row.cls_time_s, row.feat_time_s)
        if entry not in seen:
            seen.append(entry)
    return seen


def timing_json(rows: list[ReportRow]) -> str:
    """Machine-readable timing block mirroring the timed report rows."""
    doc = [
        {
            "method": method,
            "classification_time_s": cls_t,
            "feature_time_s": feat_t,
            "sum_s": feat_t + cls_t,
        }
        for method, cls_t, feat_t in _timed_methods(rows)
    ]
    return json.dumps({"timing": doc}, indent=2, sort_keys=True) + "\n"


def timing_dat(rows: list[ReportRow]) -> str:
    """Gnuplot-friendly columns: method, classify, extract, sum (seconds)."""
    lines = ["# method classification_time_s feature_time_s sum_s"]
    for method, cls_t, feat_t in _timed_methods(rows):
        lines.append(f"{method} {cls_t:.9f} {feat_t:.9f} {feat_t + cls_t:.9f}")
    return "\n".join(lines) + "\n"
