"""WAV ingestion, label-track parsing, segment slicing, and corpus synthesis.

File formats handled here: mono RIFF/WAVE PCM at 8 or 16 bit, Audacity-style
tab-separated label tracks ("start<TAB>end<TAB>label"), and a JSON dataset
manifest listing wav/label pairs per subject.
"""

from __future__ import annotations

import json
import warnings
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CLASS_LABELS = ("actuation", "exhalation", "inhalation", "noise")

# Slice indices are floor(t * fs); the epsilon absorbs float representation
# error when t was itself derived from an exact sample count.
_EDGE_EPS = 1e-6


def _sample_index(t: float, sample_rate: int) -> int:
    return int(np.floor(t * sample_rate + _EDGE_EPS))


@dataclass(frozen=True)
class AudioClip:
    """Normalized mono sample sequence with rate and subject identity."""

    samples: np.ndarray
    sample_rate: int
    subject_id: str = ""
    clip_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("clip needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("clip contains non-finite samples")
        if np.max(np.abs(samples)) > 1.0 + 1e-12:
            raise ValueError("clip amplitudes exceed [-1, 1]")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class AnnotatedSegment:
    """Labeled time interval within a clip."""

    start: float
    end: float
    label: str

    def __post_init__(self):
        if not (0.0 <= self.start < self.end):
            raise ValueError(f"invalid segment bounds [{self.start}, {self.end}]")
        if self.label not in CLASS_LABELS:
            raise ValueError(f"unknown label {self.label!r}")


@dataclass
class ClipRecord:
    """A clip together with its annotations; the unit the harness consumes."""

    clip: AudioClip
    segments: list[AnnotatedSegment]


@dataclass
class ManifestEntry:
    wav_path: str
    label_path: str
    subject_id: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    class_counts: dict[str, int] = field(default_factory=dict)
    root: Path | None = None

    def __post_init__(self):
        paths = [e.wav_path for e in self.entries] + [e.label_path for e in self.entries]
        if len(set(paths)) != len(paths):
            raise ValueError("manifest paths must be distinct")
        if not {e.subject_id for e in self.entries}:
            raise ValueError("manifest has no subjects")

    @property
    def subjects(self) -> list[str]:
        seen = []
        for e in self.entries:
            if e.subject_id not in seen:
                seen.append(e.subject_id)
        return seen


def load_wav(path, subject_id: str = "", clip_id: str | None = None) -> AudioClip:
    """Read a mono PCM WAV file and map samples affinely into [-1, 1].

    8-bit unsigned maps 128 -> 0.0 (so 0 -> -1.0 exactly); 16-bit signed
    divides by 32768. Anything that is not mono uncompressed PCM at those
    depths is rejected with a diagnostic.
    """
    path = Path(path)
    if clip_id is None:
        clip_id = path.stem
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getcomptype() != "NONE":
                raise ValueError(f"unsupported compression {wf.getcomptype()!r} in {path}")
            channels = wf.getnchannels()
            if channels != 1:
                raise ValueError(f"expected mono WAV, got {channels} channels in {path}")
            width = wf.getsampwidth()
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise ValueError(f"malformed WAV {path}: {exc}") from exc
    except EOFError as exc:
        raise ValueError(f"malformed WAV {path}: truncated header") from exc

    if width == 1:
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    else:
        raise ValueError(f"unsupported bit depth {8 * width} in {path}")
    if samples.size == 0:
        raise ValueError(f"malformed WAV {path}: no samples")
    return AudioClip(samples=samples, sample_rate=rate, subject_id=subject_id, clip_id=clip_id)


def write_wav(path, samples: np.ndarray, sample_rate: int, bits: int = 8) -> None:
    """Write samples in [-1, 1] as mono PCM; 8-bit uses the (b-128)/128 map."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = np.asarray(samples, dtype=np.float64)
    if bits == 8:
        data = np.clip(np.round(samples * 128.0) + 128.0, 0, 255).astype(np.uint8).tobytes()
        width = 1
    elif bits == 16:
        data = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2").tobytes()
        width = 2
    else:
        raise ValueError(f"unsupported bit depth {bits}")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(width)
        wf.setframerate(sample_rate)
        wf.writeframes(data)


def load_labels(path) -> list[AnnotatedSegment]:
    """Parse an Audacity-style label track into segments sorted by start.

    Overlapping segments are permitted but reported via a warning; unknown
    labels, non-numeric bounds, or end <= start are rejected.
    """
    segments = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'start<TAB>end<TAB>label'")
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-numeric bounds") from exc
        if end <= start:
            raise ValueError(f"{path}:{lineno}: end before start")
        segments.append(AnnotatedSegment(start=start, end=end, label=parts[2]))
    segments.sort(key=lambda s: (s.start, s.end))
    for prev, cur in zip(segments, segments[1:]):
        if cur.start < prev.end:
            warnings.warn(
                f"{path}: overlapping segments at {cur.start:.3f}s", stacklevel=2
            )
    return segments


def write_labels(path, segments) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{s.start:.6f}\t{s.end:.6f}\t{s.label}" for s in segments]
    path.write_text("\n".join(lines) + "\n")


def non_overlapping(segments) -> list[AnnotatedSegment]:
    """Drop segments that overlap a neighbour; only unambiguous regions remain."""
    ordered = sorted(segments, key=lambda s: (s.start, s.end))
    keep = []
    for i, seg in enumerate(ordered):
        clash = False
        if i > 0 and seg.start < ordered[i - 1].end:
            clash = True
        if i + 1 < len(ordered) and ordered[i + 1].start < seg.end:
            clash = True
        if clash:
            warnings.warn(f"dropping overlapping segment at {seg.start:.3f}s", stacklevel=2)
        else:
            keep.append(seg)
    return keep


def slice_segments(clip: AudioClip, segments) -> list[tuple[AudioClip, str]]:
    """Cut labeled slices out of a clip; out-of-bounds segments are skipped."""
    out = []
    n = clip.samples.size
    for i, seg in enumerate(segments):
        lo = _sample_index(seg.start, clip.sample_rate)
        hi = _sample_index(seg.end, clip.sample_rate)
        if lo < 0 or hi > n or hi <= lo:
            warnings.warn(
                f"segment [{seg.start:.3f}, {seg.end:.3f}] outside clip "
                f"{clip.clip_id!r}; skipped",
                stacklevel=2,
            )
            continue
        out.append(
            (
                AudioClip(
                    samples=clip.samples[lo:hi],
                    sample_rate=clip.sample_rate,
                    subject_id=clip.subject_id,
                    clip_id=f"{clip.clip_id}[{i}]",
                ),
                seg.label,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassRecipe:
    """Spectral recipe for one class: band edges (Hz), duration range (s), amplitude."""

    band_hz: tuple[float, float]
    duration_s: tuple[float, float]
    amplitude: float


DEFAULT_RECIPES: dict[str, ClassRecipe] = {
    "actuation": ClassRecipe(band_hz=(2300.0, 3600.0), duration_s=(0.100, 0.150), amplitude=0.75),
    "inhalation": ClassRecipe(band_hz=(700.0, 1500.0), duration_s=(0.5, 2.0), amplitude=0.40),
    "exhalation": ClassRecipe(band_hz=(150.0, 600.0), duration_s=(0.5, 2.0), amplitude=0.40),
    "noise": ClassRecipe(band_hz=(50.0, 3800.0), duration_s=(0.4, 1.5), amplitude=0.06),
}


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic recipe for a desk-scale corpus.

    Generation is a pure function of this spec: all randomness flows through
    a Philox counter-based generator keyed on (seed, subject, clip), so the
    same spec yields byte-identical corpora on any platform.
    """

    seed: int
    subjects: int = 3
    clips_per_subject: int = 8
    sample_rate: int = 8000
    events_per_clip: int = 6
    class_recipes: tuple[tuple[str, ClassRecipe], ...] = tuple(DEFAULT_RECIPES.items())

    def __post_init__(self):
        if self.subjects < 1:
            raise ValueError("need at least one subject")
        if self.clips_per_subject < 1:
            raise ValueError("need at least one clip per subject")
        if self.events_per_clip < len(CLASS_LABELS):
            raise ValueError(f"need at least {len(CLASS_LABELS)} events per clip")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        for name, recipe in self.class_recipes:
            if name not in CLASS_LABELS:
                raise ValueError(f"unknown class {name!r} in recipes")
            lo, hi = recipe.duration_s
            if not (0 < lo <= hi):
                raise ValueError(f"bad duration range for {name}")
            blo, bhi = recipe.band_hz
            if not (0 < blo < bhi < self.sample_rate / 2):
                raise ValueError(f"band edges for {name} must sit below Nyquist")

    @property
    def recipes(self) -> dict[str, ClassRecipe]:
        return dict(self.class_recipes)


def _rng_for(seed, *path) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed,) + path)))


def _band_noise(rng: np.random.Generator, n: int, fs: int, band: tuple[float, float],
                amplitude: float) -> np.ndarray:
    """Band-limited noise event, peak-normalized to the requested amplitude."""
    x = rng.standard_normal(n)
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    lo, hi = band
    edge = max(0.05 * (hi - lo), 1.0)
    gain = np.zeros_like(freqs)
    rise = (freqs >= lo - edge) & (freqs < lo)
    fall = (freqs > hi) & (freqs <= hi + edge)
    gain[(freqs >= lo) & (freqs <= hi)] = 1.0
    gain[rise] = 0.5 * (1 + np.cos(np.pi * (lo - freqs[rise]) / edge))
    gain[fall] = 0.5 * (1 + np.cos(np.pi * (freqs[fall] - hi) / edge))
    y = np.fft.irfft(spectrum * gain, n)
    peak = np.max(np.abs(y))
    if peak > 0:
        y *= amplitude / peak
    return y


def synthesize_dataset(spec: SynthSpec) -> tuple[DatasetManifest, list[ClipRecord]]:
    """Generate the in-memory corpus described by a SynthSpec.

    Each clip contains every class at least once; subjects carry individual
    gain and band-position offsets so leave-one-subject-out evaluation is
    genuinely harder than pooled cross-validation.
    """
    recipes = spec.recipes
    for label in CLASS_LABELS:
        if label not in recipes:
            raise ValueError(f"recipe missing for class {label!r}")

    entries = []
    records = []
    counts = {label: 0 for label in CLASS_LABELS}
    for s in range(spec.subjects):
        subject_id = f"s{s:02d}"
        srng = _rng_for(spec.seed, s)
        gain = 0.75 + 0.5 * srng.random()
        band_scale = 0.92 + 0.16 * srng.random()
        for c in range(spec.clips_per_subject):
            crng = _rng_for(spec.seed, s, c)
            order = list(CLASS_LABELS)
            crng.shuffle(order)
            extra = [CLASS_LABELS[int(i)] for i in
                     crng.integers(0, len(CLASS_LABELS), spec.events_per_clip - len(order))]
            pieces = []
            segments = []
            pos = 0
            for label in order + extra:
                recipe = recipes[label]
                dur = recipe.duration_s[0] + crng.random() * (
                    recipe.duration_s[1] - recipe.duration_s[0]
                )
                n = max(int(round(dur * spec.sample_rate)), 8)
                lo = max(20.0, recipe.band_hz[0] * band_scale)
                hi = min(0.48 * spec.sample_rate, recipe.band_hz[1] * band_scale)
                amp = min(recipe.amplitude * gain, 0.95)
                pieces.append(_band_noise(crng, n, spec.sample_rate, (lo, hi), amp))
                segments.append(
                    AnnotatedSegment(
                        start=pos / spec.sample_rate,
                        end=(pos + n) / spec.sample_rate,
                        label=label,
                    )
                )
                counts[label] += 1
                pos += n
            clip_id = f"{subject_id}_clip{c:02d}"
            clip = AudioClip(
                samples=np.concatenate(pieces),
                sample_rate=spec.sample_rate,
                subject_id=subject_id,
                clip_id=clip_id,
            )
            records.append(ClipRecord(clip=clip, segments=segments))
            entries.append(
                ManifestEntry(
                    wav_path=f"{subject_id}/{clip_id}.wav",
                    label_path=f"{subject_id}/{clip_id}.txt",
                    subject_id=subject_id,
                )
            )
    manifest = DatasetManifest(entries=entries, class_counts=counts)
    return manifest, records


def write_corpus(manifest: DatasetManifest, records: list[ClipRecord], out_dir) -> Path:
    """Write wav + label files and manifest.json; returns the manifest path."""
    out_dir = Path(out_dir)
    by_subject: dict[str, list[dict]] = {}
    for entry, record in zip(manifest.entries, records):
        write_wav(out_dir / entry.wav_path, record.clip.samples, record.clip.sample_rate)
        write_labels(out_dir / entry.label_path, record.segments)
        by_subject.setdefault(entry.subject_id, []).append(
            {"wav": entry.wav_path, "labels": entry.label_path}
        )
    doc = {"subjects": [{"id": sid, "clips": clips} for sid, clips in by_subject.items()]}
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc
    entries = []
    for subject in doc.get("subjects", []):
        for clip in subject.get("clips", []):
            entries.append(
                ManifestEntry(
                    wav_path=clip["wav"],
                    label_path=clip["labels"],
                    subject_id=subject["id"],
                )
            )
    if not entries:
        raise ValueError(f"manifest {path} lists no clips")
    return DatasetManifest(entries=entries, root=path.parent)


def load_dataset(manifest: DatasetManifest) -> list[ClipRecord]:
    """Load every clip/label pair in a manifest and fill in class counts."""
    root = manifest.root or Path(".")
    records = []
    counts = {label: 0 for label in CLASS_LABELS}
    for entry in manifest.entries:
        clip = load_wav(root / entry.wav_path, subject_id=entry.subject_id)
        segments = load_labels(root / entry.label_path)
        for seg in segments:
            counts[seg.label] += 1
        records.append(ClipRecord(clip=clip, segments=segments))
    manifest.class_counts = counts
    return records
