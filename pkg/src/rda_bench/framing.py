"""Framing and sliding-window machinery.

Clips become overlapping fixed-length frames (40 ms / 20 ms hop by default);
frame sequences become center-labeled analysis windows for the mixed test
protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip


@dataclass
class FrameSeries:
    """Overlapping frame matrix cut from one clip."""

    frames: np.ndarray  # (n_frames, frame_len)
    frame_len: int
    hop: int
    sample_rate: int
    origin_clip: str
    frame_times: np.ndarray  # center of each frame, seconds

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass
class WindowedExample:
    """One sliding analysis window, labeled by its central frame."""

    feature_window: np.ndarray  # (window_len, feature_dim)
    label: str
    center_time: float
    mixed: bool


def frame_signal(clip: AudioClip, frame_ms: float = 40.0, hop_ms: float = 20.0) -> FrameSeries:
    """Cut a clip into frames; the trailing remainder shorter than a frame is dropped."""
    frame_len = int(round(frame_ms * clip.sample_rate / 1000.0))
    hop = int(round(hop_ms * clip.sample_rate / 1000.0))
    if not (0 < hop <= frame_len):
        raise ValueError(f"need 0 < hop <= frame length, got hop={hop}, frame={frame_len}")
    n = clip.samples.size
    if n < frame_len:
        raise ValueError(f"clip of {n} samples is shorter than one {frame_len}-sample frame")
    n_frames = (n - frame_len) // hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, frame_len)[::hop][:n_frames]
    times = (np.arange(n_frames) * hop + frame_len / 2.0) / clip.sample_rate
    return FrameSeries(
        frames=np.ascontiguousarray(frames),
        frame_len=frame_len,
        hop=hop,
        sample_rate=clip.sample_rate,
        origin_clip=clip.clip_id,
        frame_times=times,
    )


def remove_dc(frame: np.ndarray) -> np.ndarray:
    """Subtract the mean along the last axis (per frame for a frame matrix)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("empty frame")
    return frame - frame.mean(axis=-1, keepdims=True)


def hamming_window(n: int) -> np.ndarray:
    """Hamming weights 0.54 - 0.46*cos(2*pi*k/(n-1)) on k = 0..n-1."""
    if n < 2:
        raise ValueError("window needs at least 2 points")
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def sliding_windows(
    feature_matrix: np.ndarray,
    frame_labels,
    window_len: int,
    step: int = 1,
    mixing: str = "mixed",
    frame_times: np.ndarray | None = None,
) -> list[WindowedExample]:
    """Emit analysis windows over a per-frame feature matrix.

    mixed: every stride-`step` window, labeled by its central frame (window
    length must be odd so a center exists). non-mixed: only windows whose
    frames all carry the same label. Frames labeled None never produce
    windows.
    """
    feature_matrix = np.asarray(feature_matrix)
    n = feature_matrix.shape[0]
    if len(frame_labels) != n:
        raise ValueError("one label per frame required")
    if window_len > n:
        raise ValueError(f"window of {window_len} frames exceeds {n} available frames")
    if step < 1:
        raise ValueError("step must be >= 1")
    if mixing not in ("mixed", "non-mixed"):
        raise ValueError(f"unknown mixing mode {mixing!r}")
    if mixing == "mixed" and window_len % 2 == 0:
        raise ValueError("mixed windows need an odd length so a center exists")

    if frame_times is None:
        frame_times = np.arange(n, dtype=np.float64)

    out = []
    center_off = (window_len - 1) // 2
    for pos in range(0, n - window_len + 1, step):
        block = frame_labels[pos : pos + window_len]
        center = pos + center_off
        if mixing == "mixed":
            label = frame_labels[center]
            if label is None:
                continue
        else:
            label = block[0]
            if label is None or any(b != label for b in block):
                continue
        out.append(
            WindowedExample(
                feature_window=feature_matrix[pos : pos + window_len],
                label=label,
                center_time=float(frame_times[center]),
                mixed=(mixing == "mixed"),
            )
        )
    return out
