"""Actuation detector: peak assessment on scale-summed Morlet CWT power.

Power is normalized to [0, 1] by the recording's global maximum; a peak
above theta1 counts as an event when the power a fixed distance before and
after it has dropped by at least theta2 of the peak value. Events closer
than the canister plume duration (~100 ms) merge into one.
"""

from __future__ import annotations

import numpy as np

from ..audio_io import AudioClip
from ..wavelets import cwt_morlet, scales_for_band


def detect_actuation_cwt(
    clip: AudioClip,
    theta1: float = 0.38,
    theta2: float = 0.25,
    lookaround_ms: float = 56.0,
    omega0: float = 20.0,
    f_lo: float = 2000.0,
    f_hi: float | None = None,
    per_decade: int = 16,
    merge_ms: float = 100.0,
) -> list[float]:
    """Return event times (seconds) of detected actuation plumes.

    The scale grid spans the upper band [f_lo, f_hi] where plume energy
    concentrates; f_hi defaults to 0.95 * Nyquist.
    """
    fs = clip.sample_rate
    look = int(round(lookaround_ms * fs / 1000.0))
    n = clip.samples.size
    if n < 2 * look:
        raise ValueError(f"clip of {n} samples shorter than twice the {look}-sample lookaround")
    if f_hi is None:
        f_hi = 0.95 * fs / 2.0
    scales = scales_for_band(fs, f_lo, f_hi, omega0=omega0, per_decade=per_decade)
    power = np.sum(np.abs(cwt_morlet(clip.samples, scales, omega0).coefficients) ** 2, axis=0)
    peak = float(np.max(power))
    if peak <= 0.0:
        return []
    power = power / peak

    inner = power[1:-1]
    is_peak = (inner >= power[:-2]) & (inner > power[2:]) & (inner > theta1)
    candidates = np.nonzero(is_peak)[0] + 1

    events = []
    for idx in candidates:
        before = power[max(idx - look, 0)]
        after = power[min(idx + look, n - 1)]
        drop = theta2 * power[idx]
        if power[idx] - before >= drop and power[idx] - after >= drop:
            events.append((idx, power[idx]))
    if not events:
        return []

    merge = int(round(merge_ms * fs / 1000.0))
    merged = []
    cluster = [events[0]]
    for idx, p in events[1:]:
        if idx - cluster[-1][0] < merge:
            cluster.append((idx, p))
        else:
            merged.append(max(cluster, key=lambda e: (e[1], -e[0])))
            cluster = [(idx, p)]
    merged.append(max(cluster, key=lambda e: (e[1], -e[0])))
    return [idx / fs for idx, _ in merged]
