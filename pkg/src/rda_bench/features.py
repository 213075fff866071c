"""Per-frame feature extractors: time-domain, spectral, cepstral, MFCC, LPC.

Conventions used throughout:
  * DFT is X(k) = sum_n x(n) exp(-j 2 pi k n / N), n = 0..N-1.
  * Power values are floored at 1e-10 before any logarithm.
  * Spectral rows keep the first floor(N/2)+1 bins.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .framing import FrameSeries, hamming_window, remove_dc
from .wavelets import cwt_morlet, high_band_power, scales_for_band, wavelet_variance

POWER_FLOOR = 1e-10

FEATURE_KINDS = ("volume", "zcr", "spect", "cepst", "mfcc", "psd", "cwt", "lpc", "time", "qda30")


@dataclass
class FeatureMatrix:
    """Rows of per-frame (or per-window) feature vectors."""

    data: np.ndarray  # (n_rows, feature_dim)
    kind: str
    names: list[str]
    row_labels: list | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("feature data must be 2-D")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("feature data contains non-finite entries")
        if len(self.names) != self.data.shape[1]:
            raise ValueError("one name per feature column required")
        if self.row_labels is not None and len(self.row_labels) != self.data.shape[0]:
            raise ValueError("one label per row required")


# ---------------------------------------------------------------------------
# Scalar / per-frame operations
# ---------------------------------------------------------------------------

def volume(frame: np.ndarray) -> float:
    """Root-mean-square amplitude of one frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("empty frame")
    return float(np.sqrt(np.mean(frame * frame)))


def zero_crossing_rate(frame: np.ndarray) -> float:
    """Fraction of adjacent sample pairs with a strict sign change.

    The indicator is x(t)*x(t-1) < 0, so samples that are exactly zero never
    count as crossings.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size < 2:
        raise ValueError("need at least 2 samples")
    return float(np.mean(frame[1:] * frame[:-1] < 0.0))


def dft(frame: np.ndarray) -> np.ndarray:
    """Complex DFT with standard 0..N-1 indexing (FFT-backed for any length)."""
    return np.fft.fft(np.asarray(frame, dtype=np.float64))


def psd(frame: np.ndarray) -> np.ndarray:
    """Periodogram |X(k)|^2 / N over the first floor(N/2)+1 bins."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("empty frame")
    spectrum = np.fft.rfft(frame)
    return np.abs(spectrum) ** 2 / frame.size


def cepstrum(frame: np.ndarray, floor_db: float = -100.0) -> np.ndarray:
    """Real cepstrum: inverse DFT of the floored log magnitude spectrum.

    floor_db sets the magnitude floor (-100 dB -> 1e-5, i.e. 1e-10 in power).
    Output has the full frame length and is even-symmetric in quefrency.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("empty frame")
    eps = 10.0 ** (floor_db / 20.0)
    log_mag = np.log(np.maximum(np.abs(np.fft.fft(frame)), eps))
    return np.fft.ifft(log_mag).real


def lpc(frame: np.ndarray, order: int = 10) -> np.ndarray:
    """Linear-prediction coefficients from Levinson-Durbin on biased autocorrelation.

    Returns predictor coefficients a_1..a_order with x_hat(t) = sum a_i x(t-i);
    a zero-energy frame yields zeros (with a warning).
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size <= order:
        raise ValueError(f"frame of {frame.size} samples too short for order {order}")
    r = _autocorrelation(frame, order)
    if r[0] <= 0.0:
        warnings.warn("zero-energy frame: LPC coefficients set to zero", stacklevel=2)
        return np.zeros(order)
    predictor, _, _ = levinson_durbin(r, order)
    return predictor


def levinson_durbin(r: np.ndarray, order: int):
    """Solve the Toeplitz normal equations; returns (predictor, reflection, errors).

    errors[m] is the prediction-error power after m coefficients and is
    non-increasing in m.
    """
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = float(r[0])
    reflection = np.zeros(order)
    errors = [err]
    for m in range(1, order + 1):
        acc = r[m] + np.dot(a[1:m], r[m - 1 : 0 : -1])
        if err <= 0.0:
            errors.extend([0.0] * (order + 1 - m))
            break
        k = -acc / err
        reflection[m - 1] = k
        a[1 : m + 1] += k * a[m - 1 :: -1][: m]
        err *= 1.0 - k * k
        errors.append(err)
    return -a[1:], reflection, np.asarray(errors)


def _autocorrelation(frame: np.ndarray, max_lag: int) -> np.ndarray:
    n = frame.size
    r = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        r[lag] = np.dot(frame[: n - lag], frame[lag:]) / n
    return r


def harmonic_feature(frame: np.ndarray, sample_rate: int,
                     f_lo: float = 500.0, f_hi: float = 600.0) -> float:
    """Peak of the normalized autocorrelation over lags covering f_lo..f_hi Hz.

    Lag products are averaged over their overlap (unbiased), so a pure tone
    in band scores close to 1 regardless of frame length.
    """
    if sample_rate <= 2 * f_hi:
        raise ValueError("sample rate must exceed twice the upper search frequency")
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.size
    lag_lo = int(np.ceil(sample_rate / f_hi))
    lag_hi = min(int(np.floor(sample_rate / f_lo)), n - 1)
    if lag_hi < lag_lo:
        return 0.0
    energy = np.dot(frame, frame) / n
    if energy <= 0.0:
        return 0.0
    best = -np.inf
    for lag in range(lag_lo, lag_hi + 1):
        best = max(best, np.dot(frame[: n - lag], frame[lag:]) / (n - lag) / energy)
    return float(best)


def spectral_centroid_bandwidth(power: np.ndarray, freqs: np.ndarray) -> tuple[float, float]:
    """First and second spectral moments; (0, 0) for an all-zero spectrum."""
    total = float(np.sum(power))
    if total <= 0.0:
        return 0.0, 0.0
    centroid = float(np.sum(freqs * power) / total)
    bandwidth = float(np.sqrt(np.sum((freqs - centroid) ** 2 * power) / total))
    return centroid, bandwidth


# ---------------------------------------------------------------------------
# Mel filterbank and MFCC
# ---------------------------------------------------------------------------

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, sample_rate: int,
                   f_lo: float = 0.0, f_hi: float | None = None) -> np.ndarray:
    """Triangular filters spaced linearly on the mel scale.

    Returns an (n_filters, n_fft//2 + 1) matrix; each filter peaks at 1 on
    its center bin and overlaps its neighbours. Band edges above Nyquist are
    clamped with a warning.
    """
    if n_filters < 2:
        raise ValueError("need at least 2 filters")
    nyquist = sample_rate / 2.0
    if f_hi is None:
        f_hi = nyquist
    if f_hi > nyquist:
        warnings.warn(f"upper band edge {f_hi} Hz clamped to Nyquist {nyquist} Hz", stacklevel=2)
        f_hi = nyquist
    if not (0 <= f_lo < f_hi):
        raise ValueError("need 0 <= f_lo < f_hi")

    points = mel_to_hz(np.linspace(hz_to_mel(f_lo), hz_to_mel(f_hi), n_filters + 2))
    bins = np.floor((n_fft + 1) * points / sample_rate).astype(int)
    n_bins = n_fft // 2 + 1
    # keep centers strictly increasing even when the grid is crowded
    for i in range(1, bins.size):
        bins[i] = min(max(bins[i], bins[i - 1] + 1), n_bins - 1 - (bins.size - 1 - i))

    fb = np.zeros((n_filters, n_bins))
    for m in range(1, n_filters + 1):
        left, center, right = bins[m - 1], bins[m], bins[m + 1]
        for k in range(left, center):
            fb[m - 1, k] = (k - left) / (center - left)
        for k in range(center, right + 1):
            fb[m - 1, k] = (right - k) / (right - center)
        fb[m - 1, center] = 1.0
    return fb


def dct_ortho_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II matrix mapping n_in inputs to the first n_out coefficients."""
    k = np.arange(n_out)[:, None]
    n = np.arange(n_in)[None, :]
    m = np.cos(np.pi * k * (2 * n + 1) / (2 * n_in))
    m[0] *= np.sqrt(1.0 / n_in)
    if n_out > 1:
        m[1:] *= np.sqrt(2.0 / n_in)
    return m


def _windowed_psd_rows(series: FrameSeries, windowed: bool = True) -> np.ndarray:
    frames = series.frames
    if windowed:
        frames = frames * hamming_window(series.frame_len)
    return np.abs(np.fft.rfft(frames, axis=1)) ** 2 / series.frame_len


def mfcc(series: FrameSeries, n_filters: int = 26, n_coeffs: int = 13,
         f_lo: float = 0.0, f_hi: float | None = None) -> FeatureMatrix:
    """Mel-frequency cepstral coefficients per frame.

    Pipeline: Hamming window -> periodogram PSD -> mel filterbank energies ->
    floored log -> orthonormal DCT-II, keeping the first n_coeffs. Gain lands
    entirely in coefficient 0.
    """
    power = _windowed_psd_rows(series, windowed=True)
    fb = mel_filterbank(n_filters, series.frame_len, series.sample_rate, f_lo, f_hi)
    energies = power @ fb.T
    log_energies = np.log(np.maximum(energies, POWER_FLOOR))
    coeffs = log_energies @ dct_ortho_matrix(n_coeffs, n_filters).T
    return FeatureMatrix(
        data=coeffs,
        kind="mfcc",
        names=[f"mfcc_{i:02d}" for i in range(n_coeffs)],
        meta={"n_filters": n_filters, "n_coeffs": n_coeffs, "frame_len": series.frame_len},
    )


def spectrogram(series: FrameSeries, windowed: bool = True) -> FeatureMatrix:
    """Hamming-weighted DFT magnitude per frame, first floor(N/2)+1 bins."""
    frames = series.frames
    if windowed:
        frames = frames * hamming_window(series.frame_len)
    mag = np.abs(np.fft.rfft(frames, axis=1))
    return FeatureMatrix(
        data=mag,
        kind="spect",
        names=[f"spect_{i:03d}" for i in range(mag.shape[1])],
        meta={"frame_len": series.frame_len, "windowed": windowed},
    )


def cepstrogram(series: FrameSeries, floor_db: float = -100.0,
                windowed: bool = True, n_coeffs: int | None = None) -> FeatureMatrix:
    """Per-frame real cepstrum rows (unique quefrency bins only)."""
    frames = series.frames
    if windowed:
        frames = frames * hamming_window(series.frame_len)
    eps = 10.0 ** (floor_db / 20.0)
    log_mag = np.log(np.maximum(np.abs(np.fft.fft(frames, axis=1)), eps))
    ceps = np.fft.ifft(log_mag, axis=1).real
    keep = series.frame_len // 2 + 1 if n_coeffs is None else n_coeffs
    return FeatureMatrix(
        data=ceps[:, :keep],
        kind="cepst",
        names=[f"cepst_{i:03d}" for i in range(keep)],
        meta={"floor_db": floor_db, "frame_len": series.frame_len, "n_coeffs": keep},
    )


# ---------------------------------------------------------------------------
# The 30-feature time/spectral vector
# ---------------------------------------------------------------------------

QDA30_NAMES = (
    [f"mfcc_{i:02d}" for i in range(12)]
    + [f"lpc_{i:02d}" for i in range(1, 11)]
    + ["psd_total", "zcr", "high_band_power", "harmonic",
       "volume", "spect_centroid", "spect_bandwidth", "cepst_peak"]
)


def qda_feature_vector(frame: np.ndarray, sample_rate: int,
                       high_band_cut: float = 15000.0) -> np.ndarray:
    """Fixed 30-dimensional time/spectral descriptor of one DC-removed frame.

    Order: 12 MFCCs, 10 LPC coefficients, total PSD power, ZCR, high-band CWT
    power (cut clamped to Nyquist), harmonic autocorrelation peak, volume,
    spectral centroid, spectral bandwidth, peak cepstral magnitude.
    """
    frame = remove_dc(np.asarray(frame, dtype=np.float64))
    n = frame.size
    win = hamming_window(n)
    power = np.abs(np.fft.rfft(frame * win)) ** 2 / n
    fb = mel_filterbank(26, n, sample_rate)
    log_e = np.log(np.maximum(power @ fb.T, POWER_FLOOR))
    mfcc12 = dct_ortho_matrix(12, 26) @ log_e
    lpc10 = lpc(frame, 10) if n > 10 else np.zeros(10)
    freqs = np.arange(power.size) * sample_rate / n
    centroid, bandwidth = spectral_centroid_bandwidth(power, freqs)
    ceps = cepstrum(frame)
    cep_peak = float(np.max(np.abs(ceps[1 : n // 2 + 1]))) if n >= 2 else 0.0
    vec = np.concatenate(
        [
            mfcc12,
            lpc10,
            [
                float(np.sum(power)),
                zero_crossing_rate(frame),
                high_band_power(frame, high_band_cut, sample_rate),
                harmonic_feature(frame, sample_rate),
                volume(frame),
                centroid,
                bandwidth,
                cep_peak,
            ],
        ]
    )
    assert vec.size == 30
    return vec


# ---------------------------------------------------------------------------
# Batch builder and file formats
# ---------------------------------------------------------------------------

def build_features(series: FrameSeries, kind: str, **params) -> FeatureMatrix:
    """Dispatch a feature kind to its extractor over a whole frame series."""
    if kind == "mfcc":
        return mfcc(series, **params)
    if kind == "spect":
        return spectrogram(series, **params)
    if kind == "cepst":
        return cepstrogram(series, **params)
    if kind == "psd":
        data = np.stack([psd(f) for f in series.frames])
        return FeatureMatrix(data, "psd", [f"psd_{i:03d}" for i in range(data.shape[1])])
    if kind == "volume":
        data = np.sqrt(np.mean(series.frames**2, axis=1))[:, None]
        return FeatureMatrix(data, "volume", ["volume"])
    if kind == "zcr":
        data = np.mean(series.frames[:, 1:] * series.frames[:, :-1] < 0.0, axis=1)[:, None]
        return FeatureMatrix(data, "zcr", ["zcr"])
    if kind == "lpc":
        order = params.get("order", 10)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            data = np.stack([lpc(f, order) for f in series.frames])
        return FeatureMatrix(data, "lpc", [f"lpc_{i:02d}" for i in range(1, order + 1)],
                             meta={"order": order})
    if kind == "time":
        return FeatureMatrix(series.frames.copy(), "time",
                             [f"t_{i:03d}" for i in range(series.frame_len)])
    if kind == "cwt":
        omega0 = params.get("omega0", 20.0)
        fs = series.sample_rate
        scales = params.get("scales")
        if scales is None:
            scales = scales_for_band(fs, max(100.0, 4.0 * fs / series.frame_len),
                                     0.95 * fs / 2.0, omega0=omega0, per_decade=8)
        data = np.stack(
            [wavelet_variance(cwt_morlet(f, scales, omega0)) for f in series.frames]
        )
        return FeatureMatrix(data, "cwt", [f"cwt_{i:02d}" for i in range(data.shape[1])],
                             meta={"omega0": omega0, "n_scales": len(scales)})
    if kind == "qda30":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            data = np.stack(
                [qda_feature_vector(f, series.sample_rate) for f in series.frames]
            )
        return FeatureMatrix(data, "qda30", list(QDA30_NAMES))
    raise ValueError(f"unknown feature kind {kind!r}")


_BLOCK_MAGIC = b"FMX1"


def write_feature_block(matrix: FeatureMatrix, path) -> None:
    """Little-endian binary block: magic, u32 dims, row-major f64 data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, d = matrix.data.shape
    with open(path, "wb") as fh:
        fh.write(_BLOCK_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(np.ascontiguousarray(matrix.data, dtype="<f8").tobytes())


def read_feature_block(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BLOCK_MAGIC:
            raise ValueError(f"{path}: not a feature block (bad magic)")
        n, d = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * d), dtype="<f8")
        if data.size != n * d:
            raise ValueError(f"{path}: truncated feature block")
    return data.reshape(n, d).astype(np.float64)


def write_feature_csv(matrix: FeatureMatrix, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = list(matrix.names)
    if matrix.row_labels is not None:
        header.append("label")
    lines = [",".join(header)]
    for i, row in enumerate(matrix.data):
        cells = [repr(v) for v in row]
        if matrix.row_labels is not None:
            cells.append(str(matrix.row_labels[i]))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
