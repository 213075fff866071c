"""Continuous wavelet transform with a Morlet mother wavelet.

The transform computed here is the discrete counterpart of

    W(a, b) = a^{-1/2} * sum_t x(t) * conj(psi((t - b) / a))

evaluated by frequency-domain (circular) convolution; the admissibility
constant is folded into the fixed a^{-1/2} normalization. The wavelet's
angular frequency parameter omega0 defaults to 20, giving a center
frequency of omega0 / (2 pi) ~= 3.18 cycles per unit of dimensionless
time, so scale a responds to the tone f = (omega0 / 2 pi) * fs / a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CwtScalogram:
    """Complex CWT coefficients on a grid of scales."""

    coefficients: np.ndarray  # (n_scales, n_samples), complex
    scales: np.ndarray
    wavelet_omega0: float

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=np.float64)
        if self.scales.size == 0 or np.any(self.scales <= 0):
            raise ValueError("scales must be positive")
        if np.any(np.diff(self.scales) <= 0):
            raise ValueError("scales must be strictly increasing")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("scalogram contains non-finite entries")


def morlet_wavelet(t: np.ndarray, omega0: float = 20.0) -> np.ndarray:
    """Complex sinusoid under a Gaussian envelope, with zero-mean correction."""
    t = np.asarray(t, dtype=np.float64)
    correction = np.exp(-0.5 * omega0**2)
    return np.pi ** (-0.25) * (np.exp(1j * omega0 * t) - correction) * np.exp(-0.5 * t * t)


def center_frequency(omega0: float = 20.0) -> float:
    """Center frequency of the mother wavelet in cycles per unit time."""
    return omega0 / (2.0 * np.pi)


def scale_to_frequency(scales, sample_rate: int, omega0: float = 20.0) -> np.ndarray:
    """Signal frequency (Hz) that each scale responds to most strongly."""
    return center_frequency(omega0) * sample_rate / np.asarray(scales, dtype=np.float64)


def scales_for_band(sample_rate: int, f_lo: float, f_hi: float,
                    omega0: float = 20.0, per_decade: int = 32) -> np.ndarray:
    """Logarithmic scale grid covering the frequency band [f_lo, f_hi]."""
    if not (0 < f_lo < f_hi <= sample_rate / 2):
        raise ValueError("need 0 < f_lo < f_hi <= Nyquist")
    fc = center_frequency(omega0)
    a_min = fc * sample_rate / f_hi
    a_max = fc * sample_rate / f_lo
    n = max(int(np.ceil(np.log10(a_max / a_min) * per_decade)) + 1, 2)
    return a_min * (a_max / a_min) ** (np.arange(n) / (n - 1))


def cwt_morlet(signal: np.ndarray, scales, omega0: float = 20.0) -> CwtScalogram:
    """Morlet CWT of a 1-D signal via FFT cross-correlation at each scale."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size == 0:
        raise ValueError("empty signal")
    scales = np.asarray(scales, dtype=np.float64)
    n = signal.size
    spectrum = np.fft.fft(signal)
    m = np.arange(n)
    m_signed = np.where(m <= n // 2, m, m - n)  # signed sample offsets, wrapped
    coeffs = np.empty((scales.size, n), dtype=np.complex128)
    for i, a in enumerate(scales):
        kernel = morlet_wavelet(m_signed / a, omega0) / np.sqrt(a)
        coeffs[i] = np.fft.ifft(spectrum * np.conj(np.fft.fft(kernel)))
    return CwtScalogram(coefficients=coeffs, scales=scales, wavelet_omega0=omega0)


def wavelet_variance(scalogram: CwtScalogram) -> np.ndarray:
    """Mean squared coefficient magnitude per scale."""
    return np.mean(np.abs(scalogram.coefficients) ** 2, axis=1)


def high_band_power(frame: np.ndarray, f_cut: float, sample_rate: int,
                    omega0: float = 20.0, scales: np.ndarray | None = None) -> float:
    """Summed CWT power over scales mapping above the cutoff frequency.

    The cutoff is clamped to 0.95 * Nyquist, so a nominal 15 kHz cut on
    8 kHz audio measures the top of the available band instead.
    """
    frame = np.asarray(frame, dtype=np.float64)
    f_eff = min(f_cut, 0.95 * sample_rate / 2.0)
    if scales is None:
        f_lo = min(max(100.0, 4.0 * sample_rate / max(frame.size, 16)), 0.4 * f_eff)
        scales = scales_for_band(sample_rate, f_lo, 0.999 * sample_rate / 2.0,
                                 omega0=omega0, per_decade=8)
    variance = wavelet_variance(cwt_morlet(frame, scales, omega0))
    freqs = scale_to_frequency(scales, sample_rate, omega0)
    return float(np.sum(variance[freqs >= f_eff]))
