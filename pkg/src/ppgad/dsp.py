"""Deterministic PPG preprocessing: band-pass filtering, normalization,
windowing, and frequency-domain resampling.

Pipeline order is filter -> z-normalize -> segment -> resample; every
operation is a pure function of its inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, ContractViolation, DegenerateSignalError

logger = logging.getLogger(__name__)

SITTING = "Sitting"
WALKING = "Walking"


@dataclass(frozen=True)
class TimeSeries:
    """A single-channel PPG recording with provenance metadata."""

    samples: np.ndarray
    fs: float
    subject_id: str
    activity: str

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ContractViolation("TimeSeries.samples must be a nonempty 1-D vector")
        if not self.fs > 0:
            raise ConfigurationError(f"sampling rate must be positive, got {self.fs}")
        if not np.all(np.isfinite(samples)):
            raise ContractViolation("TimeSeries.samples must be finite")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.fs


@dataclass(frozen=True)
class BandpassFilter:
    """Digital band-pass filter as transfer-function coefficients.

    b/a each have 5 entries (overall order 4: 2nd-order Butterworth per edge),
    with a[0] == 1.
    """

    b: np.ndarray
    a: np.ndarray
    low_hz: float
    high_hz: float
    fs: float

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def poles(self) -> np.ndarray:
        return np.roots(self.a)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def response_at(self, freq_hz: float) -> complex:
        """Transfer function evaluated on the unit circle at `freq_hz`."""
        z = np.exp(-1j * 2.0 * np.pi * freq_hz / self.fs)
        zp = z ** np.arange(len(self.b))
        return complex(np.dot(self.b, zp) / np.dot(self.a, zp))


@dataclass(frozen=True)
class Window:
    """A fixed-length signal segment: the unit fed to the encoder."""

    values: np.ndarray
    source_subject: str
    source_activity: str
    start_time_s: float
    index: int = 0  # position of this window within its source recording

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ContractViolation("Window.values must be a nonempty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ContractViolation("Window.values must be finite")

    def provenance(self) -> tuple[str, str, int]:
        return (self.source_subject, self.source_activity, self.index)


def design_butterworth_bandpass(low_hz: float, high_hz: float, fs: float) -> BandpassFilter:
    """Design a band-pass Butterworth filter (2nd order per edge).

    Built from the analog low-pass prototype via the low-pass -> band-pass
    transform and the bilinear transform with frequency pre-warping, so the
    magnitude response is exactly -3 dB at both cutoffs.
    """
    if not (0 < low_hz < high_hz < fs / 2):
        raise ConfigurationError(
            f"invalid band ({low_hz}, {high_hz}) Hz for fs={fs} Hz: "
            "need 0 < low < high < fs/2"
        )
    n = 2
    # Analog Butterworth low-pass prototype: poles on the unit circle in the
    # left half-plane, no zeros, unit gain.
    proto_poles = np.exp(1j * np.pi * (2 * np.arange(1, n + 1) + n - 1) / (2 * n))
    # Pre-warped band edges.
    w1 = 2.0 * fs * np.tan(np.pi * low_hz / fs)
    w2 = 2.0 * fs * np.tan(np.pi * high_hz / fs)
    w0 = np.sqrt(w1 * w2)
    bw = w2 - w1
    # Low-pass -> band-pass in zpk form: each prototype pole splits in two.
    scaled = proto_poles * bw / 2.0
    p_bp = np.concatenate(
        [scaled + np.sqrt(scaled**2 - w0**2), scaled - np.sqrt(scaled**2 - w0**2)]
    )
    z_bp = np.zeros(n, dtype=complex)
    k_bp = bw ** (len(p_bp) - len(z_bp))
    # Bilinear transform with sample rate fs.
    fs2 = 2.0 * fs
    z_d = (fs2 + z_bp) / (fs2 - z_bp)
    p_d = (fs2 + p_bp) / (fs2 - p_bp)
    # Zeros at infinity map to z = -1.
    z_d = np.concatenate([z_d, -np.ones(len(p_bp) - len(z_bp))])
    k_d = k_bp * np.real(np.prod(fs2 - z_bp) / np.prod(fs2 - p_bp))
    b = np.real(k_d * np.poly(z_d))
    a = np.real(np.poly(p_d))
    filt = BandpassFilter(b=b, a=a, low_hz=low_hz, high_hz=high_hz, fs=fs)
    if not filt.is_stable():
        raise ConfigurationError(
            f"designed filter for band ({low_hz}, {high_hz}) Hz at fs={fs} Hz is unstable"
        )
    return filt


def apply_filter(filt: BandpassFilter, ts: TimeSeries) -> TimeSeries:
    """Zero-phase (forward-backward) filtering of a whole recording.

    The signal is reflect-padded by 3x the filter order at each end before
    the two passes, then trimmed, so startup transients never reach the data.
    """
    if ts.fs != filt.fs:
        raise ConfigurationError(
            f"recording fs {ts.fs} Hz does not match filter design fs {filt.fs} Hz"
        )
    pad = 3 * filt.order
    x = ts.samples
    if x.size <= pad:
        raise ConfigurationError(
            f"signal too short for zero-phase filtering: need > {pad} samples, got {x.size}"
        )
    padded = np.concatenate([x[pad:0:-1], x, x[-2 : -pad - 2 : -1]])
    y = lfilter(filt.b, filt.a, padded)
    y = lfilter(filt.b, filt.a, y[::-1])[::-1]
    return replace(ts, samples=y[pad : pad + x.size])


def znormalize(ts: TimeSeries) -> TimeSeries:
    """Normalize to zero mean and unit variance (population std) over the
    whole recording."""
    x = ts.samples
    mean = x.mean()
    std = x.std()
    if std == 0.0:
        raise DegenerateSignalError(
            f"constant signal (subject {ts.subject_id!r}, {ts.activity}): variance is zero"
        )
    return replace(ts, samples=(x - mean) / std)


def segment(ts: TimeSeries, win_s: float, overlap_s: float) -> list[Window]:
    """Cut a recording into fixed-length overlapping windows.

    Window length is round(win_s * fs) samples, stride round((win_s -
    overlap_s) * fs); a trailing partial window is discarded. Returns an
    empty list (with a logged warning) if the recording is shorter than one
    window.
    """
    if not (win_s > overlap_s > 0):
        raise ConfigurationError(
            f"need win_s > overlap_s > 0, got win_s={win_s}, overlap_s={overlap_s}"
        )
    win = int(round(win_s * ts.fs))
    stride = int(round((win_s - overlap_s) * ts.fs))
    if win < 2 or stride < 1:
        raise ConfigurationError(
            f"degenerate windowing: window {win} samples, stride {stride} samples"
        )
    x = ts.samples
    if x.size < win:
        logger.warning(
            "recording (subject %r, %s) shorter than one window (%d < %d samples); "
            "no windows produced",
            ts.subject_id,
            ts.activity,
            x.size,
            win,
        )
        return []
    n = (x.size - win) // stride + 1
    return [
        Window(
            values=x[k * stride : k * stride + win].copy(),
            source_subject=ts.subject_id,
            source_activity=ts.activity,
            start_time_s=k * stride / ts.fs,
            index=k,
        )
        for k in range(n)
    ]


def _fourier_resample_values(x: np.ndarray, target_len: int) -> np.ndarray:
    n = x.size
    if n == target_len:
        return x.copy()
    spectrum = np.fft.rfft(x)
    out = np.zeros(target_len // 2 + 1, dtype=complex)
    kept = min(target_len, n)
    out[: kept // 2 + 1] = spectrum[: kept // 2 + 1]
    if kept % 2 == 0:
        half = kept // 2
        if target_len < n:
            # Truncation merges the +/- halves of the new Nyquist bin.
            out[half] = 2.0 * spectrum[half].real
        else:
            # Zero-padding splits the old Nyquist bin evenly across +/- bins;
            # the mirrored half is implied by Hermitian symmetry.
            out[half] = 0.5 * spectrum[half]
    return np.fft.irfft(out, target_len) * (target_len / n)


def fourier_resample(w: Window, target_len: int) -> Window:
    """Resample a window to `target_len` samples in the frequency domain.

    The spectrum is truncated or zero-padded and the inverse transform is
    rescaled by target_len/source_len, so a unit sinusoid keeps unit
    amplitude.
    """
    if target_len < 2:
        raise ConfigurationError(f"target_len must be >= 2, got {target_len}")
    return replace(w, values=_fourier_resample_values(w.values, target_len))


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for the full preprocessing chain."""

    low_hz: float
    high_hz: float
    win_s: float = 8.0
    overlap_s: float = 7.5
    target_len: int = 512

    def validate(self, fs: float) -> None:
        if not (0 < self.low_hz < self.high_hz < fs / 2):
            raise ConfigurationError(
                f"invalid band ({self.low_hz}, {self.high_hz}) Hz for fs={fs} Hz"
            )
        if not (self.win_s > self.overlap_s > 0):
            raise ConfigurationError(
                f"need win_s > overlap_s > 0, got {self.win_s}, {self.overlap_s}"
            )
        if self.target_len < 2:
            raise ConfigurationError(f"target_len must be >= 2, got {self.target_len}")


def preprocess(ts: TimeSeries, config: PipelineConfig) -> list[Window]:
    """filter -> z-normalize -> segment -> resample, for one recording."""
    config.validate(ts.fs)
    filt = design_butterworth_bandpass(config.low_hz, config.high_hz, ts.fs)
    ts = znormalize(apply_filter(filt, ts))
    return [fourier_resample(w, config.target_len) for w in segment(ts, config.win_s, config.overlap_s)]
