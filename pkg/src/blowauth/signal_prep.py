"""Turn raw blow-audio recordings into smoothed intensity time series.

A recording is reduced to one root-mean-square (RMS) value per
non-overlapping window of samples, then smoothed with a trailing simple
moving average (SMA).  At the default 48 kHz rate and 960-sample window
each point covers 0.02 s, so a 5 s session becomes a 250-point series.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile


@dataclass(frozen=True)
class RawAudio:
    """Mono audio samples together with their sampling rate in Hz."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(
                f"expected mono audio (1-D samples), got shape {samples.shape}"
            )
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length of the recording in seconds."""
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class BlowSeries:
    """Non-negative intensity series sampled every ``dt`` seconds.

    Parameters
    ----------
    values : np.ndarray
        One intensity value per analysis window, all >= 0.
    dt : float
        Seconds covered by each point (window_size / sample_rate).
    """

    values: np.ndarray
    dt: float = 0.02

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("intensity series must be a non-empty 1-D array")
        if np.any(values < 0):
            raise ValueError("intensity values must be non-negative")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return len(self.values) * self.dt


@dataclass(frozen=True)
class PreprocessConfig:
    """Parameters of the audio-to-series pipeline.

    The defaults (48 kHz, 960 samples per window, SMA window 8) give the
    0.02 s resolution used throughout; ``sma_window=1`` disables smoothing.
    """

    sample_rate: float = 48_000.0
    window_size: int = 960
    sma_window: int = 8

    def __post_init__(self) -> None:
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if self.sma_window < 1:
            raise ValueError(f"sma_window must be >= 1, got {self.sma_window}")

    @property
    def dt(self) -> float:
        """Seconds per output point."""
        return self.window_size / self.sample_rate


def rms_windows(audio: RawAudio, window_size: int = 960) -> BlowSeries:
    """Collapse audio into per-window RMS intensities.

    Samples are split into consecutive non-overlapping windows of
    ``window_size`` samples; a trailing remainder shorter than one window
    is discarded.  Each window contributes sqrt(mean(x**2)).
    """
    if window_size < 1:
        raise ValueError(f"window_size must be >= 1, got {window_size}")
    n = len(audio.samples)
    if n < window_size:
        raise ValueError(
            f"session too short: {n} samples < one window of {window_size}"
        )
    n_windows = n // window_size
    frames = audio.samples[: n_windows * window_size].reshape(n_windows, window_size)
    values = np.sqrt(np.mean(frames * frames, axis=1))
    return BlowSeries(values, dt=window_size / audio.sample_rate)


def sma(series: BlowSeries, window: int = 8) -> BlowSeries:
    """Trailing simple moving average with an expanding warm-up.

    Point ``i`` becomes the mean of the last ``window`` values ending at
    ``i``; the first ``window - 1`` points average everything seen so far,
    so the output has the same length as the input.  ``window=1`` is the
    identity.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    v = series.values
    csum = np.cumsum(v)
    out = np.empty_like(v)
    head = min(window - 1, len(v))
    out[:head] = csum[:head] / np.arange(1, head + 1)
    if len(v) >= window:
        shifted = np.concatenate(([0.0], csum[:-window]))
        out[window - 1 :] = (csum[window - 1 :] - shifted) / window
    return BlowSeries(out, dt=series.dt)


def preprocess_session(audio: RawAudio, config: PreprocessConfig | None = None) -> BlowSeries:
    """Run the full pipeline: RMS windows followed by SMA smoothing."""
    cfg = config if config is not None else PreprocessConfig()
    if audio.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"sample rate mismatch: recording is {audio.sample_rate} Hz, "
            f"config expects {cfg.sample_rate} Hz"
        )
    return sma(rms_windows(audio, cfg.window_size), cfg.sma_window)


def read_wav(path: str | os.PathLike) -> RawAudio:
    """Read a mono floating-point WAV file.

    Integer-encoded or multi-channel files are rejected rather than
    silently converted, so amplitude scaling stays explicit.
    """
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got {data.ndim} channels")
    if data.dtype.kind != "f":
        raise ValueError(
            f"{path}: expected float samples, got dtype {data.dtype}; "
            "convert to float WAV before loading"
        )
    return RawAudio(data.astype(np.float64), float(rate))


def write_wav(path: str | os.PathLike, audio: RawAudio) -> None:
    """Write audio as a 32-bit float mono WAV file."""
    wavfile.write(path, int(round(audio.sample_rate)), audio.samples.astype(np.float32))


def read_samples_csv(path: str | os.PathLike, sample_rate: float = 48_000.0) -> RawAudio:
    """Read raw samples stored one float per line (``#`` comments allowed)."""
    data = np.loadtxt(path, dtype=np.float64, comments="#", ndmin=1)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected a single column of samples")
    return RawAudio(data, sample_rate)
