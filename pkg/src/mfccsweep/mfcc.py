"""MFCC extraction: framing, Hamming window, power spectrum, mel filterbank,
log compression, DCT and mean pooling.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, DegenerateFilterError, SignalTooShortError
from .fft import next_pow2, rfft_power

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class MfccConfig:
    """Every knob of the MFCC pipeline.

    Times are in milliseconds and converted to whole samples at
    ``sample_rate``. ``fmax=None`` means Nyquist.
    """

    num_coefficients: int = 13
    frame_length_ms: float = 25.0
    hop_length_ms: float = 10.0
    num_filters: int = 80
    sample_rate: int = 16000
    fmin: float = 0.0
    fmax: float | None = None

    @property
    def frame_length(self) -> int:
        return int(round(self.frame_length_ms * self.sample_rate / 1000.0))

    @property
    def hop_length(self) -> int:
        return int(round(self.hop_length_ms * self.sample_rate / 1000.0))

    @property
    def fft_length(self) -> int:
        return next_pow2(self.frame_length)

    @property
    def upper_frequency(self) -> float:
        return self.sample_rate / 2.0 if self.fmax is None else float(self.fmax)

    def validate(self) -> "MfccConfig":
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if self.num_filters < 1:
            raise ConfigError("num_filters must be >= 1")
        if not 1 <= self.num_coefficients <= self.num_filters:
            raise ConfigError(
                f"num_coefficients={self.num_coefficients} must lie in "
                f"[1, num_filters={self.num_filters}]")
        if self.frame_length < 1:
            raise ConfigError("frame length rounds to zero samples")
        if self.hop_length < 1:
            raise ConfigError("hop length rounds to zero samples")
        if not 0 <= self.fmin < self.upper_frequency <= self.sample_rate / 2.0:
            raise ConfigError("need 0 <= fmin < fmax <= sample_rate/2")
        return self

    def replace(self, **changes) -> "MfccConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """SHA-256 over the canonical JSON of every field."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class MelFilterbank:
    weights: np.ndarray          # (J, K/2+1)
    edge_frequencies: np.ndarray  # (J+2,) Hz


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def frame_signal(samples, cfg: MfccConfig) -> np.ndarray:
    """Split ``samples`` into frames of N samples starting every M samples.

    The trailing partial frame is discarded; hops longer than the frame leave
    gaps.
    """
    x = np.asarray(samples, dtype=np.float64)
    n, m = cfg.frame_length, cfg.hop_length
    if x.size < n:
        raise SignalTooShortError(
            f"signal has {x.size} samples, one frame needs {n}")
    count = (x.size - n) // m + 1
    idx = np.arange(count)[:, None] * m + np.arange(n)[None, :]
    return x[idx]


def hamming(n: int) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def apply_window(frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    return frames * hamming(frames.shape[-1])


def power_spectrum(frames: np.ndarray, cfg: MfccConfig) -> np.ndarray:
    """|X(k)|^2 for k = 0..K/2 of each (windowed) frame, K = ``cfg.fft_length``."""
    return rfft_power(frames, cfg.fft_length)


def build_filterbank(cfg: MfccConfig) -> MelFilterbank:
    """Triangular filters with peaks equally spaced on the mel scale.

    Each triangle spans three consecutive edge frequencies and is sampled at
    the FFT bin centres, then scaled so its largest weight is exactly 1.
    """
    cfg.validate()
    n_fft = cfg.fft_length
    j = cfg.num_filters
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.upper_frequency), j + 2))
    edges[0], edges[-1] = cfg.fmin, cfg.upper_frequency
    bins = np.arange(n_fft // 2 + 1) * cfg.sample_rate / n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bins - lo) / (mid - lo)
    falling = (hi - bins) / (hi - mid)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    peak = weights.max(axis=1)
    empty = np.flatnonzero(peak <= 0.0)
    if empty.size:
        raise DegenerateFilterError(
            f"{empty.size} of {j} filters contain no FFT bin (first: filter {empty[0]}, "
            f"{edges[empty[0]]:.1f}-{edges[empty[0] + 2]:.1f} Hz); reduce num_filters "
            f"or lengthen the frame")
    weights /= peak[:, None]
    return MelFilterbank(weights, edges)


def filterbank_energies(spectrum: np.ndarray, fb: MelFilterbank) -> np.ndarray:
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape[-1] != fb.weights.shape[1]:
        raise ValueError(f"spectrum has {spectrum.shape[-1]} bins, filterbank expects "
                         f"{fb.weights.shape[1]}")
    return spectrum @ fb.weights.T


def log_energies(energies) -> np.ndarray:
    return np.log10(np.maximum(np.asarray(energies, dtype=np.float64), LOG_FLOOR))


def dct_matrix(num_coefficients: int, num_filters: int) -> np.ndarray:
    m = np.arange(num_coefficients)[:, None]
    j = np.arange(num_filters)[None, :]
    return np.cos(m * np.pi / num_filters * (j + 0.5))


def dct_coefficients(log_e, num_coefficients: int) -> np.ndarray:
    """Unscaled DCT-II: C_m = sum_j cos(m*pi/J*(j+0.5)) * logE_j."""
    log_e = np.asarray(log_e, dtype=np.float64)
    n_filters = log_e.shape[-1]
    if not 1 <= num_coefficients <= n_filters:
        raise ValueError(f"need 1 <= L <= J, got L={num_coefficients}, J={n_filters}")
    return log_e @ dct_matrix(num_coefficients, n_filters).T


def extract_mfcc(samples, cfg: MfccConfig, filterbank: MelFilterbank | None = None) -> np.ndarray:
    """Frame-wise MFCC matrix of shape (frame_count, L)."""
    fb = build_filterbank(cfg) if filterbank is None else filterbank
    frames = apply_window(frame_signal(samples, cfg))
    energies = filterbank_energies(power_spectrum(frames, cfg), fb)
    return dct_coefficients(log_energies(energies), cfg.num_coefficients)


def mean_pool(mfcc: np.ndarray) -> np.ndarray:
    mfcc = np.asarray(mfcc, dtype=np.float64)
    if mfcc.ndim != 2 or mfcc.shape[0] < 1:
        raise ValueError("expected a non-empty (frames, coefficients) matrix")
    return mfcc.mean(axis=0)


class MfccExtractor(TransformerMixin, BaseEstimator):
    """Mean-pooled MFCC features for a batch of 1-D signals.

    Parameters
    ----------
    num_coefficients : int, default=13
    frame_length_ms : float, default=25.0
    hop_length_ms : float, default=10.0
    num_filters : int, default=80
    sample_rate : int, default=16000
    fmin : float, default=0.0
    fmax : float or None, default=None
        Upper filterbank edge; ``None`` is Nyquist.

    Attributes
    ----------
    config_ : MfccConfig
    filterbank_ : MelFilterbank
    """

    def __init__(self, num_coefficients=13, frame_length_ms=25.0, hop_length_ms=10.0,
                 num_filters=80, sample_rate=16000, fmin=0.0, fmax=None):
        self.num_coefficients = num_coefficients
        self.frame_length_ms = frame_length_ms
        self.hop_length_ms = hop_length_ms
        self.num_filters = num_filters
        self.sample_rate = sample_rate
        self.fmin = fmin
        self.fmax = fmax

    @classmethod
    def from_config(cls, cfg: MfccConfig) -> "MfccExtractor":
        return cls(**cfg.to_dict())

    def fit(self, X=None, y=None):
        self.config_ = MfccConfig(**self.get_params()).validate()
        self.filterbank_ = build_filterbank(self.config_)
        self.n_features_out_ = self.config_.num_coefficients
        return self

    def frame_features(self, x) -> np.ndarray:
        check_is_fitted(self, "config_")
        return extract_mfcc(_check_signal(x), self.config_, self.filterbank_)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "config_")
        out = np.empty((len(X), self.config_.num_coefficients))
        for i, x in enumerate(X):
            out[i] = mean_pool(self.frame_features(x))
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "config_")
        return np.array([f"c{i}" for i in range(self.config_.num_coefficients)], dtype=object)


def _check_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or infinity")
    return x
