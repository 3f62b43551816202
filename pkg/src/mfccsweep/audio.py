"""Audio ingest: WAV decoding, resampling, segmentation and silence trimming."""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .exceptions import ConfigError, UnsupportedCodecError, WavFormatError

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE

# Kaiser-windowed sinc used by ``resample``.
KAISER_BETA = 8.0
TAPS_PER_PHASE = 32

# RMS floor for silence detection; keeps dB finite on digital zeros.
_RMS_FLOOR = 1e-10


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class Segment:
    samples: np.ndarray
    sample_rate: int
    parent_id: str = ""
    index: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def segment_id(self) -> str:
        return f"{self.parent_id}#{self.index}"


@dataclass(frozen=True)
class IngestConfig:
    target_sample_rate: int = 16000
    segment_seconds: float = 3.0
    min_keep_seconds: float = 1.0
    silence_frame_ms: float = 25.0

    def validate(self) -> "IngestConfig":
        for name in ("target_sample_rate", "segment_seconds", "min_keep_seconds",
                     "silence_frame_ms"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"ingest.{name} must be positive")
        if self.min_keep_seconds > self.segment_seconds:
            raise ConfigError("ingest.min_keep_seconds must not exceed segment_seconds")
        return self


class _Discard:
    """Sentinel returned by ``remove_silence`` for rejected segments."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DISCARD"

    def __bool__(self):
        return False


DISCARD = _Discard()


# ---------------------------------------------------------------------------
# WAV I/O


def _parse_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError("missing RIFF/WAVE header")
    pos = 12
    chunks = {}
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"chunk {cid!r} truncated: expected {size} bytes, "
                                 f"found {len(body)}")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    return chunks


def decode_wav(data: bytes, source_id: str = "") -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono clip scaled to [-1, 1].

    Integer PCM (16/24/32-bit) is divided by its full-scale magnitude
    (``2**(bits-1)``); 32-bit float is passed through. Stereo is mixed down
    by averaging channels.
    """
    chunks = _parse_chunks(bytes(data))
    if b"fmt " not in chunks:
        raise WavFormatError("missing fmt chunk")
    if b"data" not in chunks:
        raise WavFormatError("missing data chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise WavFormatError("fmt chunk too short")
    tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if tag == _FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise WavFormatError("extensible fmt chunk too short")
        tag = struct.unpack_from("<H", fmt, 24)[0]
    if tag not in (_FORMAT_PCM, _FORMAT_FLOAT):
        raise UnsupportedCodecError(f"unsupported WAVE format tag 0x{tag:04x}")
    if channels not in (1, 2):
        raise UnsupportedCodecError(f"unsupported channel count {channels}")
    if rate <= 0:
        raise WavFormatError("sample rate must be positive")
    if tag == _FORMAT_PCM and bits not in (16, 24, 32):
        raise UnsupportedCodecError(f"unsupported PCM bit depth {bits}")
    if tag == _FORMAT_FLOAT and bits != 32:
        raise UnsupportedCodecError(f"unsupported float bit depth {bits}")
    width = bits // 8
    if block_align != width * channels:
        raise WavFormatError("block_align disagrees with channels and bit depth")

    raw = chunks[b"data"]
    n_frames = len(raw) // block_align
    raw = raw[:n_frames * block_align]
    if tag == _FORMAT_FLOAT:
        samples = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    elif width == 3:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints / float(1 << 23)
    else:
        dtype = "<i2" if width == 2 else "<i4"
        samples = np.frombuffer(raw, dtype=dtype) / float(1 << (bits - 1))
    samples = samples.reshape(n_frames, channels).mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise WavFormatError("non-finite samples in float data chunk")
    return AudioClip(samples, rate, source_id)


def encode_wav(clip: AudioClip, bits: int = 16) -> bytes:
    """Encode a mono clip as PCM WAV (16-bit by default, or 32-bit float with ``bits=-32``)."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if bits == 16:
        ints = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        payload, tag, width = ints.tobytes(), _FORMAT_PCM, 2
    elif bits == -32:
        payload, tag, width = x.astype("<f4").tobytes(), _FORMAT_FLOAT, 4
    else:
        raise ValueError("bits must be 16 or -32")
    buf = io.BytesIO()
    buf.write(b"RIFF")
    buf.write(struct.pack("<I", 36 + len(payload)))
    buf.write(b"WAVE")
    buf.write(b"fmt ")
    buf.write(struct.pack("<IHHIIHH", 16, tag, 1, clip.sample_rate,
                          clip.sample_rate * width, width, width * 8))
    buf.write(b"data")
    buf.write(struct.pack("<I", len(payload)))
    buf.write(payload)
    return buf.getvalue()


def read_wav(path, source_id: str | None = None) -> AudioClip:
    path = Path(path)
    return decode_wav(path.read_bytes(), source_id if source_id is not None else path.stem)


def write_wav(path, clip: AudioClip, bits: int = 16) -> None:
    Path(path).write_bytes(encode_wav(clip, bits=bits))


# ---------------------------------------------------------------------------
# Resampling


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Polyphase windowed-sinc resampling to ``target_rate``.

    The output has ``round(len * target / source)`` samples.
    """
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.source_id)
    ratio = Fraction(target_rate, clip.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    n_out = int(round(clip.samples.size * target_rate / clip.sample_rate))
    if clip.samples.size == 0:
        return AudioClip(np.zeros(0), target_rate, clip.source_id)
    width = max(up, down)
    taps = sps.firwin(TAPS_PER_PHASE * width + 1, 1.0 / width,
                      window=("kaiser", KAISER_BETA)) * up
    y = sps.resample_poly(clip.samples, up, down, window=taps)
    if y.size >= n_out:
        y = y[:n_out]
    else:
        y = np.concatenate([y, np.zeros(n_out - y.size)])
    return AudioClip(np.clip(y, -1.0, 1.0), target_rate, clip.source_id)


# ---------------------------------------------------------------------------
# Segmentation and silence trimming


def segment(clip: AudioClip, cfg: IngestConfig = IngestConfig()) -> list[Segment]:
    """Cut ``clip`` into consecutive non-overlapping windows.

    The trailing remainder survives only when it is at least
    ``min_keep_seconds`` long.
    """
    if clip.samples.size == 0:
        raise ValueError("cannot segment an empty clip")
    rate = clip.sample_rate
    seg_len = int(round(cfg.segment_seconds * rate))
    min_len = int(np.ceil(cfg.min_keep_seconds * rate - 1e-9))
    out = []
    for i, start in enumerate(range(0, clip.samples.size, seg_len)):
        piece = clip.samples[start:start + seg_len]
        if piece.size < min_len:
            break
        out.append(Segment(piece, rate, clip.source_id, i))
    return out


def frame_levels_db(samples: np.ndarray, frame_len: int) -> np.ndarray:
    """RMS level in dBFS of consecutive non-overlapping frames.

    A trailing partial frame gets its own level.
    """
    x = np.asarray(samples, dtype=np.float64)
    n_full = x.size // frame_len
    levels = []
    if n_full:
        full = x[:n_full * frame_len].reshape(n_full, frame_len)
        levels.append(np.sqrt(np.mean(full ** 2, axis=1)))
    if x.size > n_full * frame_len:
        tail = x[n_full * frame_len:]
        levels.append(np.array([np.sqrt(np.mean(tail ** 2))]))
    rms = np.concatenate(levels)
    # micro-dB quantisation so equal-power frames compare equal
    return np.round(20.0 * np.log10(np.maximum(rms, _RMS_FLOOR)), 6)


def remove_silence(seg: Segment, cfg: IngestConfig = IngestConfig()):
    """Drop frames quieter than ``mean(dB) - std(dB)`` and concatenate the rest.

    Statistics come from the full frames of this segment only (a trailing
    partial frame is judged but not counted). Returns ``DISCARD`` when the
    segment is digitally silent or the survivors are shorter than
    ``min_keep_seconds``.
    """
    x = seg.samples
    if x.size == 0:
        raise ValueError("cannot trim an empty segment")
    if not np.any(x):
        return DISCARD
    frame_len = max(1, int(round(cfg.silence_frame_ms * seg.sample_rate / 1000.0)))
    levels = frame_levels_db(x, frame_len)
    n_full = x.size // frame_len
    stats = levels[:n_full] if n_full else levels
    threshold = stats.mean() - stats.std()
    keep = levels >= threshold
    if np.ptp(stats) == 0.0:
        # equal levels can straddle their own mean by rounding
        keep[:n_full] = True
    mask = np.repeat(keep, frame_len)[:x.size]
    survivors = x[mask]
    min_len = int(np.ceil(cfg.min_keep_seconds * seg.sample_rate - 1e-9))
    if survivors.size < min_len:
        return DISCARD
    return Segment(survivors, seg.sample_rate, seg.parent_id, seg.index)


def ingest_clip(clip: AudioClip, cfg: IngestConfig = IngestConfig()) -> list[Segment]:
    """Resample, segment and silence-trim one clip; discarded segments are dropped."""
    if clip.sample_rate != cfg.target_sample_rate:
        clip = resample(clip, cfg.target_sample_rate)
    if clip.samples.size == 0:
        return []
    out = []
    for seg in segment(clip, cfg):
        trimmed = remove_silence(seg, cfg)
        if trimmed is not DISCARD:
            out.append(trimmed)
    return out
