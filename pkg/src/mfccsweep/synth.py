"""Seeded synthetic two-class speech corpus.

Clips are source-filter vowels: a jittered glottal pulse train plus
aspiration noise, shaped by a cascade of formant resonators, with short
pauses between syllables. The "pathological" class has raised formants
and twice the pitch jitter. It stands in for clinical corpora that cannot
be redistributed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import AudioClip, write_wav

# F1..F4 in Hz for a few open and close vowels
VOWELS = {
    "a": (730, 1090, 2440, 3400),
    "e": (530, 1840, 2480, 3500),
    "i": (270, 2290, 3010, 3700),
    "o": (570, 840, 2410, 3400),
    "u": (300, 870, 2240, 3300),
}
BANDWIDTHS = (80, 100, 140, 200)
# formant scale of the pathological class
FORMANT_SHIFT = 1.12


@dataclass
class SyntheticClip:
    clip_id: str
    samples: np.ndarray
    sample_rate: int
    label: int
    group: str


def _resonator(x, freq, bw, rate):
    r = np.exp(-np.pi * bw / rate)
    theta = 2 * np.pi * freq / rate
    a = [1.0, -2 * r * np.cos(theta), r * r]
    return lfilter([1.0 - r], a, x)


def _syllable(rng, n, rate, f0, formants, jitter, breath):
    # glottal pulses with cycle-to-cycle period jitter
    src = np.zeros(n)
    t = 0.0
    while t < n:
        src[int(t)] = 1.0
        t += rate / (f0 * (1.0 + jitter * rng.standard_normal()))
    src = lfilter([1.0], [1.0, -0.95], src)  # glottal roll-off
    src = src / (np.std(src) + 1e-12) + breath * rng.standard_normal(n)
    y = src
    for f, bw in zip(formants, BANDWIDTHS):
        y = _resonator(y, f, bw, rate)
    ramp = min(n // 4, int(0.02 * rate))
    env = np.ones(n)
    env[:ramp] = np.linspace(0, 1, ramp)
    env[n - ramp:] = np.linspace(1, 0, ramp)
    return y * env


def synth_clip(rng, label: int, group: str, rate: int = 16000) -> np.ndarray:
    f0 = rng.uniform(170, 250) if group == "F" else rng.uniform(95, 150)
    tract = (1.1 if group == "F" else 1.0) * rng.uniform(0.97, 1.03)
    shift = FORMANT_SHIFT if label else 1.0
    jitter = 0.01 if label else 0.005
    breath = 0.1
    pieces = []
    total = int(rng.uniform(2.2, 2.9) * rate)
    while sum(p.size for p in pieces) < total:
        vowel = VOWELS[rng.choice(list(VOWELS))]
        formants = [min(f * tract * shift, 0.45 * rate) for f in vowel]
        n = int(rng.uniform(0.25, 0.6) * rate)
        pieces.append(_syllable(rng, n, rate, f0, formants, jitter, breath))
        pieces.append(np.zeros(int(rng.uniform(0.05, 0.15) * rate)))
    x = np.concatenate(pieces)[:total]
    x = x / (np.max(np.abs(x)) + 1e-12) * rng.uniform(0.3, 0.8)
    x = x + 10 ** (-60 / 20) * rng.standard_normal(x.size)
    return np.clip(x, -1.0, 1.0)


def generate_corpus(n_clips: int = 200, seed: int = 0, sample_rate: int = 16000):
    """Balanced corpus: half pathological, groups alternating F/M."""
    rng = np.random.default_rng(seed)
    clips = []
    for i in range(n_clips):
        label = i % 2
        group = "F" if (i // 2) % 2 == 0 else "M"
        x = synth_clip(rng, label, group, sample_rate)
        clips.append(SyntheticClip(f"syn{i:04d}", x, sample_rate, label, group))
    return clips


def write_corpus(directory, n_clips: int = 200, seed: int = 0,
                 sample_rate: int = 16000) -> Path:
    """Write WAV files plus ``manifest.csv``; returns the manifest path."""
    directory = Path(directory)
    (directory / "wav").mkdir(parents=True, exist_ok=True)
    manifest = directory / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "path", "label", "group"])
        for c in generate_corpus(n_clips, seed, sample_rate):
            rel = f"wav/{c.clip_id}.wav"
            write_wav(directory / rel, AudioClip(c.samples, c.sample_rate, c.clip_id))
            w.writerow([c.clip_id, rel, c.label, c.group])
    return manifest
