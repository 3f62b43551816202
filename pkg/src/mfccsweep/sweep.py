"""Parameter sweeps and named MFCC combinations evaluated by cross-validation."""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evaluation import MetricsRecord, cross_validate
from .exceptions import HarnessError
from .mfcc import MfccConfig, build_filterbank, extract_mfcc, mean_pool
from .svm import RbfSVC

AXES = ("num_coefficients", "frame_length_ms", "hop_length_ms")
AXIS_ALIASES = {
    "coefficients": "num_coefficients", "coef": "num_coefficients",
    "num_coefficients": "num_coefficients",
    "frame": "frame_length_ms", "frame_length_ms": "frame_length_ms",
    "hop": "hop_length_ms", "hop_length_ms": "hop_length_ms",
}

DEFAULT_GRIDS = {
    "num_coefficients": (13, 20, 30, 40, 50, 60, 70, 80),
    "frame_length_ms": (25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0, 800.0),
    "hop_length_ms": (5.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0),
}

# Parameters held constant while the keyed axis is swept.
AXIS_BASES = {
    "num_coefficients": {"frame_length_ms": 25.0, "hop_length_ms": 10.0},
    "frame_length_ms": {"hop_length_ms": 10.0, "num_coefficients": 30},
    "hop_length_ms": {"frame_length_ms": 25.0, "num_coefficients": 30},
}


@dataclass(frozen=True)
class GridAxis:
    parameter: str
    values: tuple

    def __post_init__(self):
        if self.parameter not in AXES:
            raise ValueError(f"unknown axis {self.parameter!r}; expected one of {AXES}")
        vals = tuple(self.values)
        if not vals:
            raise ValueError("axis values must be non-empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def default(cls, parameter: str) -> "GridAxis":
        parameter = AXIS_ALIASES.get(parameter, parameter)
        return cls(parameter, DEFAULT_GRIDS[parameter])

    def base_config(self, defaults: MfccConfig) -> MfccConfig:
        return defaults.replace(**AXIS_BASES[self.parameter])


@dataclass(frozen=True)
class NamedCombination:
    name: str
    overrides: dict

    def apply(self, base: MfccConfig) -> MfccConfig:
        return base.replace(**self.overrides)


PRESETS = (
    NamedCombination("optimized", {"frame_length_ms": 25.0, "hop_length_ms": 5.0,
                                   "num_coefficients": 30}),
    NamedCombination("default", {"frame_length_ms": 25.0, "hop_length_ms": 10.0,
                                 "num_coefficients": 13}),
    NamedCombination("worst", {"frame_length_ms": 800.0, "hop_length_ms": 500.0,
                               "num_coefficients": 80}),
)


@dataclass
class LabeledSegment:
    segment_id: str
    samples: np.ndarray
    sample_rate: int
    label: int
    group: str | None = None


@dataclass
class Corpus:
    name: str
    items: list

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.items], dtype=int)

    @property
    def groups(self) -> np.ndarray:
        return np.array([s.group for s in self.items], dtype=object)

    @property
    def sample_rate(self) -> int:
        rates = {s.sample_rate for s in self.items}
        if not rates:
            raise HarnessError(f"corpus {self.name!r} has no segments")
        if len(rates) != 1:
            raise HarnessError(f"corpus mixes sample rates {sorted(rates)}")
        return rates.pop()


class FeatureCache:
    """Mean-pooled MFCC vectors keyed by (segment id, config digest).

    The full config is stored next to each vector and compared on every hit,
    so a digest collision cannot return a vector for the wrong config.
    """

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self._data)

    def get(self, segment_id: str, cfg: MfccConfig):
        entry = self._data.get((segment_id, cfg.digest()))
        if entry is None:
            return None
        stored_cfg, vec = entry
        if stored_cfg != cfg:
            raise HarnessError(f"config digest collision for segment {segment_id}")
        return vec

    def get_or_compute(self, segment_id: str, cfg: MfccConfig, compute):
        key = (segment_id, cfg.digest())
        with self._lock:
            vec = self.get(segment_id, cfg)
            if vec is not None:
                self.hits += 1
                return vec
        vec = np.asarray(compute(), dtype=np.float64)
        vec.setflags(write=False)
        with self._lock:
            # first writer wins; later writers get the stored copy
            existing = self._data.setdefault(key, (cfg, vec))
            self.misses += existing[1] is vec
            return existing[1]


def corpus_features(corpus: Corpus, cfg: MfccConfig, cache: FeatureCache | None = None):
    """(X, y, groups, ids, warnings) for ``corpus`` under ``cfg``.

    Segments shorter than one frame are skipped with a warning.
    """
    cfg = cfg.replace(sample_rate=corpus.sample_rate).validate()
    fb = None
    rows, keep, warns = [], [], []
    for i, seg in enumerate(corpus.items):
        if seg.samples.size < cfg.frame_length:
            warns.append(f"segment {seg.segment_id} shorter than one "
                         f"{cfg.frame_length_ms} ms frame; skipped")
            continue

        def compute(seg=seg):
            nonlocal fb
            if fb is None:
                fb = build_filterbank(cfg)
            return mean_pool(extract_mfcc(seg.samples, cfg, fb))

        vec = compute() if cache is None else cache.get_or_compute(seg.segment_id, cfg, compute)
        rows.append(vec)
        keep.append(i)
    X = np.vstack(rows) if rows else np.empty((0, cfg.num_coefficients))
    ids = [corpus.items[i].segment_id for i in keep]
    return X, corpus.labels[keep], corpus.groups[keep], ids, warns


@dataclass
class EvalSettings:
    k: int = 10
    seed: int = 0
    svm: dict = field(default_factory=dict)
    standardize: bool = True
    group: str | None = None

    def classifier(self):
        return RbfSVC(**self.svm)


@dataclass
class SweepResult:
    axis: str
    param: str
    value: object
    grid_point: MfccConfig
    metrics: MetricsRecord | None
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        """JSON-ready view; wall time is left out so reruns compare equal."""
        return {
            "axis": self.axis,
            "param": self.param,
            "value": self.value,
            "config": self.grid_point.to_dict(),
            "config_digest": self.grid_point.digest(),
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "warnings": list(self.warnings),
            "error": self.error,
        }


def evaluate_config(corpus: Corpus, cfg: MfccConfig, settings: EvalSettings,
                    cache: FeatureCache | None = None, *, axis="single", param="config",
                    value=None) -> SweepResult:
    """Extract features under ``cfg`` and cross-validate; failures are captured."""
    t0 = time.perf_counter()
    cfg = cfg.replace(sample_rate=corpus.sample_rate)
    try:
        X, y, groups, _, warns = corpus_features(corpus, cfg, cache)
        record = cross_validate(settings.classifier(), X, y, k=settings.k,
                                seed=settings.seed, groups=groups, group=settings.group,
                                standardizer="default" if settings.standardize else None)
        return SweepResult(axis, param, value, cfg, record,
                           time.perf_counter() - t0, warns + record.flags)
    except (HarnessError, ValueError) as exc:
        return SweepResult(axis, param, value, cfg, None, time.perf_counter() - t0,
                           [], f"{type(exc).__name__}: {exc}")


def _run_points(points, corpus, settings, cache, jobs):
    def one(p):
        axis, param, value, cfg = p
        return evaluate_config(corpus, cfg, settings, cache, axis=axis, param=param,
                               value=value)

    if jobs <= 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, points))


def sweep_axis(corpus: Corpus, axis: GridAxis, base: MfccConfig, settings: EvalSettings,
               cache: FeatureCache | None = None, jobs: int = 1) -> list[SweepResult]:
    """One result per axis value, other parameters held at ``base``."""
    points = [(axis.parameter, axis.parameter, v, base.replace(**{axis.parameter: v}))
              for v in axis.values]
    return _run_points(points, corpus, settings, cache, jobs)


def run_combinations(corpus: Corpus, combos, base: MfccConfig, settings: EvalSettings,
                     cache: FeatureCache | None = None, jobs: int = 1) -> list[SweepResult]:
    points = [("combination", "name", c.name, c.apply(base)) for c in combos]
    return _run_points(points, corpus, settings, cache, jobs)


def improvement_report(results, metric: str = "accuracy", target: str = "optimized",
                       baselines=("worst", "default")) -> list[dict]:
    """Absolute and relative gain of ``target`` over each baseline combination."""
    by_name = {r.value: r for r in results if r.axis == "combination" and r.ok}
    if target not in by_name:
        return []
    tgt = by_name[target].metrics.mean(metric)
    out = []
    for name in baselines:
        if name not in by_name:
            continue
        ref = by_name[name].metrics.mean(metric)
        out.append({
            "target": target, "baseline": name, "metric": metric,
            "target_value": tgt, "baseline_value": ref,
            "absolute": tgt - ref,
            "relative": (tgt - ref) / ref if ref else float("nan"),
        })
    return out


def held_constant_digest(cfg: MfccConfig, axis: str) -> str:
    """Digest of every field except ``axis``; equal across one axis sweep."""
    d = cfg.to_dict()
    d.pop(axis)
    return json.dumps(d, sort_keys=True)
