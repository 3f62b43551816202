"""Harness configuration file (YAML) and dataset manifests."""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .audio import IngestConfig
from .exceptions import ConfigError, ManifestError
from .mfcc import MfccConfig
from .sweep import AXES, AXIS_ALIASES, DEFAULT_GRIDS, PRESETS, GridAxis, NamedCombination

_MFCC_KEYS = ("num_coefficients", "frame_length_ms", "hop_length_ms", "num_filters",
              "fmin", "fmax")
_COMBO_KEYS = ("frame_length_ms", "hop_length_ms", "num_coefficients")


@dataclass
class SvmSection:
    c: float = 1.0
    gamma: float = 0.1
    kkt_tolerance: float = 1e-3
    max_passes: int = 200
    standardize: bool = True

    def estimator_params(self) -> dict:
        return {"C": self.c, "gamma": self.gamma, "kkt_tolerance": self.kkt_tolerance,
                "max_passes": self.max_passes}


@dataclass
class EvalSection:
    k: int = 10
    seed: int = 0


@dataclass
class SweepSection:
    axes: dict = field(default_factory=lambda: {a: list(v) for a, v in DEFAULT_GRIDS.items()})
    combinations: list = field(default_factory=lambda: [
        {"name": c.name, **c.overrides} for c in PRESETS])

    def grid_axis(self, name: str) -> GridAxis:
        name = AXIS_ALIASES.get(name, name)
        if name not in self.axes:
            raise ConfigError(f"no values configured for axis {name!r}")
        return GridAxis(name, tuple(self.axes[name]))

    def named_combinations(self) -> list[NamedCombination]:
        return [NamedCombination(c["name"], {k: c[k] for k in _COMBO_KEYS if k in c})
                for c in self.combinations]


@dataclass
class IoSection:
    dataset: str | None = None
    manifest: str | None = None
    out: str | None = None


@dataclass
class HarnessConfig:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    svm: SvmSection = field(default_factory=SvmSection)
    eval: EvalSection = field(default_factory=EvalSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    io: IoSection = field(default_factory=IoSection)

    def to_dict(self) -> dict:
        mfcc = self.mfcc.to_dict()
        return {
            "ingest": dataclasses.asdict(self.ingest),
            "mfcc": {k: mfcc[k] for k in _MFCC_KEYS},
            "svm": dataclasses.asdict(self.svm),
            "eval": dataclasses.asdict(self.eval),
            "sweep": {"axes": {a: list(v) for a, v in self.sweep.axes.items()},
                      "combinations": [dict(c) for c in self.sweep.combinations]},
            "io": dataclasses.asdict(self.io),
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @classmethod
    def from_dict(cls, doc: dict | None) -> "HarnessConfig":
        doc = {} if doc is None else doc
        _check_keys(doc, ("ingest", "mfcc", "svm", "eval", "sweep", "io"), "")
        ingest = _section(IngestConfig, doc.get("ingest"), "ingest").validate()
        mfcc_doc = doc.get("mfcc") or {}
        _check_keys(mfcc_doc, _MFCC_KEYS, "mfcc.")
        mfcc = MfccConfig(sample_rate=ingest.target_sample_rate, **mfcc_doc).validate()
        svm = _section(SvmSection, doc.get("svm"), "svm")
        for name in ("c", "gamma", "kkt_tolerance", "max_passes"):
            if not getattr(svm, name) > 0:
                raise ConfigError(f"svm.{name} must be positive")
        ev = _section(EvalSection, doc.get("eval"), "eval")
        if ev.k < 2:
            raise ConfigError("eval.k must be >= 2")
        sweep = _section(SweepSection, doc.get("sweep"), "sweep")
        for axis, values in sweep.axes.items():
            if axis not in AXES:
                raise ConfigError(f"unknown sweep axis {axis!r}")
            try:
                GridAxis(axis, tuple(values))
            except ValueError as exc:
                raise ConfigError(f"sweep.axes.{axis}: {exc}") from None
        for i, combo in enumerate(sweep.combinations):
            if not isinstance(combo, dict) or "name" not in combo:
                raise ConfigError(f"sweep.combinations[{i}] needs a name")
            _check_keys(combo, ("name",) + _COMBO_KEYS, f"sweep.combinations[{i}].")
        io = _section(IoSection, doc.get("io"), "io")
        return cls(ingest, mfcc, svm, ev, sweep, io)

    @classmethod
    def load(cls, path) -> "HarnessConfig":
        try:
            doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from None
        if doc is not None and not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(doc)


def _check_keys(doc, allowed, prefix):
    if not isinstance(doc, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'} must be a mapping")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(prefix + k for k in unknown)}")


def _section(cls, doc, name):
    doc = doc or {}
    _check_keys(doc, [f.name for f in dataclasses.fields(cls)], name + ".")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    label: int
    group: str | None = None


def parse_manifest(path, check_files: bool = True) -> list[ManifestEntry]:
    """Read an ``id,path,label[,group]`` CSV; paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    base = path.parent
    entries, seen = [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("id", "path", "label") if c not in header]
        if missing:
            raise ManifestError(f"{path}: header lacks column(s) {', '.join(missing)}")
        extra = sorted(set(header) - {"id", "path", "label", "group"})
        if extra:
            raise ManifestError(f"{path}: unexpected column(s) {', '.join(extra)}")
        has_group = "group" in header
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            rid = (row["id"] or "").strip()
            if not rid:
                raise ManifestError(f"{where}: empty id")
            if rid in seen:
                raise ManifestError(f"{where}: duplicate id {rid!r}")
            seen.add(rid)
            label = (row["label"] or "").strip()
            if label not in ("0", "1"):
                raise ManifestError(f"{where}: label must be 0 or 1, got {label!r}")
            clip_path = base / (row["path"] or "").strip()
            if check_files and not clip_path.is_file():
                raise ManifestError(f"{where}: audio file not found: {clip_path}")
            group = (row.get("group") or "").strip() or None if has_group else None
            entries.append(ManifestEntry(rid, clip_path, int(label), group))
    return entries
