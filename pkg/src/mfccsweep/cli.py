"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 runtime failure. Failures also
print a JSON error document on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import report
from .audio import AudioClip, encode_wav
from .config import HarnessConfig, parse_manifest
from .dataset import load_corpus
from .exceptions import ConfigError, HarnessError, ManifestError, WavFormatError
from .sweep import (AXES, AXIS_ALIASES, EvalSettings, FeatureCache, corpus_features,
                    evaluate_config, run_combinations, sweep_axis)
from .synth import write_corpus

log = logging.getLogger("mfccsweep")

VALIDATION_ERRORS = (ConfigError, ManifestError, WavFormatError)


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfccsweep", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("--manifest", help="CSV with id,path,label[,group]")
        p.add_argument("--config", help="YAML harness config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="overrides eval.seed")
        p.add_argument("--jobs", type=int,
                       help="worker threads (falls back to $HARNESS_JOBS, then 1)")
        p.add_argument("--group", help="restrict to one manifest group, e.g. F")
        return p

    common(sub.add_parser("preprocess", help="ingest audio and write trimmed segments"))
    common(sub.add_parser("extract", help="write mean-pooled MFCC features as CSV"))
    p = common(sub.add_parser("sweep", help="one-axis parameter sweeps"))
    p.add_argument("--axis", default="all",
                   choices=sorted(set(AXIS_ALIASES) | {"all"}),
                   help="axis to sweep (default: all three)")
    common(sub.add_parser("combos", help="evaluate the named combinations"))
    common(sub.add_parser("evaluate", help="cross-validate the configured MFCC setting"))
    p = common(sub.add_parser("synth", help="write the synthetic demo corpus"),
               manifest=False)
    p.add_argument("--n-clips", type=int, default=200)
    p = sub.add_parser("dump-config", help="print the effective config as YAML")
    p.add_argument("--config")
    return parser


def _jobs(args) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        env = os.environ.get("HARNESS_JOBS")
        try:
            jobs = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"HARNESS_JOBS must be an integer, got {env!r}") from None
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return jobs


def _context(args):
    cfg = HarnessConfig.load(args.config) if args.config else HarnessConfig()
    if args.seed is not None:
        cfg.eval.seed = args.seed
    out = Path(args.out or cfg.io.out or "out")
    return cfg, out, _jobs(args)


def _load(args, cfg, jobs):
    manifest = args.manifest or cfg.io.manifest
    if not manifest:
        raise ConfigError("no manifest given (use --manifest or io.manifest)")
    entries = parse_manifest(manifest)
    if args.group is not None:
        entries = [e for e in entries if e.group == args.group]
        if not entries:
            raise ConfigError(f"no manifest rows in group {args.group!r}")
    name = cfg.io.dataset or Path(manifest).resolve().parent.name
    return load_corpus(entries, cfg.ingest, name, jobs)


def _settings(cfg, group=None) -> EvalSettings:
    return EvalSettings(k=cfg.eval.k, seed=cfg.eval.seed, svm=cfg.svm.estimator_params(),
                        standardize=cfg.svm.standardize, group=group)


def _extra(cfg, args) -> dict:
    return {"config": cfg.to_dict(), "group": args.group}


def cmd_preprocess(args):
    cfg, out, jobs = _context(args)
    corpus = _load(args, cfg, jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "path", "label", "group", "duration_s"])
    for seg in corpus.items:
        rel = f"segments/{seg.segment_id.replace('#', '_')}.wav"
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_wav(AudioClip(seg.samples, seg.sample_rate, seg.segment_id),
                                    bits=-32))
        w.writerow([seg.segment_id, rel, seg.label, seg.group or "",
                    repr(seg.samples.size / seg.sample_rate)])
    report.atomic_write(out / "segments.csv", buf.getvalue())
    log.info("%d segments written to %s", len(corpus.items), out)
    return 0


def cmd_extract(args):
    cfg, out, jobs = _context(args)
    corpus = _load(args, cfg, jobs)
    X, y, groups, ids, warns = corpus_features(corpus, cfg.mfcc)
    for w in warns:
        log.warning(w)
    report.atomic_write(out / "features.csv", report.features_csv(ids, y, groups, X))
    return 0


def cmd_sweep(args):
    cfg, out, jobs = _context(args)
    corpus = _load(args, cfg, jobs)
    axes = AXES if args.axis == "all" else (AXIS_ALIASES[args.axis],)
    cache = FeatureCache()
    settings = _settings(cfg, args.group)
    results = []
    for name in axes:
        axis = cfg.sweep.grid_axis(name)
        results += sweep_axis(corpus, axis, axis.base_config(cfg.mfcc), settings, cache, jobs)
    report.write_outputs(out, corpus.name, results, cfg.eval.seed, "sweep", _extra(cfg, args))
    return 0


def cmd_combos(args):
    cfg, out, jobs = _context(args)
    corpus = _load(args, cfg, jobs)
    results = run_combinations(corpus, cfg.sweep.named_combinations(), cfg.mfcc,
                               _settings(cfg, args.group), FeatureCache(), jobs)
    paths = report.write_outputs(out, corpus.name, results, cfg.eval.seed, "combos",
                                 _extra(cfg, args))
    sys.stdout.write(paths["summary"].read_text(encoding="utf-8"))
    return 0


def cmd_evaluate(args):
    cfg, out, jobs = _context(args)
    corpus = _load(args, cfg, jobs)
    result = evaluate_config(corpus, cfg.mfcc, _settings(cfg, args.group),
                             axis="single", param="group",
                             value=args.group if args.group is not None else "all")
    if not result.ok:
        raise HarnessError(result.error)
    paths = report.write_outputs(out, corpus.name, [result], cfg.eval.seed, "evaluate",
                                 _extra(cfg, args))
    sys.stdout.write(paths["summary"].read_text(encoding="utf-8"))
    return 0


def cmd_synth(args):
    cfg, out, _ = _context(args)
    manifest = write_corpus(out, n_clips=args.n_clips, seed=cfg.eval.seed,
                            sample_rate=cfg.ingest.target_sample_rate)
    log.info("wrote %s", manifest)
    print(manifest)
    return 0


def cmd_dump_config(args):
    cfg = HarnessConfig.load(args.config) if args.config else HarnessConfig()
    sys.stdout.write(cfg.dump())
    return 0


COMMANDS = {
    "preprocess": cmd_preprocess, "extract": cmd_extract, "sweep": cmd_sweep,
    "combos": cmd_combos, "evaluate": cmd_evaluate, "synth": cmd_synth,
    "dump-config": cmd_dump_config,
}


def _fail(exc, code):
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except VALIDATION_ERRORS as exc:
        return _fail(exc, 1)
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        return _fail(exc, 2)


if __name__ == "__main__":
    sys.exit(main())
