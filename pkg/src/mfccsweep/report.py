"""Result files: CSV/JSON tables, text summary and per-axis plot series."""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
from pathlib import Path

import numpy as np

from .evaluation import METRICS
from .sweep import SweepResult, improvement_report

RESULTS_HEADER = ["dataset", "axis", "param", "value", "metric", "mean", "std"]
SUMMARY_COLUMNS = [("accuracy", "Accuracy"), ("auc", "AUC"), ("f1", "F1"),
                   ("precision", "Precision"), ("eer", "EER")]


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return repr(float(x))


def _value(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def results_csv(dataset: str, results: list[SweepResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in results:
        for m in METRICS:
            mean = r.metrics.mean(m) if r.ok else None
            std = r.metrics.std(m) if r.ok else None
            w.writerow([dataset, r.axis, r.param, _value(r.value), m, _num(mean), _num(std)])
    return buf.getvalue()


def environment() -> dict:
    import scipy
    import sklearn

    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "scikit-learn": sklearn.__version__}


def results_json(dataset: str, results: list[SweepResult], seed: int, extra=None) -> str:
    doc = {
        "dataset": dataset,
        "seed": seed,
        "environment": environment(),
        "results": [r.to_dict() for r in results],
        "improvements": improvement_report(results),
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False,
                      default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _cell(r: SweepResult, metric: str) -> str:
    if not r.ok:
        return "failed"
    mean, std = r.metrics.mean(metric), r.metrics.std(metric)
    if np.isnan(mean):
        return "n/a"
    return f"{100 * mean:.2f} ± {100 * std:.2f}"


def summary_table(dataset: str, results: list[SweepResult], model: str = "SVM") -> str:
    """Plain-text table: one row per result, mean ± std in percent per metric."""
    head = ["Combination", "Frame (ms)", "Hop (ms)", "Coef."] + \
        [f"{model} {label}" for _, label in SUMMARY_COLUMNS]
    rows = []
    for r in results:
        cfg = r.grid_point
        name = str(r.value) if r.axis == "combination" else f"{r.param}={_value(r.value)}"
        rows.append([name, f"{cfg.frame_length_ms:g}", f"{cfg.hop_length_ms:g}",
                     str(cfg.num_coefficients)] + [_cell(r, m) for m, _ in SUMMARY_COLUMNS])
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    lines = [f"Dataset: {dataset}", "",
             "  ".join(h.ljust(w) for h, w in zip(head, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    gains = improvement_report(results)
    if gains:
        lines.append("")
        for g in gains:
            lines.append(
                f"{g['target']} vs {g['baseline']} ({g['metric']}): "
                f"{100 * g['target_value']:.2f}% vs {100 * g['baseline_value']:.2f}%, "
                f"absolute {100 * g['absolute']:+.2f} points, "
                f"relative {100 * g['relative']:+.2f}%")
    failed = [r for r in results if not r.ok]
    if failed:
        lines.append("")
        lines += [f"failed: {r.param}={_value(r.value)}: {r.error}" for r in failed]
    lines.append("")
    return "\n".join(lines)


def plot_series(results: list[SweepResult], metric: str = "accuracy") -> dict[str, str]:
    """One ``x,y,yerr`` CSV per swept axis; failed points are left out."""
    by_axis: dict[str, list] = {}
    for r in results:
        if r.axis == "combination":
            continue
        by_axis.setdefault(r.axis, [])
        if r.ok and not np.isnan(r.metrics.mean(metric)):
            by_axis[r.axis].append((r.value, r.metrics.mean(metric), r.metrics.std(metric)))
    out = {}
    for axis, pts in by_axis.items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "yerr"])
        for x, y, e in pts:
            w.writerow([_value(x), _num(y), _num(e)])
        out[axis] = buf.getvalue()
    return out


def write_outputs(out_dir, dataset: str, results: list[SweepResult], seed: int,
                  stem: str = "results", extra=None) -> dict[str, Path]:
    """Write every artefact for one run under ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    paths = {
        "csv": out_dir / f"{stem}.csv",
        "json": out_dir / f"{stem}.json",
        "summary": out_dir / f"{stem}_summary.txt",
        "timings": out_dir / f"{stem}_timings.json",
    }
    atomic_write(paths["csv"], results_csv(dataset, results))
    atomic_write(paths["json"], results_json(dataset, results, seed, extra))
    atomic_write(paths["summary"], summary_table(dataset, results))
    atomic_write(paths["timings"], json.dumps(
        [{"axis": r.axis, "value": r.value, "wall_time": r.wall_time} for r in results],
        indent=2, default=_json_default) + "\n")
    for axis, text in plot_series(results).items():
        p = out_dir / f"series_{_safe(dataset)}_{axis}.csv"
        atomic_write(p, text)
        paths[f"series_{axis}"] = p
    return paths


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def features_csv(ids, labels, groups, X) -> str:
    """``id,label[,group],c0..c{L-1}``; the group column appears when any row has one."""
    with_group = groups is not None and any(g is not None for g in groups)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label"] + (["group"] if with_group else [])
               + [f"c{i}" for i in range(X.shape[1])])
    for i, row in enumerate(X):
        lead = [ids[i], int(labels[i])] + ([groups[i] or ""] if with_group else [])
        w.writerow(lead + [repr(float(v)) for v in row])
    return buf.getvalue()
