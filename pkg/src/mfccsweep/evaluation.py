"""Stratified k-fold cross-validation and binary detection metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.base import clone

from .exceptions import UndefinedMetricError
from .svm import RbfSVC, Standardizer

METRICS = ("accuracy", "auc", "f1", "precision", "eer")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_folds(labels, k: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffle each class with a seeded generator, then deal round-robin.

    Dealing continues across classes from where the previous class stopped,
    so fold sizes also stay within one of each other.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments = np.full(labels.size, -1, dtype=int)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            warnings.warn(f"class {cls} has {idx.size} examples for k={k}; "
                          f"some folds will lack it", UserWarning)
        idx = idx[rng.permutation(idx.size)]
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldPlan(k, assignments, seed)


@dataclass(frozen=True)
class ConfusionMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate_precision: bool = False


def confusion_metrics(scores, labels, threshold: float = 0.0) -> ConfusionMetrics:
    """Accuracy, precision, recall and F1 with ``score > threshold`` predicted positive.

    With no predicted positives precision is reported as 0 and flagged.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.size == 0 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be non-empty and the same length")
    pred = scores > threshold
    tp = np.sum(pred & labels)
    fp = np.sum(pred & ~labels)
    fn = np.sum(~pred & labels)
    accuracy = np.mean(pred == labels)
    degenerate = tp + fp == 0
    precision = 0.0 if degenerate else tp / (tp + fp)
    recall = 0.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return ConfusionMetrics(float(accuracy), float(precision), float(recall), float(f1),
                            bool(degenerate))


def _split(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must be the same length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC/EER need at least one positive and one negative")
    return scores, labels, n_pos, n_neg


def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied pairs count one half."""
    scores, labels, n_pos, n_neg = _split(scores, labels)
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_points(scores, labels):
    """(FPR, FNR) at every threshold, from "nothing positive" to "everything positive".

    The threshold sweeps the distinct scores in decreasing order, predicting
    positive when ``score >= threshold``.
    """
    scores, labels, n_pos, n_neg = _split(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s, lab = scores[order], labels[order]
    tp = np.cumsum(lab)
    fp = np.cumsum(~lab)
    last = np.r_[s[1:] != s[:-1], True]
    fpr = np.r_[0.0, fp[last] / n_neg]
    fnr = np.r_[1.0, 1.0 - tp[last] / n_pos]
    return fpr, fnr


def eer(scores, labels) -> float:
    """Equal error rate, linearly interpolated between adjacent ROC points."""
    fpr, fnr = roc_points(scores, labels)
    d = fnr - fpr
    # d starts at +1 and ends at -1 or 0; it never increases
    hit = np.flatnonzero(d <= 0)[0]
    if d[hit] == 0:
        return float(fpr[hit])
    a = hit - 1
    lam = d[a] / (d[a] - d[hit])
    return float(fpr[a] + lam * (fpr[hit] - fpr[a]))


@dataclass
class MetricsRecord:
    """Per-fold metric values plus their mean and population std.

    Folds where a metric is undefined hold NaN and are excluded from that
    metric's aggregate.
    """

    folds: dict[str, list[float]]
    k: int
    flags: list[str] = field(default_factory=list)

    def mean(self, metric: str) -> float:
        v = np.asarray(self.folds[metric], dtype=np.float64)
        v = v[~np.isnan(v)]
        return float(v.mean()) if v.size else float("nan")

    def std(self, metric: str) -> float:
        v = np.asarray(self.folds[metric], dtype=np.float64)
        v = v[~np.isnan(v)]
        return float(v.std()) if v.size else float("nan")

    def summary(self) -> dict[str, tuple[float, float]]:
        return {m: (self.mean(m), self.std(m)) for m in METRICS}

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "flags": list(self.flags),
            "metrics": {m: {"folds": [_finite(x) for x in self.folds[m]],
                            "mean": _finite(self.mean(m)), "std": _finite(self.std(m))}
                        for m in METRICS},
        }


def _finite(x):
    return None if np.isnan(x) else float(x)


def restrict_to_group(X, y, groups, group):
    """Rows of ``X``, ``y`` whose group equals ``group``."""
    if groups is None:
        raise ValueError("group filter requested but no groups supplied")
    mask = np.asarray(groups, dtype=object) == group
    if not mask.any():
        raise ValueError(f"no examples in group {group!r}")
    return np.asarray(X)[mask], np.asarray(y)[mask], mask


def cross_validate(classifier=None, X=None, y=None, *, k=10, seed=0, plan=None,
                   groups=None, group=None, standardizer="default") -> MetricsRecord:
    """Stratified k-fold evaluation of a classifier template.

    Every fold gets fresh clones of ``standardizer`` and ``classifier``,
    fitted on the training portion only. ``standardizer=None`` disables
    scaling. With ``group`` set, the data are first restricted to that
    group and folds are drawn on the remainder.
    """
    if classifier is None:
        classifier = RbfSVC()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(int)
    if group is not None:
        X, y, _ = restrict_to_group(X, y, groups, group)
    if plan is None:
        plan = stratified_folds(y, k, seed)
    if plan.assignments.size != y.size:
        raise ValueError("fold plan does not cover the dataset")
    if standardizer == "default":
        standardizer = Standardizer()

    folds = {m: [] for m in METRICS}
    flags = []
    for f in range(plan.k):
        tr, te = plan.train_indices(f), plan.test_indices(f)
        if te.size == 0:
            for m in METRICS:
                folds[m].append(float("nan"))
            flags.append(f"fold {f}: empty test set")
            continue
        Xtr, Xte = X[tr], X[te]
        if standardizer is not None:
            scaler = clone(standardizer).fit(Xtr)
            Xtr, Xte = scaler.transform(Xtr), scaler.transform(Xte)
        model = clone(classifier).fit(Xtr, y[tr])
        scores = np.asarray(model.decision_function(Xte), dtype=np.float64)
        cm = confusion_metrics(scores, y[te])
        folds["accuracy"].append(cm.accuracy)
        folds["precision"].append(cm.precision)
        folds["f1"].append(cm.f1)
        if cm.degenerate_precision:
            flags.append(f"fold {f}: no predicted positives, precision set to 0")
        if getattr(model, "converged_", True) is False:
            flags.append(f"fold {f}: classifier did not converge")
        if len(np.unique(y[te])) < 2:
            folds["auc"].append(float("nan"))
            folds["eer"].append(float("nan"))
            flags.append(f"fold {f}: single-class test set, AUC/EER missing")
        else:
            folds["auc"].append(auc(scores, y[te]))
            folds["eer"].append(eer(scores, y[te]))
    return MetricsRecord(folds, plan.k, flags)
