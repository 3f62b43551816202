"""RBF soft-margin SVM trained by SMO, plus feature standardisation."""

from __future__ import annotations

import json
import warnings
from collections import OrderedDict
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DegenerateTrainingError

STD_FLOOR = 1e-12
FULL_KERNEL_LIMIT = 4096
MODEL_FORMAT_VERSION = 1


@runtime_checkable
class Classifier(Protocol):
    """What cross-validation needs from a model.

    ``decision_function`` returns one real score per row; higher means more
    likely positive (label 1).
    """

    def fit(self, X, y): ...

    def decision_function(self, X): ...


class Standardizer(TransformerMixin, BaseEstimator):
    """Per-feature z-scoring with a floored standard deviation.

    Features that are constant on the training data map to 0.
    """

    def __init__(self, floor=STD_FLOOR):
        self.floor = floor

    def fit(self, X, y=None):
        X = check_array(X)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.constant_ = std < self.floor
        self.scale_ = np.maximum(std, self.floor)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        Z = (X - self.mean_) / self.scale_
        Z[:, self.constant_] = 0.0
        return Z


def rbf_kernel(A, B, gamma):
    """exp(-gamma * ||a - b||^2) for every pair of rows.

    Distances are summed per pair, so a row comes out bit-identical whether it
    is computed alone or as part of the full matrix.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


class _KernelRows:
    """Row access to the signed kernel Q_ij = y_i y_j k(x_i, x_j).

    Small problems keep the whole matrix; large ones an LRU of rows.
    """

    def __init__(self, X, y, gamma, cache_rows=1024):
        self.X, self.y, self.gamma = X, y, gamma
        n = X.shape[0]
        if n <= FULL_KERNEL_LIMIT:
            self.full = rbf_kernel(X, X, gamma) * np.outer(y, y)
            self.diag = np.diag(self.full).copy()
        else:
            self.full = None
            self.diag = np.ones(n)
            self._rows = OrderedDict()
            self._cap = cache_rows

    def row(self, i):
        if self.full is not None:
            return self.full[i]
        r = self._rows.get(i)
        if r is None:
            r = rbf_kernel(self.X[i:i + 1], self.X, self.gamma)[0] * (self.y[i] * self.y)
            self._rows[i] = r
            if len(self._rows) > self._cap:
                self._rows.popitem(last=False)
        else:
            self._rows.move_to_end(i)
        return r


def smo_solve(Q: _KernelRows, y, C, tol, max_iter):
    """Minimise 0.5 a'Qa - sum(a) s.t. y'a = 0, 0 <= a <= C.

    First-order maximal-violating-pair working set selection; ties go to the
    lowest index. Returns (alpha, bias, iterations, converged).
    """
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    converged = False
    while True:
        below = alpha < C
        above = alpha > 0
        up = (pos & below) | (~pos & above)
        low = (pos & above) | (~pos & below)
        v = -y * grad
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        if v[i] - v[j] <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        Qi, Qj = Q.row(i), Q.row(j)
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(Q.diag[i] + Q.diag[j] + 2.0 * Qi[j], 1e-12)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            else:
                if ni < 0:
                    ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            else:
                if nj > C:
                    nj, ni = C, C + diff
        else:
            quad = max(Q.diag[i] + Q.diag[j] - 2.0 * Qi[j], 1e-12)
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            else:
                if ni < 0:
                    ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        grad += Qi * (ni - ai) + Qj * (nj - aj)

    v = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = v[free].mean()
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        bias = 0.5 * (v[up].max() + v[low].min())
    return alpha, float(bias), it, converged


class RbfSVC(ClassifierMixin, BaseEstimator):
    """Binary soft-margin SVM with an RBF kernel, trained by SMO.

    Parameters
    ----------
    C : float, default=1.0
        Box constraint on the dual variables.
    gamma : float, default=0.1
        RBF width, ``k(x, z) = exp(-gamma * ||x - z||^2)``.
    kkt_tolerance : float, default=1e-3
        Training stops once the maximal KKT violation falls below this.
    max_passes : int, default=200
        Iteration budget in units of ``n_samples`` pair updates.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        ``classes_[1]`` is the positive class.
    support_vectors_ : ndarray of shape (n_SV, n_features)
    dual_coef_ : ndarray of shape (n_SV,)
        ``alpha_i * y_i`` for the stored vectors (those with ``alpha_i > 0``).
    intercept_ : float
    converged_ : bool
    n_iter_ : int
    """

    def __init__(self, C=1.0, gamma=0.1, kkt_tolerance=1e-3, max_passes=200):
        self.C = C
        self.gamma = gamma
        self.kkt_tolerance = kkt_tolerance
        self.max_passes = max_passes

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        for name in ("C", "gamma", "kkt_tolerance", "max_passes"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        classes = np.unique(y)
        if classes.size != 2:
            raise DegenerateTrainingError(
                f"training needs exactly two classes, got {classes.tolist()}")
        self.classes_ = classes
        ys = np.where(y == classes[1], 1.0, -1.0)
        Q = _KernelRows(X, ys, self.gamma)
        alpha, bias, it, converged = smo_solve(
            Q, ys, float(self.C), float(self.kkt_tolerance),
            int(self.max_passes) * X.shape[0])
        if not converged:
            warnings.warn(f"SMO stopped after {it} iterations without reaching "
                          f"kkt_tolerance={self.kkt_tolerance}", ConvergenceWarning)
        sv = alpha > 0
        self.alpha_ = alpha
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * ys[sv]
        self.intercept_ = bias
        self.converged_ = converged
        self.n_iter_ = it
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "dual_coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.support_vectors_.shape[0] == 0:
            return np.full(X.shape[0], self.intercept_)
        K = rbf_kernel(X, self.support_vectors_, self.gamma)
        return K @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        # ties go to the negative class
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


def dump_model(model: RbfSVC, standardizer: Standardizer | None = None) -> str:
    """Serialise a fitted model (and optional standardiser) to JSON text."""
    check_is_fitted(model, "dual_coef_")
    doc = {
        "format": "mfccsweep.svm",
        "version": MODEL_FORMAT_VERSION,
        "params": model.get_params(),
        "classes": model.classes_.tolist(),
        "support_vectors": model.support_vectors_.tolist(),
        "dual_coef": model.dual_coef_.tolist(),
        "intercept": model.intercept_,
        "converged": model.converged_,
        "standardizer": None,
    }
    if standardizer is not None:
        check_is_fitted(standardizer, "mean_")
        doc["standardizer"] = {
            "floor": standardizer.floor,
            "mean": standardizer.mean_.tolist(),
            "scale": standardizer.scale_.tolist(),
            "constant": standardizer.constant_.tolist(),
        }
    return json.dumps(doc, sort_keys=True)


def load_model(text: str):
    """Inverse of :func:`dump_model`; returns ``(model, standardizer_or_None)``."""
    doc = json.loads(text)
    if doc.get("format") != "mfccsweep.svm":
        raise ValueError("not an mfccsweep SVM model")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    model = RbfSVC(**doc["params"])
    model.classes_ = np.array(doc["classes"])
    sv = np.array(doc["support_vectors"], dtype=np.float64)
    model.dual_coef_ = np.array(doc["dual_coef"], dtype=np.float64)
    model.n_features_in_ = sv.shape[1] if sv.ndim == 2 else 0
    model.support_vectors_ = sv.reshape(-1, model.n_features_in_)
    model.intercept_ = float(doc["intercept"])
    model.converged_ = bool(doc["converged"])
    std = None
    if doc["standardizer"] is not None:
        s = doc["standardizer"]
        std = Standardizer(floor=s["floor"])
        std.mean_ = np.array(s["mean"], dtype=np.float64)
        std.scale_ = np.array(s["scale"], dtype=np.float64)
        std.constant_ = np.array(s["constant"], dtype=bool)
        std.n_features_in_ = std.mean_.size
    return model, std
