"""Slow, literal reference computations used as test oracles.

Nothing here imports the package's numerical code paths.
"""

import math

import numpy as np


def naive_dft(x, n_fft=None, bins=None):
    """Direct O(K^2) DFT with exact integer phase reduction (k*n mod K)."""
    x = np.asarray(x, dtype=np.float64)
    K = x.shape[-1] if n_fft is None else n_fft
    pad = np.zeros(x.shape[:-1] + (K,), dtype=np.complex128)
    pad[..., :x.shape[-1]] = x
    roots = np.exp(-2j * np.pi * np.arange(K) / K)
    ks = np.arange(K) if bins is None else np.asarray(bins)
    n = np.arange(K)
    out = np.empty(pad.shape[:-1] + (ks.size,), dtype=np.complex128)
    step = max(1, (1 << 22) // K)
    for lo in range(0, ks.size, step):
        k = ks[lo:lo + step]
        W = roots[(k[:, None] * n[None, :]) % K]
        out[..., lo:lo + step] = pad @ W.T
    return out


def naive_power_real(frames, n_fft):
    """|DFT|^2 over bins 0..K/2 via real cos/sin sums on the unpadded samples.

    Zero padding contributes nothing, so only the first N columns are used.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    N = frames.shape[1]
    half = n_fft // 2 + 1
    n = np.arange(N)
    re = np.empty((frames.shape[0], half))
    im = np.empty((frames.shape[0], half))
    step = max(1, (1 << 23) // N)
    for lo in range(0, half, step):
        k = np.arange(lo, min(half, lo + step))
        phase = 2 * np.pi * ((k[:, None] * n[None, :]) % n_fft) / n_fft
        re[:, lo:lo + k.size] = frames @ np.cos(phase).T
        im[:, lo:lo + k.size] = -(frames @ np.sin(phase).T)
    return re ** 2 + im ** 2


def literal_filterbank(J, n_fft, rate, fmin, fmax):
    """Triangular filters built one bin at a time from the textbook definition."""
    def mel(f):
        return 2595.0 * math.log10(1.0 + f / 700.0)

    def imel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    lo_m, hi_m = mel(fmin), mel(fmax)
    edges = [imel(lo_m + (hi_m - lo_m) * i / (J + 1)) for i in range(J + 2)]
    fb = np.zeros((J, n_fft // 2 + 1))
    for j in range(J):
        a, b, c = edges[j], edges[j + 1], edges[j + 2]
        for k in range(n_fft // 2 + 1):
            f = k * rate / n_fft
            if a < f <= b:
                fb[j, k] = (f - a) / (b - a)
            elif b < f < c:
                fb[j, k] = (c - f) / (c - b)
        fb[j] /= fb[j].max()
    return fb, np.array(edges)


def literal_mfcc(signal, L, frame_ms, hop_ms, J, rate, fmin=0.0, fmax=None, fb=None):
    """Framing, Hamming window, naive DFT power, filterbank sums, log10 with
    floor 1e-10 and the unscaled DCT, written out term by term."""
    return literal_mfcc_batch([signal], L, frame_ms, hop_ms, J, rate, fmin, fmax, fb)[0]


def literal_mfcc_batch(signals, L, frame_ms, hop_ms, J, rate, fmin=0.0, fmax=None, fb=None):
    """:func:`literal_mfcc` for many signals sharing one DFT table."""
    fmax = rate / 2 if fmax is None else fmax
    N = int(round(frame_ms * rate / 1000))
    M = int(round(hop_ms * rate / 1000))
    K = 1
    while K < N:
        K *= 2
    if fb is None:
        fb, _ = literal_filterbank(J, K, rate, fmin, fmax)
    w = np.array([0.54 - 0.46 * math.cos(2 * math.pi * n / (N - 1)) for n in range(N)]) \
        if N > 1 else np.ones(1)
    frames, counts = [], []
    for signal in signals:
        starts = []
        s = 0
        while s + N <= len(signal):
            starts.append(s)
            s += M
        frames += [signal[s:s + N] * w for s in starts]
        counts.append(len(starts))
    A = naive_power_real(np.array(frames), K)
    E = A @ fb.T
    logE = np.log10(np.maximum(E, 1e-10))
    out = np.zeros((len(frames), L))
    for m in range(L):
        for j in range(J):
            out[:, m] += math.cos(m * math.pi / J * (j + 0.5)) * logE[:, j]
    return np.split(out, np.cumsum(counts)[:-1])


def pairwise_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def brute_force_eer(scores, labels):
    """Evaluate FPR/FNR at every candidate threshold by direct counting, then
    interpolate linearly at the first sign change of FNR - FPR."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    thresholds = [math.inf] + sorted(set(scores), reverse=True)
    pts = []
    for t in thresholds:
        fp = sum(1 for s in neg if s >= t)
        fn = sum(1 for s in pos if s < t)
        pts.append((fp / len(neg), fn / len(pos)))
    for i, (fpr, fnr) in enumerate(pts):
        if fnr - fpr <= 0:
            if fnr - fpr == 0:
                return fpr
            fpr0, fnr0 = pts[i - 1]
            d0, d1 = fnr0 - fpr0, fnr - fpr
            lam = d0 / (d0 - d1)
            return fpr0 + lam * (fpr - fpr0)
    raise AssertionError("FNR - FPR never crossed zero")


def rbf_gram(A, B, gamma):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.empty((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        for j in range(B.shape[0]):
            d = A[i] - B[j]
            out[i, j] = math.exp(-gamma * float(d @ d))
    return out


def svm_objectives(X, y_pm, alpha, bias, C, gamma):
    """(primal, dual) objectives of the soft-margin RBF SVM at ``alpha``."""
    K = rbf_gram(X, X, gamma)
    Q = K * np.outer(y_pm, y_pm)
    aQa = float(alpha @ Q @ alpha)
    f = K @ (alpha * y_pm) + bias
    hinge = np.maximum(0.0, 1.0 - y_pm * f)
    primal = 0.5 * aQa + C * hinge.sum()
    dual = alpha.sum() - 0.5 * aQa
    return primal, dual


def kkt_violation(X, y_pm, alpha, bias, C, gamma):
    """Largest violation of the per-point KKT conditions."""
    K = rbf_gram(X, X, gamma)
    margin = y_pm * (K @ (alpha * y_pm) + bias)
    worst = 0.0
    for a, m in zip(alpha, margin):
        if a <= 0:
            worst = max(worst, 1 - m)
        elif a >= C:
            worst = max(worst, m - 1)
        else:
            worst = max(worst, abs(m - 1))
    return worst


def two_point_dual(x1, x2, gamma, C):
    """Closed-form dual for one point per class: alpha = 2/(k11+k22-2k12), clipped.

    Maximising 2a - a^2 (k11 + k22 - 2 k12) / 2 over a in [0, C].
    """
    d = np.asarray(x1, float) - np.asarray(x2, float)
    k12 = math.exp(-gamma * float(d @ d))
    a = 2.0 / (1.0 + 1.0 - 2.0 * k12)
    return min(max(a, 0.0), C)
