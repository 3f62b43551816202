"""Iterative radix-2 FFT, vectorised over leading axes."""

import numpy as np

_bitrev_cache = {}
_twiddle_cache = {}


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (int(n) - 1).bit_length()


def is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _bit_reversal(n: int) -> np.ndarray:
    perm = _bitrev_cache.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        idx = np.arange(n)
        perm = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            perm |= ((idx >> b) & 1) << (bits - 1 - b)
        _bitrev_cache[n] = perm
    return perm


def _twiddles(size: int) -> np.ndarray:
    tw = _twiddle_cache.get(size)
    if tw is None:
        tw = np.exp(-2j * np.pi * np.arange(size // 2) / size)
        _twiddle_cache[size] = tw
    return tw


def fft(x: np.ndarray) -> np.ndarray:
    """Decimation-in-time radix-2 FFT along the last axis.

    The last axis length must be a power of two.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if not is_pow2(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    lead = x.shape[:-1]
    a = x.reshape(-1, n)[:, _bit_reversal(n)].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        a = a.reshape(a.shape[0], n // size, size)
        even = a[:, :, :half]
        odd = a[:, :, half:] * _twiddles(size)
        a = np.concatenate([even + odd, even - odd], axis=2)
        size *= 2
    return a.reshape(*lead, n)


def rfft_power(frames: np.ndarray, n_fft: int) -> np.ndarray:
    """|FFT|^2 of real frames zero-padded to ``n_fft``, bins 0..n_fft/2."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[-1] > n_fft:
        raise ValueError("frame longer than FFT length")
    padded = np.zeros(frames.shape[:-1] + (n_fft,))
    padded[..., :frames.shape[-1]] = frames
    spec = fft(padded)[..., :n_fft // 2 + 1]
    return spec.real ** 2 + spec.imag ** 2
