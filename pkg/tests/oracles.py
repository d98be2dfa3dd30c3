"""Reference implementations written independently of the package code."""
from __future__ import annotations

import math

import mpmath
import numpy as np


def daubechies_bezout(order_n: int, dps: int = 50) -> np.ndarray:
    """Classical minimal-phase dbN lowpass taps, normalized to unit l2 norm.

    Uses ``|m0|^2 = cos^2N(w/2) P(sin^2(w/2))`` with the Bezout polynomial
    ``P(y) = sum_k C(N-1+k, k) y^k`` and picks the in-disk root of each
    ``z + 1/z = 2 - 4y`` pair.  Taps are listed from the highest power of z.
    """
    with mpmath.workdps(dps):
        poly = [mpmath.binomial(order_n - 1 + k, k) for k in range(order_n)]
        ys = mpmath.polyroots(poly[::-1], maxsteps=400, extraprec=4 * dps) if order_n > 1 else []
        coeffs = [mpmath.mpf(1)]
        for _ in range(order_n):
            coeffs = _mul(coeffs, [mpmath.mpf(1), mpmath.mpf(1)])
        for y in ys:
            b = 2 - 4 * y
            z = (b - mpmath.sqrt(b * b - 4)) / 2
            if abs(z) > 1:
                z = 1 / z
            coeffs = _mul(coeffs, [mpmath.mpf(1), -z])
        taps = [mpmath.re(c) for c in coeffs]
        norm = mpmath.sqrt(sum(t * t for t in taps))
        taps = [t / norm for t in taps]
        if max(taps, key=abs) < 0:
            taps = [-t for t in taps]
        return np.array([float(t) for t in taps])


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def dense_level_matrix(lowpass: np.ndarray, n: int) -> np.ndarray:
    """``n x n`` periodic analysis matrix: lowpass rows on top, highpass below.

    Row ``k`` of the lowpass half is ``sum_m lowpass[m] x[2k + L-1-m]`` and the
    highpass uses the alternating flip ``g[m] = (-1)^m lowpass[L-1-m]``.
    """
    taps = len(lowpass)
    g = [(-1) ** m * lowpass[taps - 1 - m] for m in range(taps)]
    mat = np.zeros((n, n))
    for k in range(n // 2):
        for m in range(taps):
            col = (2 * k + taps - 1 - m) % n
            mat[k, col] += lowpass[m]
            mat[n // 2 + k, col] += g[m]
    return mat


def naive_dft_rows(u: np.ndarray) -> np.ndarray:
    """``(1/H) sum_y u[y, t] exp(-2 pi i eta y / H)`` for ``eta = -H/2 .. H/2-1``."""
    h, w = u.shape
    out = np.zeros((h, w), dtype=complex)
    for r, eta in enumerate(range(-(h // 2), h - h // 2)):
        for y in range(h):
            out[r] += u[y] * complex(math.cos(2 * math.pi * eta * y / h), -math.sin(2 * math.pi * eta * y / h))
    return out / h


def haar_level(u: np.ndarray):
    """One 2-D Haar level from explicit 2x2 block sums: (LL, LH, HL, HH)."""
    a, b = u[0::2, 0::2], u[0::2, 1::2]
    c, d = u[1::2, 0::2], u[1::2, 1::2]
    ll = (a + b + c + d) / 2
    hl = (b - a + d - c) / 2   # highpass along t (columns)
    lh = (c + d - a - b) / 2   # highpass along y (rows)
    hh = (a - b - c + d) / 2
    return ll, lh, hl, hh


def loop_mse(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += (float(a[i, j]) - float(b[i, j])) ** 2
    return total / a.size


def histogram_entropy(values) -> float:
    counts: dict[int, int] = {}
    for v in values:
        if v != 0:
            counts[int(v)] = counts.get(int(v), 0) + 1
    n = sum(counts.values())
    return -sum(c * math.log2(c / n) for c in counts.values()) if n else 0.0
