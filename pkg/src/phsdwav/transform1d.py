"""Multilevel non-stationary wavelet analysis of one (complex) signal.

Each level halves the grid spacing's resolution, so the per-sample rate seen
by level ``l`` (``l = 1`` finest) is ``theta_base * 2**(l - 1)``.  Boundaries
are periodic; with orthonormal filters every step is an orthogonal map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GeometryError
from .filterbank import DEFAULT_QUANTUM, THETA_MAX, FilterPair, filter_cache_get

DEFAULT_LEVELS = 4


@dataclass
class FrequencyRowPyramid:
    eta_index: int
    theta_base: float
    levels: int
    approx: np.ndarray
    details: list[np.ndarray] = field(default_factory=list)
    original_length: int = 0

    def band_lengths(self) -> list[int]:
        return [len(self.approx)] + [len(d) for d in self.details]

    def check(self):
        w, lv = self.original_length, self.levels
        if lv < 1 or w % (1 << lv) or len(self.details) != lv:
            raise GeometryError(f"inconsistent pyramid: W={w}, L={lv}, {len(self.details)} detail bands")
        if len(self.approx) != w >> lv:
            raise GeometryError(f"approx band has length {len(self.approx)}, expected {w >> lv}")
        for lvl, d in enumerate(self.details, start=1):
            if len(d) != w >> lvl:
                raise GeometryError(f"detail level {lvl} has length {len(d)}, expected {w >> lvl}")


def level_thetas(theta_base: float, levels: int) -> list[float]:
    return [min(theta_base * 2.0 ** (lvl - 1), THETA_MAX) for lvl in range(1, levels + 1)]


def max_levels(width: int, order_n: int, cap: int = DEFAULT_LEVELS) -> int:
    """Largest ``L <= cap`` with ``width % 2**L == 0`` and ``width / 2**L >= 2N``."""
    lv = 0
    while lv < cap and width % (1 << (lv + 1)) == 0 and (width >> (lv + 1)) >= 2 * order_n:
        lv += 1
    return lv


def check_geometry(width: int, levels: int, order_n: int):
    # Periodized QMF filters stay orthonormal on any even length, so only
    # divisibility is required; the support rule lives in max_levels.
    if levels < 1:
        raise GeometryError(f"levels must be positive, got {levels}")
    if width < 2 or width % (1 << levels):
        raise GeometryError(f"length {width} not divisible by 2^{levels}")


def resolve_levels(width: int, order_n: int, levels: int | None) -> int:
    """Explicit levels pass through; the default is the deepest that meets the support rule."""
    if levels is not None:
        check_geometry(width, levels, order_n)
        return levels
    lv = max_levels(width, order_n)
    if lv < 1:
        raise GeometryError(f"length {width} cannot hold one level of a {2 * order_n}-tap filter")
    return lv


@lru_cache(maxsize=256)
def _windows(n: int, taps: int) -> np.ndarray:
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    idx.flags.writeable = False
    return idx


@lru_cache(maxsize=256)
def _polyphase(half: int, ntaps_half: int) -> np.ndarray:
    # output sample 2m + r collects tap r + 2i from coefficient m - i
    idx = (np.arange(half)[:, None] - np.arange(ntaps_half)[None, :]) % half
    idx.flags.writeable = False
    return idx


def analysis_step(x: np.ndarray, pair: FilterPair) -> tuple[np.ndarray, np.ndarray]:
    """One periodic convolution-decimation step along the last axis."""
    idx = _windows(x.shape[-1], pair.length)
    blocks = x[..., idx]
    return blocks @ pair.analysis_lowpass, blocks @ pair.analysis_highpass


def synthesis_step(approx: np.ndarray, detail: np.ndarray, pair: FilterPair) -> np.ndarray:
    """Adjoint (= inverse) of :func:`analysis_step`."""
    half = approx.shape[-1]
    dtype = np.result_type(approx, detail, np.float64)
    out = np.empty(approx.shape[:-1] + (2 * half,), dtype=dtype)
    idx = _polyphase(half, pair.length // 2)
    a, d = approx[..., idx], detail[..., idx]
    lo, hi = pair.analysis_lowpass, pair.analysis_highpass
    for r in (0, 1):
        out[..., r::2] = a @ lo[r::2] + d @ hi[r::2]
    return out


def analyze_row(signal, theta_base: float, levels: int, order_n: int,
                eta_index: int = 0, quantum: float = DEFAULT_QUANTUM) -> FrequencyRowPyramid:
    x = np.asarray(signal)
    if x.ndim != 1:
        raise GeometryError("analyze_row expects a 1-D signal")
    w = x.shape[0]
    check_geometry(w, levels, order_n)
    details = []
    for theta in level_thetas(theta_base, levels):
        x, d = analysis_step(x, filter_cache_get(theta, order_n, quantum))
        details.append(d)
    return FrequencyRowPyramid(eta_index, float(theta_base), levels, x, details, w)


def synthesize_row(pyramid: FrequencyRowPyramid, order_n: int,
                   quantum: float = DEFAULT_QUANTUM) -> np.ndarray:
    pyramid.check()
    x = pyramid.approx
    thetas = level_thetas(pyramid.theta_base, pyramid.levels)
    for lvl in range(pyramid.levels, 0, -1):
        x = synthesis_step(x, pyramid.details[lvl - 1], filter_cache_get(thetas[lvl - 1], order_n, quantum))
    return x
