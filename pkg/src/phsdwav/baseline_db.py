"""Separable 2-D Daubechies transform with periodic boundaries.

Bands are named by the filter applied along ``t`` then along ``y``: ``HL``
is highpass in ``t`` (vertical edges), ``LH`` highpass in ``y`` (horizontal
edges).  The dbN taps come from the filter bank at ``theta = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .filterbank import filter_cache_get
from .imageio import ImageBuffer
from .transform1d import analysis_step, max_levels, synthesis_step

DETAIL_KINDS = ("LH", "HL", "HH")


@dataclass
class TensorPyramid:
    approx: np.ndarray
    details: list[dict[str, np.ndarray]]  # details[l-1] holds level l (finest first)
    levels: int
    order_n: int
    width: int
    height: int
    bit_depth: int = 8

    def check(self):
        lv = self.levels
        if lv < 1 or len(self.details) != lv:
            raise GeometryError("level count does not match detail bands")
        if self.approx.shape != (self.height >> lv, self.width >> lv):
            raise GeometryError(f"LL band has shape {self.approx.shape}")
        for lvl, quad in enumerate(self.details, start=1):
            shape = (self.height >> lvl, self.width >> lvl)
            for kind in DETAIL_KINDS:
                if quad[kind].shape != shape:
                    raise GeometryError(f"{kind} level {lvl} has shape {quad[kind].shape}, expected {shape}")

    def energy(self) -> float:
        e = np.sum(self.approx ** 2)
        for quad in self.details:
            e += sum(np.sum(quad[k] ** 2) for k in DETAIL_KINDS)
        return float(e)

    def map_coefficients(self, fn) -> "TensorPyramid":
        return TensorPyramid(fn(self.approx), [{k: fn(q[k]) for k in DETAIL_KINDS} for q in self.details],
                             self.levels, self.order_n, self.width, self.height, self.bit_depth)


def resolve_levels_2d(width: int, height: int, order_n: int, levels: int | None) -> int:
    if levels is not None:
        _check(width, height, levels)
        return levels
    lv = min(max_levels(width, order_n), max_levels(height, order_n))
    if lv < 1:
        raise GeometryError(f"{width}x{height} cannot hold one level of a {2 * order_n}-tap filter")
    return lv


def _check(width: int, height: int, levels: int):
    if levels < 1:
        raise GeometryError("levels must be positive")
    for n in (width, height):
        if n < 2 or n % (1 << levels):
            raise GeometryError(f"size {width}x{height} not divisible by 2^{levels}")


def dwt2_db(image: ImageBuffer, levels: int | None = None, order_n: int = 9) -> TensorPyramid:
    u = image.samples
    h, w = u.shape
    levels = resolve_levels_2d(w, h, order_n, levels)
    pair = filter_cache_get(0.0, order_n)
    x = u
    details = []
    for _ in range(levels):
        lo_t, hi_t = analysis_step(x, pair)
        ll, lh = (b.T for b in analysis_step(lo_t.T, pair))
        hl, hh = (b.T for b in analysis_step(hi_t.T, pair))
        details.append({"LH": lh, "HL": hl, "HH": hh})
        x = ll
    return TensorPyramid(x, details, levels, order_n, w, h, image.bit_depth)


def idwt2_db(pyramid: TensorPyramid) -> ImageBuffer:
    pyramid.check()
    pair = filter_cache_get(0.0, pyramid.order_n)
    x = pyramid.approx
    for quad in reversed(pyramid.details):
        lo_t = synthesis_step(x.T, quad["LH"].T, pair).T
        hi_t = synthesis_step(quad["HL"].T, quad["HH"].T, pair).T
        x = synthesis_step(lo_t, hi_t, pair)
    return ImageBuffer(x, pyramid.bit_depth)
