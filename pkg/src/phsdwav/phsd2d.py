"""2-D polyharmonic subdivision wavelet transform.

The image is Fourier transformed along the periodic ``y`` axis (axis 0) and
every frequency row ``eta`` gets its own non-stationary wavelet analysis
along ``t`` with ``theta_base = theta_scale * |eta| / H``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, SymmetryError
from .filterbank import DEFAULT_QUANTUM
from .imageio import ImageBuffer
from .transform1d import FrequencyRowPyramid, analyze_row, check_geometry, resolve_levels, synthesize_row

DEFAULT_ORDER = 9
DEFAULT_THETA_SCALE = 2 * math.pi


def eta_indices(height: int) -> np.ndarray:
    """Frequency indices in the stored row order ``-H/2 .. H/2 - 1``."""
    return np.arange(-(height // 2), height - height // 2)


def dft_y(image) -> np.ndarray:
    """Rows ``eta = -H/2 .. H/2-1`` of ``(1/H) sum_y u(t, y) exp(-2 pi i eta y / H)``."""
    u = image.samples if isinstance(image, ImageBuffer) else np.asarray(image)
    h = u.shape[0]
    if h < 2:
        raise GeometryError("need at least two rows along y")
    return np.fft.fftshift(np.fft.fft(u, axis=0) / h, axes=0)


def inverse_dft_y(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows)
    return np.fft.ifft(np.fft.ifftshift(rows, axes=0) * rows.shape[0], axis=0)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass
class SubbandPyramid:
    """All frequency rows of one image.

    With ``hermitian_reduced`` only ``eta = 0 .. H/2`` are stored; rows
    ``-eta`` are the conjugates of rows ``eta``.
    """

    rows: list[FrequencyRowPyramid]
    width: int
    height: int
    levels: int
    order_n: int
    theta_scale: float
    hermitian_reduced: bool = True
    bit_depth: int = 8
    quantum: float = field(default=DEFAULT_QUANTUM, repr=False)

    @property
    def etas(self) -> list[int]:
        return [r.eta_index for r in self.rows]

    def multiplicity(self, eta: int) -> int:
        """How many full-spectrum rows a stored row stands for."""
        if not self.hermitian_reduced or eta == 0 or 2 * eta == self.height:
            return 1
        return 2

    def check(self):
        expected = list(range(self.height // 2 + 1)) if self.hermitian_reduced \
            else list(eta_indices(self.height))
        if self.etas != expected:
            raise GeometryError("pyramid rows do not match its geometry")
        for r in self.rows:
            if r.original_length != self.width or r.levels != self.levels:
                raise GeometryError(f"row eta={r.eta_index} has inconsistent geometry")
            r.check()

    def energy(self) -> float:
        total = 0.0
        for r in self.rows:
            e = np.sum(np.abs(r.approx) ** 2) + sum(np.sum(np.abs(d) ** 2) for d in r.details)
            total += self.multiplicity(r.eta_index) * e
        return float(total)

    def map_coefficients(self, fn) -> "SubbandPyramid":
        rows = [FrequencyRowPyramid(r.eta_index, r.theta_base, r.levels, fn(r.approx),
                                    [fn(d) for d in r.details], r.original_length)
                for r in self.rows]
        return SubbandPyramid(rows, self.width, self.height, self.levels, self.order_n,
                              self.theta_scale, self.hermitian_reduced, self.bit_depth, self.quantum)


def theta_for_eta(eta: int, height: int, theta_scale: float) -> float:
    return theta_scale * abs(int(eta)) / height


def forward_phsd(image: ImageBuffer, levels: int | None = None, order_n: int = DEFAULT_ORDER,
                 theta_scale: float = DEFAULT_THETA_SCALE, hermitian_reduced: bool = True,
                 quantum: float = DEFAULT_QUANTUM) -> SubbandPyramid:
    u = image.samples
    h, w = u.shape
    if not (_is_pow2(w) and _is_pow2(h)) or h < 2:
        raise GeometryError(f"image size {w}x{h} must be powers of two")
    levels = resolve_levels(w, order_n, levels)
    check_geometry(w, levels, order_n)
    if hermitian_reduced:
        spectrum = np.fft.rfft(u, axis=0) / h
        etas = range(h // 2 + 1)
    else:
        spectrum = dft_y(u)
        etas = eta_indices(h)
    rows = [analyze_row(spectrum[i], theta_for_eta(eta, h, theta_scale), levels, order_n,
                        eta_index=int(eta), quantum=quantum)
            for i, eta in enumerate(etas)]
    return SubbandPyramid(rows, w, h, levels, order_n, theta_scale, hermitian_reduced,
                          image.bit_depth, quantum)


def inverse_phsd(pyramid: SubbandPyramid, symmetry_tol: float = 1e-8) -> ImageBuffer:
    pyramid.check()
    h = pyramid.height
    spectrum = np.stack([synthesize_row(r, pyramid.order_n, pyramid.quantum) for r in pyramid.rows])
    if pyramid.hermitian_reduced:
        # rows 0 and H/2 are their own conjugates and must come out real
        scale = max(np.max(np.abs(spectrum)), 1e-300)
        for i in (0, h // 2):
            imag = np.max(np.abs(spectrum[i].imag))
            if imag > symmetry_tol * scale:
                raise SymmetryError(f"row eta={i} is not real (imaginary part {imag:.3e})")
        u = np.fft.irfft(spectrum * h, n=h, axis=0)
    else:
        u = inverse_dft_y(spectrum).real
    return ImageBuffer(u, pyramid.bit_depth)
