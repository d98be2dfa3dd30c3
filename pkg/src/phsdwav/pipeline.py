"""End-to-end codec runs for one image: transform once, evaluate many thresholds."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import codec
from .baseline_db import TensorPyramid, dwt2_db, idwt2_db
from .errors import InvalidOrder
from .filterbank import MAX_ORDER
from .imageio import ImageBuffer
from .metrics import CompareReport, psnr, total_entropy
from .phsd2d import DEFAULT_ORDER, DEFAULT_THETA_SCALE, SubbandPyramid, forward_phsd, inverse_phsd

DEFAULT_MIN_STEP = 1e-3


@dataclass(frozen=True)
class MethodConfig:
    """Transform choice and knobs.

    The quantization step defaults to ``tau / 2``.  It never drops below
    ``min_step`` in 8-bit units (scaled by ``max_value / 255``), which keeps
    indices bounded as ``tau`` goes to zero.
    """

    method: str = "phsd"
    order_n: int = DEFAULT_ORDER
    levels: int | None = None
    theta_scale: float = DEFAULT_THETA_SCALE
    hermitian: bool = True
    min_step: float = DEFAULT_MIN_STEP

    def __post_init__(self):
        if self.method not in codec.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if isinstance(self.order_n, bool) or not isinstance(self.order_n, int) \
                or not 1 <= self.order_n <= MAX_ORDER:
            raise InvalidOrder(f"order must be an integer in [1, {MAX_ORDER}], got {self.order_n!r}")
        # the container stores c in micro-units; encode with exactly that value
        object.__setattr__(self, "theta_scale", codec.snap_theta_scale(self.theta_scale))

    @property
    def name(self) -> str:
        return "PhSdWav" if self.method == "phsd" else f"db{self.order_n}"

    def transform(self, image: ImageBuffer):
        if self.method == "phsd":
            return forward_phsd(image, self.levels, self.order_n, self.theta_scale, self.hermitian)
        return dwt2_db(image, self.levels, self.order_n)

    def pipeline(self, image: ImageBuffer) -> "Pipeline":
        return Pipeline(image, self)


def reconstruct(pyramid) -> ImageBuffer:
    if isinstance(pyramid, SubbandPyramid):
        return inverse_phsd(pyramid)
    if isinstance(pyramid, TensorPyramid):
        return idwt2_db(pyramid)
    raise TypeError(f"not a pyramid: {type(pyramid).__name__}")


def decode_image(data: bytes) -> ImageBuffer:
    """Container bytes to the (unrounded) reconstruction."""
    return reconstruct(codec.dequantize(codec.decode(data)))


@dataclass
class Outcome:
    pipeline: "Pipeline"
    tau: float
    step: float
    retained: int
    stream: codec.QuantizedStream
    reconstruction: ImageBuffer
    psnr: float
    seconds: float


class Pipeline:
    def __init__(self, image: ImageBuffer, config: MethodConfig):
        start = time.perf_counter()
        self.image = image
        self.config = config
        self.pyramid = config.transform(image)
        self._bands = codec.to_bands(self.pyramid)
        self._specs = codec.band_layout(codec.geometry_of(self.pyramid))
        free = [np.abs(b) for b, s in zip(self._bands, self._specs) if not s.exempt]
        self._mags = np.unique(np.concatenate(free)) if free else np.zeros(0)
        self.transform_seconds = time.perf_counter() - start

    def step_for(self, tau: float) -> float:
        return max(tau / 2, self.config.min_step * self.image.max_value / 255)

    def max_modulus(self) -> float:
        return float(self._mags[-1]) if self._mags.size else 0.0

    def smallest_kept_modulus(self, tau: float) -> float:
        i = np.searchsorted(self._mags, tau, side="left")
        return float(self._mags[i]) if i < self._mags.size else tau

    def keep_threshold(self, keep: int) -> float:
        return codec.keep_threshold(self.pyramid, keep)

    def evaluate(self, tau: float, step: float | None = None) -> Outcome:
        start = time.perf_counter()
        step = self.step_for(tau) if step is None else step
        thresholded, retained = codec.threshold(self.pyramid, tau)
        stream = codec.quantize(thresholded, step)
        recon = reconstruct(codec.dequantize(stream))
        value = psnr(self.image, recon)
        return Outcome(self, float(tau), float(step), retained, stream, recon, value,
                       time.perf_counter() - start + self.transform_seconds)

    def encode(self, outcome: Outcome) -> bytes:
        return codec.encode(outcome.stream).to_bytes()

    def report(self, outcome: Outcome, coded: bytes | None = None) -> CompareReport:
        start = time.perf_counter()
        container = codec.CodedStream.from_bytes(coded) if coded is not None \
            else codec.encode(outcome.stream)
        bits = 8 * len(container.payload)
        img = self.image
        ratio = img.width * img.height * img.bit_depth / bits if bits else math.inf
        runtime = (outcome.seconds + time.perf_counter() - start) * 1e3
        return CompareReport(self.config.name, outcome.stream.retained_count, outcome.psnr,
                             total_entropy(outcome.stream), ratio, bits, outcome.tau, runtime)
