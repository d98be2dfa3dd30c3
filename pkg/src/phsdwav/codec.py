"""Thresholding, quantization and the ``.phsw`` container.

Both pyramid kinds are viewed as a list of bands in *orthonormal units*:
PhSdWav rows are rescaled by ``sqrt(H)`` (self-conjugate rows) or
``sqrt(2H)`` (rows standing for a conjugate pair), after which the real and
imaginary parts of all stored coefficients are the coordinates of the image
in an orthonormal real basis, exactly as the Daubechies coefficients are.
Thresholds, steps and coefficient counts are therefore comparable between
the two methods.  A coefficient count is the number of nonzero real
components.
"""
from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .baseline_db import DETAIL_KINDS, TensorPyramid
from .errors import CorruptStream, GeometryError
from .filterbank import MAX_ORDER
from .phsd2d import SubbandPyramid, eta_indices, theta_for_eta
from .rangecoder import AdaptiveModel, RangeDecoder, RangeEncoder
from .transform1d import FrequencyRowPyramid

MAGIC = b"PHSW"
VERSION = 1
METHODS = ("phsd", "db")
INDEX_LIMIT = 1 << 31
ROUNDOFF_REL = 1e-9
MAX_SIDE = 1 << 15
MAX_PIXELS = 1 << 26

# magic, version, method, W, H, L, N, c*1e6, delta mantissa, delta exponent,
# bit depth, hermitian flag, symbol count, payload length, payload crc32
_HEADER = struct.Struct("<4sBBIIBBqqhBBIII")


@dataclass(frozen=True)
class Geometry:
    method: str
    width: int
    height: int
    levels: int
    order_n: int
    theta_scale: float = 0.0
    hermitian: bool = True
    bit_depth: int = 8


@dataclass(frozen=True)
class BandSpec:
    key: tuple
    level: int
    kind: str
    length: int
    complex_valued: bool
    exempt: bool
    weight: float

    @property
    def components(self) -> tuple[str, ...]:
        return ("re", "im") if self.complex_valued else ("re",)


def geometry_of(pyramid) -> Geometry:
    if isinstance(pyramid, SubbandPyramid):
        return Geometry("phsd", pyramid.width, pyramid.height, pyramid.levels, pyramid.order_n,
                        pyramid.theta_scale, pyramid.hermitian_reduced, pyramid.bit_depth)
    if isinstance(pyramid, TensorPyramid):
        return Geometry("db", pyramid.width, pyramid.height, pyramid.levels, pyramid.order_n,
                        0.0, False, pyramid.bit_depth)
    raise TypeError(f"not a pyramid: {type(pyramid).__name__}")


def band_layout(geom: Geometry) -> list[BandSpec]:
    """Fixed band order shared by encoder and decoder; coarsest band first."""
    w, h, lv = geom.width, geom.height, geom.levels
    specs = []
    if geom.method == "phsd":
        etas = range(h // 2 + 1) if geom.hermitian else eta_indices(h)
        for eta in etas:
            eta = int(eta)
            paired = geom.hermitian and 0 < eta < h - eta
            weight = math.sqrt(2 * h) if paired else math.sqrt(h)
            real_row = geom.hermitian and not paired
            specs.append(BandSpec(("A", eta, lv), lv, "A", w >> lv, not real_row, eta == 0, weight))
            for lvl in range(lv, 0, -1):
                specs.append(BandSpec(("D", eta, lvl), lvl, "D", w >> lvl, not real_row, False, weight))
    elif geom.method == "db":
        n = (h >> lv) * (w >> lv)
        specs.append(BandSpec(("LL", lv), lv, "LL", n, False, True, 1.0))
        for lvl in range(lv, 0, -1):
            n = (h >> lvl) * (w >> lvl)
            for kind in DETAIL_KINDS:
                specs.append(BandSpec((kind, lvl), lvl, kind, n, False, False, 1.0))
    else:
        raise GeometryError(f"unknown method {geom.method!r}")
    return specs


def to_bands(pyramid) -> list[np.ndarray]:
    """Flatten a pyramid into orthonormal-unit arrays in :func:`band_layout` order."""
    geom = geometry_of(pyramid)
    out = []
    if geom.method == "phsd":
        pyramid.check()
        for row, weight in zip(pyramid.rows, _row_weights(geom)):
            out.append(row.approx * weight)
            out.extend(row.details[lvl - 1] * weight for lvl in range(row.levels, 0, -1))
        specs = band_layout(geom)
        return [b.real.copy() if not s.complex_valued else b for b, s in zip(out, specs)]
    pyramid.check()
    out.append(pyramid.approx.ravel().copy())
    for lvl in range(pyramid.levels, 0, -1):
        out.extend(pyramid.details[lvl - 1][k].ravel().copy() for k in DETAIL_KINDS)
    return out


def _row_weights(geom: Geometry) -> list[float]:
    specs = band_layout(geom)
    return [s.weight for s in specs if s.kind == "A"]


def from_bands(geom: Geometry, bands: list[np.ndarray]):
    specs = band_layout(geom)
    if len(bands) != len(specs):
        raise GeometryError("band count does not match geometry")
    for b, s in zip(bands, specs):
        if b.shape != (s.length,):
            raise GeometryError(f"band {s.key} has length {b.shape}, expected {s.length}")
    w, h, lv = geom.width, geom.height, geom.levels
    if geom.method == "phsd":
        rows = []
        per_row = lv + 1
        for i in range(0, len(specs), per_row):
            spec = specs[i]
            eta = spec.key[1]
            group = [np.asarray(b, dtype=complex) / spec.weight for b in bands[i:i + per_row]]
            approx, coarse_first = group[0], group[1:]
            rows.append(FrequencyRowPyramid(eta, theta_for_eta(eta, h, geom.theta_scale), lv,
                                            approx, coarse_first[::-1], w))
        return SubbandPyramid(rows, w, h, lv, geom.order_n, geom.theta_scale, geom.hermitian,
                              geom.bit_depth)
    it = iter(bands)
    approx = next(it).reshape(h >> lv, w >> lv)
    details = [None] * lv
    for lvl in range(lv, 0, -1):
        details[lvl - 1] = {k: next(it).reshape(h >> lvl, w >> lvl) for k in DETAIL_KINDS}
    return TensorPyramid(approx, details, lv, geom.order_n, w, h, geom.bit_depth)


def count_nonzero(bands: list[np.ndarray]) -> int:
    return int(sum(np.count_nonzero(b.real) + np.count_nonzero(np.imag(b)) for b in bands))


def threshold(pyramid, tau: float):
    """Zero coefficients with modulus below ``tau``; the coarsest DC band is exempt.

    Returns the thresholded pyramid and the number of nonzero real components
    it retains.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    geom = geometry_of(pyramid)
    bands = to_bands(pyramid)
    kept = []
    for b, spec in zip(bands, band_layout(geom)):
        if spec.exempt or tau == 0:
            kept.append(b)
        else:
            kept.append(np.where(np.abs(b) < tau, 0, b))
    return from_bands(geom, kept), count_nonzero(kept)


def max_modulus(pyramid) -> float:
    """Largest modulus among the thresholdable (non-exempt) coefficients."""
    geom = geometry_of(pyramid)
    mags = [np.abs(b) for b, s in zip(to_bands(pyramid), band_layout(geom)) if not s.exempt]
    return float(max((m.max() for m in mags if m.size), default=0.0))


def keep_threshold(pyramid, keep: int) -> float:
    """Smallest ``tau`` whose thresholded pyramid keeps at most ``keep`` components.

    Exempt (DC band) components count against the budget.  Coefficients tied
    in modulus are kept or dropped together, so the count may fall short of
    ``keep`` at a tie.  Moduli below ``ROUNDOFF_REL`` times the largest one are
    transform round-off and never chosen as the threshold: if fewer than
    ``keep`` coefficients are significant, all of them are kept and no more.
    """
    geom = geometry_of(pyramid)
    bands = to_bands(pyramid)
    specs = band_layout(geom)
    floor = ROUNDOFF_REL * max((float(np.abs(b).max()) for b in bands if b.size), default=0.0)
    exempt = count_nonzero([np.where(np.abs(b) > floor, b, 0) for b, s in zip(bands, specs) if s.exempt])
    free = [b for b, s in zip(bands, specs) if not s.exempt]
    if not free:
        return 0.0
    mags = np.concatenate([np.abs(b) for b in free])
    comps = np.concatenate([(b.real != 0).astype(int) + (np.imag(b) != 0) for b in free])
    order = np.argsort(-mags, kind="stable")
    mags, comps = mags[order], comps[order]
    nz = mags > floor
    mags, comps = mags[nz], comps[nz]
    if mags.size == 0:
        return float(np.nextafter(floor, np.inf)) if floor > 0 else 0.0
    above_max = float(np.nextafter(mags[0], np.inf))
    budget = keep - exempt
    if budget <= 0:
        return above_max
    cum = np.cumsum(comps)
    group_ends = np.nonzero(np.r_[mags[1:] != mags[:-1], True])[0]
    fits = group_ends[cum[group_ends] <= budget]
    if fits.size == 0:
        return above_max
    return float(mags[fits[-1]])


# -- quantization -------------------------------------------------------------

@dataclass
class QuantizedStream:
    """Zigzag-mapped quantization indices, laid out band by band."""

    symbols: np.ndarray
    band_map: list[tuple[tuple, int, str]]
    step: float
    retained_count: int
    geometry: Geometry
    contexts: list[tuple] = field(default_factory=list, repr=False)

    def indices(self) -> np.ndarray:
        return unzigzag(self.symbols)


def zigzag(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    return np.where(v >= 0, 2 * v, -2 * v - 1)


def unzigzag(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.int64)
    return np.where(z % 2 == 0, z // 2, -(z + 1) // 2)


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def context_of(spec: BandSpec, component: str) -> tuple:
    return (spec.level, spec.kind, component)


def quantize(pyramid, step: float) -> QuantizedStream:
    if not step > 0:
        raise ValueError("quantization step must be positive")
    geom = geometry_of(pyramid)
    specs = band_layout(geom)
    parts, band_map, contexts = [], [], []
    for b, spec in zip(to_bands(pyramid), specs):
        comps = [b.real] if not spec.complex_valued else [b.real, b.imag]
        for name, values in zip(spec.components, comps):
            q = round_half_away(values / step)
            if np.any(np.abs(q) >= INDEX_LIMIT):
                raise OverflowError(f"quantization index exceeds 2^31 in band {spec.key}")
            parts.append(q.astype(np.int64))
            band_map.append((spec.key, spec.length, name))
            contexts.append(context_of(spec, name))
    indices = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    return QuantizedStream(zigzag(indices), band_map, float(step), int(np.count_nonzero(indices)),
                           geom, contexts)


def dequantize(stream: QuantizedStream):
    geom = stream.geometry
    specs = band_layout(geom)
    values = stream.indices().astype(np.float64) * stream.step
    pos = 0
    bands = []
    for spec in specs:
        re = values[pos:pos + spec.length]
        pos += spec.length
        if spec.complex_valued:
            im = values[pos:pos + spec.length]
            pos += spec.length
            bands.append(re + 1j * im)
        else:
            bands.append(re.copy())
    if pos != len(values):
        raise GeometryError("stream length does not match its band map")
    return from_bands(geom, bands)


def stream_layout(geom: Geometry) -> tuple[list, list]:
    band_map, contexts = [], []
    for spec in band_layout(geom):
        for name in spec.components:
            band_map.append((spec.key, spec.length, name))
            contexts.append(context_of(spec, name))
    return band_map, contexts


# -- container ----------------------------------------------------------------

@dataclass
class CodedStream:
    geometry: Geometry
    step: float
    n_symbols: int
    payload: bytes

    def header_bytes(self) -> bytes:
        g = self.geometry
        mant, exp = math.frexp(self.step)
        return _HEADER.pack(MAGIC, VERSION, METHODS.index(g.method), g.width, g.height, g.levels,
                            g.order_n, theta_scale_micros(g.theta_scale), int(mant * (1 << 53)),
                            exp - 53, g.bit_depth, int(g.hermitian), self.n_symbols,
                            len(self.payload), zlib.crc32(self.payload))

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "CodedStream":
        if len(data) < _HEADER.size:
            raise CorruptStream(f"container shorter than its {_HEADER.size}-byte header")
        (magic, version, method, w, h, lv, n, c_micro, mant, exp, depth, herm,
         nsym, plen, crc) = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise CorruptStream(f"bad magic {magic!r}")
        if version != VERSION:
            raise CorruptStream(f"unsupported container version {version}")
        if method >= len(METHODS) or depth not in (8, 16) or herm > 1:
            raise CorruptStream("invalid header field")
        _check_header_geometry(METHODS[method], w, h, lv, n, c_micro)
        payload = data[_HEADER.size:]
        if len(payload) != plen:
            raise CorruptStream(f"payload length {len(payload)} != declared {plen}")
        if zlib.crc32(payload) != crc:
            raise CorruptStream("payload checksum mismatch")
        try:
            step = math.ldexp(mant, exp)
        except OverflowError:
            raise CorruptStream("quantization step out of range") from None
        if not step > 0 or not math.isfinite(step):
            raise CorruptStream("invalid quantization step")
        geom = Geometry(METHODS[method], w, h, lv, n, c_micro / 1e6, bool(herm), depth)
        return cls(geom, step, nsym, payload)


def _check_header_geometry(method, w, h, lv, n, c_micro):
    if not (1 <= n <= MAX_ORDER and 1 <= lv <= 30 and c_micro >= 0):
        raise CorruptStream(f"invalid transform parameters L={lv}, N={n}")
    if not (2 <= w <= MAX_SIDE and 2 <= h <= MAX_SIDE) or w * h > MAX_PIXELS:
        raise CorruptStream(f"implausible image size {w}x{h}")
    if w % (1 << lv) or (method == "db" and h % (1 << lv)) or (method == "phsd" and h & (h - 1)):
        raise CorruptStream(f"size {w}x{h} incompatible with {lv} levels")


def theta_scale_micros(c: float) -> int:
    return int(round(c * 1e6))


def snap_theta_scale(c: float) -> float:
    """The value a container stores for ``c``; use it on the encode side too."""
    return theta_scale_micros(c) / 1e6


def _model(models: dict, key: tuple, nsym: int, initial: int = 1) -> AdaptiveModel:
    model = models.get(key)
    if model is None:
        model = models[key] = AdaptiveModel(nsym, initial)
    return model


# Each symbol is a significance flag, then for nonzero z its bit-length class
# (32 classes cover every legal index) in the band's own model, then the bits
# below the leading one down a binary tree shared by all bands.  Small
# alphabets keep the cost of learning each band low, and the tree still learns
# exact values that recur, as along a straight edge.

CLASSES = 32
TREE_PRIOR = 16


def _encode_value(enc: RangeEncoder, models: dict, ctx: tuple, z: int):
    c = z.bit_length() - 1
    enc.encode_symbol(_model(models, ctx, CLASSES), c)
    node = 1
    for pos in range(c - 1, -1, -1):
        bit = (z >> pos) & 1
        enc.encode_symbol(_model(models, ("m", c, node), 2, TREE_PRIOR), bit)
        node = 2 * node + bit


def _decode_value(dec: RangeDecoder, models: dict, ctx: tuple) -> int:
    c = dec.decode_symbol(_model(models, ctx, CLASSES))
    node = 1
    for _ in range(c):
        node = 2 * node + dec.decode_symbol(_model(models, ("m", c, node), 2, TREE_PRIOR))
    return node


def encode(stream: QuantizedStream) -> CodedStream:
    enc = RangeEncoder()
    models: dict[tuple, AdaptiveModel] = {}
    band_map, contexts = stream_layout(stream.geometry)
    syms = stream.symbols.tolist()
    pos = 0
    for (_, length, _), ctx in zip(band_map, contexts):
        flag = _model(models, ctx + ("nz",), 2)
        for z in syms[pos:pos + length]:
            enc.encode_symbol(flag, int(z != 0))
            if z:
                _encode_value(enc, models, ctx, z)
        pos += length
    if pos != len(syms):
        raise GeometryError("stream length does not match its band map")
    return CodedStream(stream.geometry, stream.step, len(syms), enc.finish())


def decode(coded) -> QuantizedStream:
    if isinstance(coded, (bytes, bytearray, memoryview)):
        coded = CodedStream.from_bytes(bytes(coded))
    geom = coded.geometry
    try:
        band_map, contexts = stream_layout(geom)
    except GeometryError as exc:
        raise CorruptStream(str(exc)) from None
    total = sum(length for _, length, _ in band_map)
    if total != coded.n_symbols:
        raise CorruptStream(f"header declares {coded.n_symbols} symbols, geometry implies {total}")
    dec = RangeDecoder(coded.payload)
    models: dict[tuple, AdaptiveModel] = {}
    out = []
    for (_, length, _), ctx in zip(band_map, contexts):
        flag = _model(models, ctx + ("nz",), 2)
        for _ in range(length):
            out.append(_decode_value(dec, models, ctx) if dec.decode_symbol(flag) else 0)
    symbols = np.array(out, dtype=np.int64)
    return QuantizedStream(symbols, band_map, coded.step,
                           int(np.count_nonzero(symbols)), geom, contexts)
