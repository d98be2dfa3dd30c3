import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from phsdwav import codec
from phsdwav.baseline_db import dwt2_db
from phsdwav.errors import CorruptStream
from phsdwav.imageio import ImageBuffer, gen_edge
from phsdwav.phsd2d import forward_phsd
from phsdwav.pipeline import MethodConfig, decode_image, reconstruct


def tiny_db(values):
    """A one-level 2x2 Haar pyramid whose four coefficients are ``values``."""
    pyr = dwt2_db(ImageBuffer(np.zeros((2, 2))), levels=1, order_n=1)
    ll, lh, hl, hh = values
    pyr.approx[:] = ll
    pyr.details[0]["LH"][:] = lh
    pyr.details[0]["HL"][:] = hl
    pyr.details[0]["HH"][:] = hh
    return pyr


def random_image(rng, shape=(32, 32), depth=8):
    return ImageBuffer(rng.integers(0, 1 << depth, shape).astype(float), depth)


def test_rounding_examples():
    step = 0.75
    stream = codec.quantize(tiny_db([0.4 * step, -0.6 * step, 1.5 * step, 0.0]), step)
    assert stream.indices().tolist() == [0, -1, 2, 0]
    assert stream.retained_count == 2


def test_round_half_away_from_zero():
    assert codec.round_half_away(np.array([0.5, -0.5, 1.5, -2.5, 0.49])).tolist() == [1, -1, 2, -3, 0]


@given(arrays(np.int64, 50, elements=st.integers(-2 ** 31 + 1, 2 ** 31 - 1)))
def test_zigzag_is_a_bijection(v):
    z = codec.zigzag(v)
    assert np.all(z >= 0)
    assert np.array_equal(codec.unzigzag(z), v)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 50))
def test_dequantization_error_is_half_a_step(seed, step):
    rng = np.random.default_rng(seed)
    pyr = forward_phsd(ImageBuffer(rng.uniform(0, 255, (16, 16))), levels=1, order_n=2)
    back = codec.dequantize(codec.quantize(pyr, step))
    for a, b in zip(codec.to_bands(pyr), codec.to_bands(back)):
        assert np.max(np.abs(a.real - b.real), initial=0) <= step / 2 * (1 + 1e-12)
        assert np.max(np.abs(np.imag(a) - np.imag(b)), initial=0) <= step / 2 * (1 + 1e-12)


def test_bands_are_orthonormal_units(rng):
    img = random_image(rng, (16, 32))
    for pyr in (forward_phsd(img, levels=2, order_n=2), forward_phsd(img, 2, 2, hermitian_reduced=False),
                dwt2_db(img, levels=2, order_n=2)):
        energy = sum(np.sum(np.abs(b) ** 2) for b in codec.to_bands(pyr))
        assert energy == pytest.approx(np.sum(img.samples ** 2), rel=1e-10)


def test_band_round_trip(rng):
    pyr = forward_phsd(random_image(rng), levels=2, order_n=2)
    back = codec.from_bands(codec.geometry_of(pyr), codec.to_bands(pyr))
    assert np.allclose(reconstruct(back).samples, reconstruct(pyr).samples)


def test_threshold_spares_the_dc_band():
    pyr, kept = codec.threshold(tiny_db([1.0, 2.0, 3.0, 4.0]), 100.0)
    assert kept == 1
    assert pyr.approx[0, 0] == 1.0


def test_threshold_keeps_ties_at_tau():
    _, kept = codec.threshold(tiny_db([1.0, 2.0, 2.0, 1.0]), 2.0)
    assert kept == 3


def test_keep_48_on_vertical_edge():
    pyr = forward_phsd(gen_edge("vertical", 64))
    tau = codec.keep_threshold(pyr, 48)
    _, kept = codec.threshold(pyr, tau)
    # the edge has exactly 40 significant coefficients; round-off is never kept
    assert kept == 40
    assert codec.quantize(codec.threshold(pyr, tau)[0], tau / 2).retained_count == 40


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 600))
def test_keep_threshold_budget_is_tight(seed, keep):
    rng = np.random.default_rng(seed)
    pyr = dwt2_db(random_image(rng), levels=1, order_n=2)
    tau = codec.keep_threshold(pyr, keep)
    _, kept = codec.threshold(pyr, tau)
    mags = np.unique(np.concatenate([np.abs(b) for b in codec.to_bands(pyr)[1:]]))
    exempt = codec.count_nonzero(codec.to_bands(pyr)[:1])
    if keep >= exempt:
        assert kept <= keep
        lower = mags[mags < tau]
        if lower.size:
            # one more distinct magnitude would overshoot the budget
            assert codec.threshold(pyr, float(lower[-1]))[1] > keep


def test_invalid_arguments():
    pyr = tiny_db([1, 2, 3, 4])
    with pytest.raises(ValueError):
        codec.threshold(pyr, -1)
    with pytest.raises(ValueError):
        codec.quantize(pyr, 0)
    with pytest.raises(OverflowError):
        codec.quantize(tiny_db([1e12, 0, 0, 0]), 1e-3)


@pytest.mark.parametrize("method,hermitian", [("phsd", True), ("phsd", False), ("db", True)])
@pytest.mark.parametrize("depth", [8, 16])
def test_container_round_trip_is_bit_exact(rng, method, hermitian, depth):
    img = random_image(rng, (32, 64), depth)
    cfg = MethodConfig(method, order_n=3, levels=2, hermitian=hermitian)
    pipe = cfg.pipeline(img)
    outcome = pipe.evaluate(pipe.keep_threshold(300))
    data = pipe.encode(outcome)
    assert data == pipe.encode(outcome)
    decoded = codec.decode(data)
    assert np.array_equal(decoded.symbols, outcome.stream.symbols)
    assert decoded.step == outcome.stream.step
    assert decoded.band_map == outcome.stream.band_map
    assert decoded.retained_count == outcome.stream.retained_count
    assert np.array_equal(decode_image(data).samples, outcome.reconstruction.samples)
    # decoding and re-encoding reproduces the container byte for byte
    assert codec.encode(decoded).to_bytes() == data


@pytest.mark.parametrize("step", [0.1, 1 / 3, 5e-324, 1e300, 2.0 ** -40])
def test_step_is_stored_exactly(step):
    stream = codec.quantize(tiny_db([0.0, 0.0, 0.0, 0.0]), step)
    assert codec.decode(codec.encode(stream).to_bytes()).step == step


def test_theta_scale_round_trips_in_micro_units(rng):
    cfg = MethodConfig("phsd", order_n=2, levels=1, theta_scale=1.23456789)
    assert cfg.theta_scale == 1.234568
    pipe = cfg.pipeline(random_image(rng, (16, 16)))
    o = pipe.evaluate(1.0)
    assert codec.decode(pipe.encode(o)).geometry.theta_scale == cfg.theta_scale


def _container(rng):
    pipe = MethodConfig("phsd", order_n=2, levels=1).pipeline(random_image(rng, (16, 16)))
    return pipe.encode(pipe.evaluate(20.0))


def test_header_layout(rng):
    data = _container(rng)
    magic, version, method, w, h = struct.unpack_from("<4sBBII", data)
    assert (magic, version, method, w, h) == (b"PHSW", 1, 0, 16, 16)


def test_bad_magic_version_and_checksum(rng):
    data = bytearray(_container(rng))
    for pos, value in ((0, ord("X")), (4, 9), (len(data) - 1, data[-1] ^ 1)):
        broken = bytearray(data)
        broken[pos] = value
        with pytest.raises(CorruptStream):
            codec.decode(bytes(broken))
    with pytest.raises(CorruptStream):
        codec.decode(bytes(data[:-3]))
    with pytest.raises(CorruptStream):
        codec.decode(b"PHSW")


def test_implausible_geometry_rejected(rng):
    data = bytearray(_container(rng))
    struct.pack_into("<I", data, 6, 1 << 30)
    with pytest.raises(CorruptStream):
        codec.decode(bytes(data))


def test_mutated_containers_fail_cleanly(rng):
    data = _container(rng)
    for _ in range(300):
        broken = bytearray(data)
        for pos in rng.integers(0, len(data), rng.integers(1, 4)):
            broken[pos] = rng.integers(0, 256)
        try:
            stream = codec.decode(bytes(broken))
        except CorruptStream:
            continue
        assert len(stream.symbols) == stream.retained_count + int(np.sum(stream.symbols == 0))


def test_payload_garbage_with_valid_checksum(rng):
    import zlib
    data = bytearray(_container(rng))
    head, payload = data[:48], bytearray(rng.integers(0, 256, len(data) - 48, dtype=np.uint8).tobytes())
    struct.pack_into("<I", head, 44, zlib.crc32(payload))
    try:
        codec.decode(bytes(head + payload))
    except CorruptStream:
        pass


def test_zero_stream_is_nearly_free():
    geom = codec.Geometry("db", 128, 128, 1, 2, 0.0, False, 8)
    band_map, contexts = codec.stream_layout(geom)
    for values in (np.zeros(128 * 128, dtype=np.int64), np.full(128 * 128, 700, dtype=np.int64)):
        stream = codec.QuantizedStream(codec.zigzag(values), band_map, 1.0, int(np.count_nonzero(values)),
                                       geom, contexts)
        coded = codec.encode(stream)
        # a constant stream costs a few bytes per band, not per symbol
        assert len(coded.payload) < 200
        assert np.array_equal(codec.decode(coded.to_bytes()).symbols, stream.symbols)
