import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import daubechies_bezout
from phsdwav.errors import InvalidOrder
from phsdwav.filterbank import (THETA_MAX, FilterCache, build_filter_pair, halfband_remainder,
                                read_filter_table, snap_theta, write_filter_table)


def shift_products(a, b):
    """All ``sum_k a[k] b[k + 2m]``, keyed by m."""
    n = len(a)
    return {m: float(sum(a[k] * b[k + 2 * m] for k in range(n) if 0 <= k + 2 * m < n))
            for m in range(-(n // 2), n // 2 + 1)}


def qmf_residual(pair):
    lo, hi = pair.lowpass, pair.highpass
    res = 0.0
    for m, v in shift_products(lo, lo).items():
        res = max(res, abs(v - (m == 0)))
    for m, v in shift_products(hi, hi).items():
        res = max(res, abs(v - (m == 0)))
    for v in shift_products(lo, hi).values():
        res = max(res, abs(v))
    return res


def annihilation_residual(taps, theta, k):
    j = np.arange(len(taps)) - (len(taps) - 1) / 2
    terms = taps * j ** k * np.exp(theta * j)
    return abs(terms.sum()) / np.abs(terms).sum()


def test_db2_closed_form():
    s3 = np.sqrt(3)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2))
    assert np.allclose(build_filter_pair(0.0, 2).lowpass, expected, atol=1e-15)


def test_haar_at_order_one():
    pair = build_filter_pair(0.0, 1)
    assert np.allclose(pair.lowpass, [2 ** -0.5, 2 ** -0.5])
    assert np.allclose(pair.highpass, [2 ** -0.5, -2 ** -0.5])


def test_db9_matches_frozen_table(db9_table):
    assert np.max(np.abs(build_filter_pair(0.0, 9).lowpass - db9_table)) < 1e-12


@pytest.mark.parametrize("order_n", [1, 2, 3, 4, 6, 9, 12])
def test_theta_zero_matches_bezout_oracle(order_n):
    assert np.max(np.abs(build_filter_pair(0.0, order_n).lowpass - daubechies_bezout(order_n))) < 1e-12


def test_lowpass_sums_to_sqrt2_at_theta_zero():
    for n in (2, 5, 9):
        assert build_filter_pair(0.0, n).lowpass.sum() == pytest.approx(np.sqrt(2), abs=1e-13)


@pytest.mark.parametrize("theta", [0, 0.1, 0.5, 1, 2, 5, 10, 20])
@pytest.mark.parametrize("order_n", [2, 5, 9])
def test_qmf_by_direct_summation(theta, order_n):
    assert qmf_residual(build_filter_pair(theta, order_n)) <= 1e-10


@pytest.mark.parametrize("theta", [0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("order_n", [1, 2, 5, 9])
def test_highpass_annihilates_exponential_polynomials(theta, order_n):
    h = build_filter_pair(theta, order_n).analysis_highpass
    for k in range(order_n):
        assert annihilation_residual(h, theta, k) <= 1e-7


@pytest.mark.parametrize("theta", [1.0, 2.0])
def test_two_sided_span_cannot_be_annihilated(theta):
    # the 2N functions t^k e^{+-theta t}, k < N, are independent on 2N taps,
    # so only the zero filter is orthogonal to all of them
    n = 3
    j = np.arange(2 * n) - (2 * n - 1) / 2
    basis = np.array([j ** k * np.exp(s * theta * j) for s in (1, -1) for k in range(n)])
    sv = np.linalg.svd(basis, compute_uv=False)
    assert sv[-1] / sv[0] > 1e-8
    h = build_filter_pair(theta, n).analysis_highpass
    assert annihilation_residual(h, -theta, 0) > 1e-3


def test_theta_zero_annihilates_polynomials_of_degree_below_n():
    h = build_filter_pair(0.0, 9).analysis_highpass
    j = np.arange(18.0)
    for k in range(9):
        assert abs(np.sum(h * j ** k)) <= 1e-9 * np.sum(np.abs(h * j ** k))


@given(st.floats(0, 20), st.integers(1, 12))
def test_qmf_property(theta, order_n):
    pair = build_filter_pair(theta, order_n)
    assert pair.condition_estimate <= 1e-10
    assert np.linalg.norm(pair.lowpass) == pytest.approx(1.0, abs=1e-12)
    assert np.argmax(np.abs(pair.lowpass)) == np.argmax(pair.lowpass)


def test_highpass_is_alternating_flip():
    pair = build_filter_pair(1.3, 4)
    lo = pair.lowpass
    assert np.array_equal(pair.highpass, np.array([(-1) ** k * lo[7 - k] for k in range(8)]))


def test_theta_is_clamped():
    a = build_filter_pair(THETA_MAX, 5)
    b = build_filter_pair(1e3, 5)
    assert b.theta == THETA_MAX
    assert np.array_equal(a.lowpass, b.lowpass)


def test_large_theta_tends_to_two_tap_shape():
    # as theta grows, (z + e^-theta)^N R collapses onto z^N R: still orthonormal
    pair = build_filter_pair(20.0, 9)
    assert qmf_residual(pair) < 1e-10


@pytest.mark.parametrize("bad", [0, -1, 13, 2.5, True])
def test_invalid_order(bad):
    with pytest.raises(InvalidOrder):
        build_filter_pair(0.0, bad)


@pytest.mark.parametrize("theta", [-1.0, float("nan"), float("inf")])
def test_invalid_theta(theta):
    with pytest.raises(ValueError):
        build_filter_pair(theta, 3)


def test_taps_are_read_only():
    pair = build_filter_pair(0.3, 3)
    with pytest.raises(ValueError):
        pair.lowpass[0] = 1.0


def test_halfband_remainder_is_exact_bezout():
    # at theta = 0 the remainder is 2^(1-N) times the Bezout polynomial in y = (1 - u) / 2
    from fractions import Fraction
    from math import comb
    for n in (1, 2, 3, 6):
        rho = halfband_remainder(n)
        for u in (Fraction(1, 3), Fraction(-2, 7), Fraction(5, 4)):
            r = sum(c * u ** i for i, c in enumerate(rho))
            r_neg = sum(c * (-u) ** i for i, c in enumerate(rho))
            assert (1 + u) ** n * r + (1 - u) ** n * r_neg == 2
            y = (1 - u) / 2
            assert r * 2 ** (n - 1) == sum(comb(n - 1 + k, k) * y ** k for k in range(n))


def test_snap_theta():
    key, snapped = snap_theta(0.12345)
    assert key == 123 and snapped == pytest.approx(0.123)
    assert snap_theta(50.0)[1] == THETA_MAX


def test_cache_single_insertion_under_threads():
    cache = FilterCache()
    got = []

    def worker():
        got.append(cache.get(0.7, 4))

    threads = [threading.Thread(target=worker) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(cache) == 1
    assert all(p is got[0] for p in got)


def test_cache_snaps_nearby_thetas():
    cache = FilterCache()
    assert cache.get(0.3000001, 3) is cache.get(0.2999999, 3)


def test_filter_table_round_trip(tmp_path):
    pairs = [build_filter_pair(t, 3) for t in (0.0, 0.25, 4.0)]
    path = tmp_path / "taps.csv"
    write_filter_table(pairs, path)
    table = read_filter_table(path)
    for p in pairs:
        lo, hi = table[(p.theta, 3)]
        assert np.array_equal(lo, p.lowpass) and np.array_equal(hi, p.highpass)
