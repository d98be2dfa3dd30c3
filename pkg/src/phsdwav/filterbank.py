"""Orthonormal exponential-polynomial Daubechies filters.

For an effective per-sample rate ``theta`` and order ``N`` the scaling filter
is the minimal-phase spectral factor of the halfband (interpolatory) symbol

    P(z) = [(z + 2 cosh(theta) + 1/z) / (2 cosh(theta))]^N * R(z)

whose N-fold zeros at ``-exp(+-theta)`` make the associated subdivision
scheme reproduce ``t^k exp(+-theta t)``, ``k < N``.  Writing
``x = (z + 1/z) / 2`` and ``u = x / cosh(theta)`` the halfband condition
``P(z) + P(-z) = 2`` turns into

    (1 + u)^N Rt(u) + (1 - u)^N Rt(-u) = 2,

which no longer depends on ``theta``.  ``Rt`` is therefore solved once per
order (exactly, over the rationals); ``theta`` only enters through the map
``u -> x -> z`` of its roots.  At ``theta = 0`` this is the classical
Daubechies construction and the taps are the usual dbN filter.
"""
from __future__ import annotations

import csv
import functools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import ConditioningFailure, InvalidOrder

THETA_MAX = 20.0
DEFAULT_QUANTUM = 1e-3
MAX_ORDER = 12
QMF_TOL = 1e-10
UNIT_CIRCLE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Scaling/wavelet taps for one ``(theta, order_n)``.

    ``lowpass[k]`` is the coefficient of ``z^(2N-1-k)`` in the minimal-phase
    factor (the ordering of the standard Daubechies tables).
    ``highpass[k] = (-1)^k lowpass[2N-1-k]`` is the alternating flip.
    Analysis correlates the signal with the *reversed* taps; with that
    orientation the wavelet filter annihilates ``t^k exp(theta t)``, ``k < N``.
    """

    theta: float
    order_n: int
    lowpass: np.ndarray
    highpass: np.ndarray
    condition_estimate: float

    @property
    def length(self) -> int:
        return 2 * self.order_n

    @property
    def analysis_lowpass(self) -> np.ndarray:
        return self.lowpass[::-1]

    @property
    def analysis_highpass(self) -> np.ndarray:
        return self.highpass[::-1]


def _alternating_flip(lowpass: np.ndarray) -> np.ndarray:
    n = len(lowpass)
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return signs * lowpass[::-1]


@functools.lru_cache(maxsize=None)
def halfband_remainder(order_n: int) -> tuple[Fraction, ...]:
    """Exact monomial coefficients (ascending) of ``Rt(u)``.

    Equating even powers of ``u`` in the halfband identity gives the integer
    system ``sum_k C(N, 2m - k) rho_k = delta_{m0}``, ``m, k < N``.
    """
    n = order_n
    rows = []
    for m in range(n):
        row = [Fraction(math.comb(n, 2 * m - k)) if 0 <= 2 * m - k <= n else Fraction(0)
               for k in range(n)]
        row.append(Fraction(1 if m == 0 else 0))
        rows.append(row)
    # Gauss-Jordan over the rationals; the system is small and exactness
    # makes the taps independent of the platform's LAPACK.
    for col in range(n):
        pivot = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [v / p for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[i][n] for i in range(n))


@functools.lru_cache(maxsize=None)
def _remainder_roots(order_n: int) -> tuple[complex, ...]:
    coeffs = halfband_remainder(order_n)
    if order_n == 1:
        return ()
    with mpmath.workdps(60):
        desc = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(coeffs)]
        roots = mpmath.polyroots(desc, maxsteps=400, extraprec=400)
        out = sorted((complex(r) for r in roots), key=lambda c: (round(c.real, 12), c.imag))
    return tuple(out)


def _inside_root(x: complex) -> complex:
    # z + 1/z = 2x has roots w, 1/w; return the one in the closed unit disk
    w = x + np.sqrt(x - 1 + 0j) * np.sqrt(x + 1 + 0j)
    return w if abs(w) <= 1 else 1 / w


def _minimal_phase_roots(us: tuple[complex, ...], theta: float) -> list[complex]:
    """Map remainder roots ``u`` to the in-disk spectral-factor roots ``z``.

    Each root ``x = u cosh(theta)`` of ``R`` yields the reciprocal pair
    ``w, 1/w`` of ``P``; the in-disk member goes to the scaling filter.  A root
    on the unit circle means ``R`` changes sign there and no factor exists.
    """
    cosh = math.cosh(theta)
    out = []
    for u in us:
        z = _inside_root(u * cosh)
        if abs(abs(z) - 1) <= UNIT_CIRCLE_TOL:
            raise ConditioningFailure(f"halfband symbol vanishes on the unit circle near {z}")
        out.append(z)
    out.sort(key=lambda c: (abs(np.angle(c)), np.angle(c)))
    return out


def _qmf_residual(lowpass: np.ndarray, highpass: np.ndarray) -> float:
    n = len(lowpass)
    auto = np.correlate(lowpass, lowpass, "full")[n - 1::2].copy()
    auto[0] -= 1.0
    cross = np.correlate(highpass, lowpass, "full")
    # cross terms at even lags (k + 2m) only
    cross_even = cross[(n - 1) % 2::2]
    return float(max(np.max(np.abs(auto)), np.max(np.abs(cross_even))))


def build_filter_pair(theta: float, order_n: int, tol: float = QMF_TOL) -> FilterPair:
    """Construct the orthonormal filter pair for ``theta >= 0`` and order ``N``.

    ``theta`` above ``THETA_MAX`` is clamped.  Raises ``ConditioningFailure``
    when the QMF residual of the result exceeds ``tol``.
    """
    if isinstance(order_n, bool) or not isinstance(order_n, (int, np.integer)) \
            or not 1 <= order_n <= MAX_ORDER:
        raise InvalidOrder(f"order_n must be an integer in [1, {MAX_ORDER}], got {order_n!r}")
    theta = float(theta)
    if not theta >= 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be a finite nonnegative number, got {theta}")
    theta = min(theta, THETA_MAX)
    n = int(order_n)

    roots = _minimal_phase_roots(_remainder_roots(n), theta)

    # (z + e^-theta)^N, then one factor per remainder root
    e = math.exp(-theta)
    poly = np.array([math.comb(n, k) * e**k for k in range(n + 1)])
    poly = poly.astype(complex)
    for z in roots:
        poly = np.convolve(poly, np.array([1.0, -z]))
    if np.max(np.abs(poly.imag)) > 1e-9 * np.max(np.abs(poly)):
        raise ConditioningFailure("spectral factor is not real")
    lowpass = poly.real / np.linalg.norm(poly.real)
    if lowpass[np.argmax(np.abs(lowpass))] < 0:
        lowpass = -lowpass
    highpass = _alternating_flip(lowpass)

    residual = _qmf_residual(lowpass, highpass)
    if residual > tol:
        raise ConditioningFailure(
            f"factorization residual {residual:.3e} exceeds {tol:.1e} at theta={theta}, N={n}")
    lowpass.setflags(write=False)
    highpass.setflags(write=False)
    return FilterPair(theta, n, lowpass, highpass, residual)


def snap_theta(theta: float, quantum: float = DEFAULT_QUANTUM) -> tuple[int, float]:
    """Clamp to ``THETA_MAX`` and round to a multiple of ``quantum``."""
    if quantum <= 0:
        raise ValueError("quantum must be positive")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    key = int(round(min(theta, THETA_MAX) / quantum))
    return key, key * quantum


class FilterCache:
    """Thread-safe memo of filter pairs keyed by snapped ``theta``."""

    def __init__(self):
        self._pairs: dict[tuple[int, float, int], FilterPair] = {}
        self._lock = threading.Lock()

    def get(self, theta: float, order_n: int, quantum: float = DEFAULT_QUANTUM) -> FilterPair:
        key, snapped = snap_theta(theta, quantum)
        k = (key, quantum, order_n)
        pair = self._pairs.get(k)
        if pair is not None:
            return pair
        pair = build_filter_pair(snapped, order_n)
        with self._lock:
            # first writer wins; a racing builder's result is dropped
            return self._pairs.setdefault(k, pair)

    def pairs(self) -> list[FilterPair]:
        with self._lock:
            return [self._pairs[k] for k in sorted(self._pairs)]

    def clear(self):
        with self._lock:
            self._pairs.clear()

    def __len__(self):
        return len(self._pairs)


_default_cache = FilterCache()


def filter_cache_get(theta: float, order_n: int, quantum: float = DEFAULT_QUANTUM) -> FilterPair:
    return _default_cache.get(theta, order_n, quantum)


def default_cache() -> FilterCache:
    return _default_cache


def write_filter_table(pairs, path) -> None:
    """Dump taps as CSV: theta, order_n, tap_index, lowpass, highpass."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "order_n", "tap_index", "lowpass", "highpass"])
        for pair in pairs:
            for k, (lo, hi) in enumerate(zip(pair.lowpass, pair.highpass)):
                writer.writerow([f"{pair.theta:.17g}", pair.order_n, k, f"{lo:.17g}", f"{hi:.17g}"])


def read_filter_table(path) -> dict[tuple[float, int], tuple[np.ndarray, np.ndarray]]:
    table: dict[tuple[float, int], tuple[list, list]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            lo, hi = table.setdefault((float(row["theta"]), int(row["order_n"])), ([], []))
            lo.append(float(row["lowpass"]))
            hi.append(float(row["highpass"]))
    return {k: (np.array(lo), np.array(hi)) for k, (lo, hi) in table.items()}
