"""Quality and rate measures, and the matched-PSNR threshold search."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SearchFailure

REPORT_FIELDS = ("method", "num_coeffs", "psnr_db", "entropy_bits", "compression_ratio",
                 "bits_encoded", "threshold", "runtime_ms")


@dataclass
class CompareReport:
    method: str
    num_coeffs: int
    psnr_db: float
    entropy_bits: float
    compression_ratio: float
    bits_encoded: int
    threshold: float
    runtime_ms: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def psnr(reference, test) -> float:
    """``10 log10(MAX^2 / MSE)`` with ``MAX = 2**bit_depth - 1``; ``inf`` if identical."""
    if reference.samples.shape != test.samples.shape or reference.bit_depth != test.bit_depth:
        raise GeometryError("PSNR needs images of equal size and bit depth")
    mse = float(np.mean((reference.samples - test.samples) ** 2))
    if mse == 0:
        return math.inf
    return 10 * math.log10(reference.max_value ** 2 / mse)


def total_entropy(stream) -> float:
    """Order-0 entropy in bits of the nonzero quantization indices, times their count."""
    idx = stream.indices() if hasattr(stream, "indices") else np.asarray(stream)
    idx = idx[idx != 0]
    n = idx.size
    if n == 0:
        return 0.0
    _, counts = np.unique(idx, return_counts=True)
    if counts.size == 1:
        return 0.0
    return float(-np.sum(counts * np.log2(counts / n)))


def write_reports_csv(reports, path_or_file):
    def _write(fh):
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        for r in reports:
            writer.writerow(r.as_dict())

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _write(fh)


def read_reports_csv(path) -> list[CompareReport]:
    types = {f.name: f.type for f in dataclasses.fields(CompareReport)}
    conv = {"str": str, "int": int, "float": float}
    with open(path, newline="", encoding="utf-8") as fh:
        return [CompareReport(**{k: conv[types[k]](v) for k, v in row.items()})
                for row in csv.DictReader(fh)]


def report_json(report: CompareReport) -> str:
    return json.dumps(report.as_dict(), sort_keys=False)


def match_psnr_search(image, target, method, tolerance_db: float = 0.25,
                      max_iter: int = 60) -> CompareReport:
    """Bisect ``method``'s threshold until its PSNR is within ``tolerance_db`` of ``target``.

    ``target`` is a PSNR in dB or a :class:`CompareReport`.  ``method`` is a
    ``MethodConfig`` or an already-built ``Pipeline`` for ``image``.
    """
    outcome = match_psnr_outcome(image, target, method, tolerance_db, max_iter)
    return outcome.pipeline.report(outcome)


def match_psnr_outcome(image, target, method, tolerance_db: float = 0.25, max_iter: int = 60):
    if not tolerance_db > 0:
        raise ValueError("tolerance_db must be positive")
    target_db = target.psnr_db if isinstance(target, CompareReport) else float(target)
    pipe = method.pipeline(image) if hasattr(method, "pipeline") else method

    def close(o):
        return abs(o.psnr - target_db) <= tolerance_db

    at_zero = pipe.evaluate(0.0)
    if close(at_zero):
        return at_zero
    if target_db > at_zero.psnr:
        raise SearchFailure(f"target {target_db:.4f} dB above best achievable {at_zero.psnr:.4f} dB",
                            at_zero.psnr, 0.0)
    hi = float(np.nextafter(pipe.max_modulus(), np.inf))
    at_hi = pipe.evaluate(hi)
    if close(at_hi):
        return _snap_to_plateau(pipe, at_hi, close)
    if target_db < at_hi.psnr:
        raise SearchFailure(f"target {target_db:.4f} dB below worst achievable {at_hi.psnr:.4f} dB",
                            at_hi.psnr, hi)
    lo = 0.0
    best = min((at_zero, at_hi), key=lambda o: abs(o.psnr - target_db))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        o = pipe.evaluate(mid)
        if abs(o.psnr - target_db) < abs(best.psnr - target_db):
            best = o
        if close(o):
            return _snap_to_plateau(pipe, o, close)
        if o.psnr > target_db:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    # PSNR jumps where a whole group of tied coefficients crosses tau.  Pin the
    # coefficient set on either side of the jump and tune the step instead,
    # preferring the smaller set.
    floor_step = pipe.step_for(0.0)
    for tau, steps in ((hi, (floor_step, pipe.step_for(hi))),
                       (lo, (pipe.step_for(lo), pipe.step_for(pipe.max_modulus()) * 4))):
        o = _bisect_step(pipe, tau, *steps, target_db, close, max_iter)
        if abs(o.psnr - target_db) < abs(best.psnr - target_db):
            best = o
        if close(o):
            return o
    raise SearchFailure(f"no threshold within {tolerance_db} dB of {target_db:.4f} dB "
                        f"(closest {best.psnr:.4f} dB)", best.psnr, best.tau)


def _bisect_step(pipe, tau, fine, coarse, target_db, close, max_iter):
    """PSNR falls as the step grows; bisect the step with the kept set fixed."""
    o = pipe.evaluate(tau, fine)
    if close(o) or o.psnr < target_db:
        return o
    for _ in range(max_iter):
        mid = 0.5 * (fine + coarse)
        o = pipe.evaluate(tau, mid)
        if close(o):
            return o
        if o.psnr > target_db:
            fine = mid
        else:
            coarse = mid
    return o


def _snap_to_plateau(pipe, outcome, close):
    # the same coefficients survive for every tau down to the smallest kept modulus
    floor = pipe.smallest_kept_modulus(outcome.tau)
    if 0 < floor < outcome.tau:
        snapped = pipe.evaluate(floor)
        if close(snapped) and snapped.retained == outcome.retained:
            return snapped
    return outcome
