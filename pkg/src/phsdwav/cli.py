"""``phsw`` command line: encode, decode, compare, synth, filters."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import codec
from .errors import (ConditioningFailure, CorruptStream, GeometryError, ParseError, SearchFailure,
                     SymmetryError)
from .filterbank import default_cache, filter_cache_get, write_filter_table
from .imageio import ImageBuffer, gen_edge, read_image, write_pgm
from .metrics import match_psnr_outcome, report_json, write_reports_csv
from .phsd2d import DEFAULT_ORDER, DEFAULT_THETA_SCALE
from .pipeline import MethodConfig, decode_image

EXIT_OK, EXIT_USAGE, EXIT_GEOMETRY, EXIT_CORRUPT, EXIT_SEARCH = 0, 2, 3, 4, 5
DIFF_GAIN = 8


def _method_args(p: argparse.ArgumentParser, with_method: bool = True):
    if with_method:
        p.add_argument("--method", choices=codec.METHODS, default="phsd")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER, help="filter order N (2N taps)")
    p.add_argument("--levels", type=int, default=None, help="decomposition levels (default: auto)")
    p.add_argument("--cscale", type=float, default=DEFAULT_THETA_SCALE,
                   help="theta = cscale * |eta| / H for the PhSdWav rows")
    p.add_argument("--threads", type=int, default=None, help="thread cap (the pipeline is serial)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phsw", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="image -> .phsw container")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _method_args(p)
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--threshold", type=float, default=None)
    sel.add_argument("--keep", type=int, default=None, help="retain the K largest coefficients")
    p.add_argument("--step", type=float, default=None, help="quantization step (default tau/2)")

    p = sub.add_parser("decode", help=".phsw container -> PGM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="PhSdWav vs dbN at matched PSNR")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="inp")
    src.add_argument("--synthetic", choices=("vertical", "horizontal", "skewed"))
    p.add_argument("--size", type=int, default=64, help="synthetic image size")
    p.add_argument("--keep", type=int, default=48, help="retention for the anchor method")
    p.add_argument("--anchor", choices=codec.METHODS, default="phsd",
                   help="method run at --keep; the other one is matched to its PSNR")
    p.add_argument("--tolerance", type=float, default=0.25, help="PSNR tolerance in dB")
    p.add_argument("--out-dir", default=".")
    _method_args(p, with_method=False)

    p = sub.add_parser("synth", help="write a synthetic edge image")
    p.add_argument("--kind", choices=("vertical", "horizontal", "skewed"), required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--out", required=True)

    p = sub.add_parser("filters", help="dump filter taps as CSV")
    p.add_argument("--theta", type=float, nargs="+", default=[0.0])
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--out", required=True)
    return ap


def _config(args, method: str) -> MethodConfig:
    return MethodConfig(method, args.order, args.levels, args.cscale)


def cmd_encode(args) -> int:
    image = read_image(args.inp)
    pipe = _config(args, args.method).pipeline(image)
    if args.keep is not None:
        if args.keep < 0:
            raise ValueError("--keep must be nonnegative")
        tau = pipe.keep_threshold(args.keep)
    else:
        tau = args.threshold or 0.0
        if tau < 0:
            raise ValueError("--threshold must be nonnegative")
    if args.step is not None and not args.step > 0:
        raise ValueError("--step must be positive")
    outcome = pipe.evaluate(tau, args.step)
    data = pipe.encode(outcome)
    Path(args.out).write_bytes(data)
    print(report_json(pipe.report(outcome, data)))
    return EXIT_OK


def cmd_decode(args) -> int:
    data = Path(args.inp).read_bytes()
    image = decode_image(data)
    Path(args.out).write_bytes(write_pgm(image))
    return EXIT_OK


def diff_image(reference: ImageBuffer, test: ImageBuffer, gain: int = DIFF_GAIN) -> ImageBuffer:
    """``|reference - test|`` amplified by ``gain`` and clamped to the sample range."""
    d = np.clip(gain * np.abs(reference.samples - test.samples), 0, reference.max_value)
    return ImageBuffer(d, reference.bit_depth)


def cmd_compare(args) -> int:
    if args.synthetic:
        image, stem = gen_edge(args.synthetic, args.size), args.synthetic
    else:
        image, stem = read_image(args.inp), Path(args.inp).stem
    other = "db" if args.anchor == "phsd" else "phsd"
    anchor_pipe = _config(args, args.anchor).pipeline(image)
    anchor = anchor_pipe.evaluate(anchor_pipe.keep_threshold(args.keep))
    matched = match_psnr_outcome(image, anchor.psnr, _config(args, other), args.tolerance)
    outcomes = sorted((anchor, matched), key=lambda o: o.pipeline.config.method != "phsd")
    reports = [o.pipeline.report(o) for o in outcomes]

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_reports_csv(reports, out / f"{stem}_compare.csv")
    write_reports_csv(reports, sys.stdout)
    (out / f"{stem}_original.pgm").write_bytes(write_pgm(image))
    for o, r in zip(outcomes, reports):
        (out / f"{stem}_{r.method}_recon.pgm").write_bytes(write_pgm(o.reconstruction))
        diff = diff_image(image, o.reconstruction)
        (out / f"{stem}_{r.method}_diff_x{DIFF_GAIN}.pgm").write_bytes(write_pgm(diff))
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.size < 8:
        raise ValueError("--size must be at least 8")
    Path(args.out).write_bytes(write_pgm(gen_edge(args.kind, args.size)))
    return EXIT_OK


def cmd_filters(args) -> int:
    pairs = [filter_cache_get(t, args.order) for t in args.theta]
    write_filter_table(pairs, args.out)
    return EXIT_OK


COMMANDS = {"encode": cmd_encode, "decode": cmd_decode, "compare": cmd_compare,
            "synth": cmd_synth, "filters": cmd_filters}


def _dump_cache():
    target = os.environ.get("PHSW_CACHE_DIR")
    if target:
        Path(target).mkdir(parents=True, exist_ok=True)
        write_filter_table(default_cache().pairs(), Path(target) / "filters.csv")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = COMMANDS[args.command](args)
        _dump_cache()
        return code
    except SearchFailure as exc:
        msg, code = f"search failed: {exc}", EXIT_SEARCH
    except (CorruptStream, SymmetryError) as exc:
        msg, code = f"corrupt stream: {exc}", EXIT_CORRUPT
    except (GeometryError, ConditioningFailure) as exc:
        msg, code = f"geometry error: {exc}", EXIT_GEOMETRY
    except (ParseError, ValueError, OverflowError, OSError) as exc:
        msg, code = f"error: {exc}", EXIT_USAGE
    print(f"phsw: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
