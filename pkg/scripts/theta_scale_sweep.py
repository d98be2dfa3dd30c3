"""How the frequency-to-theta scale affects retention on the synthetic edges.

For each ``cscale`` the PhSdWav coder is searched to the PSNR that db9 reaches
at a fixed retention, and the number of coefficients it needs is recorded.

    python3 scripts/theta_scale_sweep.py --scales 0 1 3.14159 6.28319 12
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from phsdwav import MethodConfig, SearchFailure, gen_edge
from phsdwav.metrics import match_psnr_outcome


@dataclass
class Config:
    scales: tuple = (0.0, 1.0, math.pi, 2 * math.pi, 4 * math.pi)
    kinds: tuple = ("vertical", "horizontal", "skewed")
    size: int = 64
    db_keep: int = 512
    out: Path = Path("results/theta_scale.csv")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", type=float, nargs="+", default=list(Config.scales))
    ap.add_argument("--size", type=int, default=Config.size)
    ap.add_argument("--db-keep", type=int, default=Config.db_keep)
    ap.add_argument("--out", type=Path, default=Config.out)
    a = ap.parse_args(argv)
    cfg = Config(tuple(a.scales), size=a.size, db_keep=a.db_keep, out=a.out)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)

    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "cscale", "db_coeffs", "target_db", "phsd_coeffs", "phsd_psnr_db"])
        for kind in cfg.kinds:
            image = gen_edge(kind, cfg.size)
            pipe = MethodConfig("db").pipeline(image)
            ref = pipe.evaluate(pipe.keep_threshold(cfg.db_keep))
            for c in cfg.scales:
                try:
                    o = match_psnr_outcome(image, ref.psnr, MethodConfig("phsd", theta_scale=c))
                    got, value = o.stream.retained_count, o.psnr
                except SearchFailure as exc:
                    got, value = "", exc.args[0]
                w.writerow([kind, c, ref.stream.retained_count, f"{ref.psnr:.3f}", got, value])
                print(f"{kind:10s} cscale={c:8.4f} db9={ref.stream.retained_count:5d} phsd={got}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
