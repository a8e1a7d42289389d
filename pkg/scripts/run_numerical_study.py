#!/usr/bin/env python3
"""Reproduce the full numerical study end to end.

Solves the n = 500 quadratic-impact problem on holdings grids covering
phi = 1, 10 and 100, writes the strategy/holdings/surface/region CSVs, the
step-count convergence table, the PDE residual sweep and the sell-out
comparison, all under one output directory.  Figures are rendered from these
CSVs by the frontend renderer (see frontend/README.md).

Usage: python scripts/run_numerical_study.py [--out runs/study] [--quick]
"""

import argparse
import json
import sys
from pathlib import Path

from optexec.cli import main as cli
from optexec.config import SCHEMA_VERSION


def write_config(path: Path, name: str, phi0: float, kind: str, n: int, grid: int, scan: int) -> Path:
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "market": {"mu": 0.05, "sigma": 0.0, "s0": 1.0, "phi0": phi0, "horizon": 1.0},
        "impact": {"kind": kind, "alpha": 0.01},
        "dp": {"n": n, "phi_grid_size": grid, "psi_grid_size": scan},
        "mc": {"paths": 100_000, "seed": 20240817, "dt_fine": 0.0005},
    }
    path.write_text(json.dumps(cfg, indent=2) + "\n")
    return path


def run(argv: list[str]) -> None:
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/study")
    parser.add_argument("--threads", type=int, default=2)
    parser.add_argument("--quick", action="store_true",
                        help="coarse settings for a fast smoke run (~30s)")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n, grid, scan = (100, 400, 400) if args.quick else (500, 2000, 2000)
    threads = str(args.threads)

    quad_small = write_config(out / "quad_small.json", "quad-impact, phi0=1", 1.0, "log_quadratic", n, grid, scan)
    quad_large = write_config(out / "quad_large.json", "quad-impact, phi0=100", 100.0, "log_quadratic", n, grid, scan)
    linear = write_config(out / "linear.json", "linear-impact, phi0=100", 100.0, "log_linear", n, grid, scan)

    # execution schedules and holdings paths at phi = 1, 10, 100 plus the
    # value surface and region map (quadratic impact)
    run(["figures", "--config", str(quad_large), "--out", str(out / "figures"),
         "--phi-list", "1,10,100", "--threads", threads])

    # value convergence in the step count, both impact kinds
    run(["converge", "--config", str(quad_small), "--out", str(out / "converge_quad"),
         "--n-list", "25,50,100,200,400", "--phi", "1.0", "--threads", threads])
    run(["converge", "--config", str(linear), "--out", str(out / "converge_linear"),
         "--n-list", "25,50,100,200,400", "--phi", "100.0", "--threads", threads])

    # PDE residuals on closed forms and on the solved grid
    run(["hjb-check", "--config", str(quad_large), "--out", str(out / "hjb"), "--threads", threads])

    # forced-liquidation value sandwich
    run(["sellout-compare", "--config", str(quad_small), "--out", str(out / "sellout"), "--threads", threads])

    # Monte Carlo playout of the small-holdings schedule
    run(["mc", "--config", str(quad_small), "--out", str(out / "mc"), "--threads", threads])

    print(f"study artifacts written under {out}/")


if __name__ == "__main__":
    main()
