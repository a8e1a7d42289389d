"""Command-line entry point: reproducible experiments emitting CSV artifacts.

Subcommands: solve, figures, converge, mc, hjb-check, sellout-compare.  Every
command takes --config/--out/--seed/--threads, writes deterministic CSVs (LF,
'.' decimal separator, repr-round-trip floats) plus a summary JSON, and exits
0 on success, 2 on config errors, 3 on numeric-assertion failures.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .closed_form import (
    Region,
    classify_region,
    horizon_limited_rate,
    linear_impact_value,
    quadratic_impact_strategy,
    quadratic_impact_value,
    steady_rate,
)
from .config import ConfigError, ExperimentConfig, load_config
from .dp import PsiSearch, ValueGrid, playout, solve_backward, solve_backward_sellout, value_at
from .hjb import GridSurface, reduced_hjb_residual
from .impact import ImpactKind
from .mc import SimConfig, convergence_table, estimate_value, run_continuous, run_discrete, write_convergence_csv, write_outcomes_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def version_string() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "-C", str(here), "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"optexec-{__version__}+g{out.stdout.strip()}"
    except OSError:
        pass
    return f"optexec-{__version__}"


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _psi_search(cfg: ExperimentConfig) -> PsiSearch:
    return PsiSearch(scan_points=cfg.dp.psi_grid_size)


def _summary(cfg: ExperimentConfig, args, extra: dict) -> dict:
    return {
        "name": cfg.name,
        "version": version_string(),
        "config": cfg.to_dict(),
        "seed": args.seed if args.seed is not None else cfg.mc.seed,
        "threads": args.threads,
        **extra,
    }


def _write_summary(out_dir: Path, name: str, data: dict) -> None:
    (out_dir / name).write_text(json.dumps(data, indent=2) + "\n", newline="\n")


def _solve_from_config(cfg: ExperimentConfig, sellout: bool = False) -> ValueGrid:
    solver = solve_backward_sellout if sellout else solve_backward
    return solver(
        cfg.market,
        cfg.impact,
        cfg.dp.n,
        k_max=cfg.dp.k_max,
        phi_grid=cfg.dp.phi_grid_size,
        psi_search=_psi_search(cfg),
    )


def _analytic_rate_fn(cfg: ExperimentConfig, phi: float):
    """Rate curve r -> zeta (or None where no closed form applies)."""
    if cfg.impact.kind is not ImpactKind.LOG_QUADRATIC:
        return None
    t = cfg.market.horizon
    alpha, mu_tilde = cfg.impact.alpha, cfg.market.mu_tilde
    region = classify_region(t, phi, alpha, mu_tilde)
    if region.label is Region.C:
        until = phi / steady_rate(alpha, mu_tilde)
        return lambda r: steady_rate(alpha, mu_tilde) if r < until else 0.0
    if region.label is Region.A:
        # defined away from the horizon where the exact rate diverges
        return lambda r: horizon_limited_rate(r, t, alpha, mu_tilde) if r <= t - 1e-3 else None
    return None


def cmd_solve(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    started = time.monotonic()
    grid = _solve_from_config(cfg)
    runtime = time.monotonic() - started
    if not np.all(np.isfinite(grid.values)):
        print("solve produced non-finite values", file=sys.stderr)
        return EXIT_NUMERIC
    grid.to_csv(out_dir / "value_grid.csv")
    strategy, _holdings = playout(grid, cfg.market.phi0)
    strategy.write_csv(out_dir / "policy.csv", cfg.market.phi0)
    terminal = value_at(grid, grid.k_max, 0.0, cfg.market.phi0, 1.0)
    _write_summary(
        out_dir,
        "summary.json",
        _summary(
            cfg,
            args,
            {
                "runtime_seconds": runtime,
                "value": terminal,
                "value_state": {"k": grid.k_max, "phi": cfg.market.phi0, "w": 0.0, "s": 1.0},
            },
        ),
    )
    return EXIT_OK


def cmd_figures(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    phis = args.phi_list
    for phi in phis:
        if not 0 <= phi <= cfg.market.phi0:
            print(f"figure phi {phi} outside [0, phi0]", file=sys.stderr)
            return EXIT_CONFIG
    started = time.monotonic()
    grid = _solve_from_config(cfg)
    n = grid.n

    for phi in phis:
        tag = f"{phi:g}"
        strategy, holdings = playout(grid, phi)
        analytic = _analytic_rate_fn(cfg, phi)
        lines = ["r,zeta,zeta_analytic"]
        for l, rate in enumerate(strategy.rates):
            r = l / n
            ref = analytic(r) if analytic is not None else None
            lines.append(f"{_fmt(r)},{_fmt(rate)},{'' if ref is None else _fmt(ref)}")
        _write_lines(out_dir / f"strategy_phi{tag}.csv", lines)
        lines = ["r,phi_r"]
        for l, phi_r in enumerate(holdings):
            lines.append(f"{_fmt(l / n)},{_fmt(phi_r)}")
        _write_lines(out_dir / f"holdings_phi{tag}.csv", lines)

    k_stride = max(1, grid.k_max // 100)
    phi_stride = max(1, (grid.phi_grid.size - 1) // 200)
    lines = ["t,phi,f"]
    for k in range(0, grid.k_max + 1, k_stride):
        for i in range(0, grid.phi_grid.size, phi_stride):
            lines.append(f"{_fmt(k / n)},{_fmt(grid.phi_grid[i])},{_fmt(grid.values[k, i])}")
    _write_lines(out_dir / "f_surface.csv", lines)

    lines = ["t,phi,region,boundary_a,boundary_c,value_closed_form"]
    if cfg.impact.kind is ImpactKind.LOG_QUADRATIC:
        alpha, mu_tilde = cfg.impact.alpha, cfg.market.mu_tilde
        t_values = np.linspace(cfg.market.horizon / 50, cfg.market.horizon, 50)
        phi_values = np.linspace(0.0, cfg.market.phi0, 51)
        for t in t_values:
            for phi in phi_values:
                region = classify_region(t, phi, alpha, mu_tilde)
                value = quadratic_impact_value(t, 0.0, phi, 1.0, alpha, mu_tilde)
                lines.append(
                    f"{_fmt(t)},{_fmt(phi)},{region.label.value},"
                    f"{_fmt(region.boundary_a)},{_fmt(region.boundary_c)},"
                    f"{'' if value is None else _fmt(value)}"
                )
    _write_lines(out_dir / "regions.csv", lines)
    _write_summary(
        out_dir,
        "figures_summary.json",
        _summary(cfg, args, {"runtime_seconds": time.monotonic() - started, "phi_list": list(phis)}),
    )
    return EXIT_OK


def cmd_converge(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    started = time.monotonic()
    rows = convergence_table(
        cfg.market,
        cfg.impact,
        t=cfg.market.horizon,
        phi=args.phi if args.phi is not None else cfg.market.phi0,
        n_list=args.n_list,
        phi_grid=cfg.dp.phi_grid_size,
        psi_search=_psi_search(cfg),
    )
    write_convergence_csv(rows, out_dir / "convergence.csv")
    _write_summary(
        out_dir,
        "convergence_summary.json",
        _summary(cfg, args, {"runtime_seconds": time.monotonic() - started, "n_list": list(args.n_list)}),
    )
    return EXIT_OK


def cmd_mc(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    started = time.monotonic()
    seed = args.seed if args.seed is not None else cfg.mc.seed
    sim = SimConfig(paths=cfg.mc.paths, seed=seed, dt_fine=cfg.mc.dt_fine)
    phi = cfg.market.phi0
    strategy = None
    source = "closed_form"
    if cfg.impact.kind is ImpactKind.LOG_QUADRATIC:
        strategy = quadratic_impact_strategy(cfg.market.horizon, phi, cfg.impact.alpha, cfg.market.mu_tilde)
    if strategy is None:
        source = "dp_playout"
        grid = _solve_from_config(cfg)
        strategy, _ = playout(grid, phi)
    if args.mode == "continuous":
        outcomes = run_continuous(cfg.market, cfg.impact, strategy, sim)
    else:
        outcomes = run_discrete(cfg.market, cfg.impact, cfg.dp.n, strategy.blocks(cfg.dp.n), sim)
    mean, stderr = estimate_value(outcomes, sim)
    write_outcomes_csv(outcomes, out_dir / "outcomes.csv")
    reference = None
    if cfg.impact.kind is ImpactKind.LOG_QUADRATIC:
        ref = quadratic_impact_value(cfg.market.horizon, 0.0, phi, 1.0, cfg.impact.alpha, cfg.market.mu_tilde)
        reference = None if ref is None else ref * cfg.market.s0
    elif cfg.impact.kind is ImpactKind.LOG_LINEAR:
        reference = linear_impact_value(cfg.impact.alpha, 0.0, phi, cfg.market.s0)
    _write_summary(
        out_dir,
        "mc_summary.json",
        _summary(
            cfg,
            args,
            {
                "runtime_seconds": time.monotonic() - started,
                "mode": args.mode,
                "strategy_source": source,
                "mean": mean,
                "stderr": stderr,
                "reference": reference,
            },
        ),
    )
    return EXIT_OK


def cmd_hjb_check(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    if cfg.impact.kind is not ImpactKind.LOG_QUADRATIC:
        print("hjb-check requires the log_quadratic impact kind", file=sys.stderr)
        return EXIT_CONFIG
    started = time.monotonic()
    alpha, mu_tilde = cfg.impact.alpha, cfg.market.mu_tilde
    horizon = cfg.market.horizon
    c = 2.0 * math.sqrt(alpha * mu_tilde)

    def f_saturated(t: float, phi: float) -> float:
        return math.sqrt(-math.expm1(-2.0 * mu_tilde * t)) / c

    def f_early_finish(t: float, phi: float) -> float:
        return -math.expm1(-c * phi) / c

    rows = ["t,phi,region,residual,delta_t,delta_phi"]
    worst_closed = 0.0
    delta = args.delta
    for t in (0.5 * horizon, 0.75 * horizon, horizon):
        region = classify_region(t, 0.0, alpha, mu_tilde)
        for f, phi in ((f_saturated, 1.5 * region.boundary_a), (f_early_finish, 0.5 * region.boundary_c)):
            label = classify_region(t, phi, alpha, mu_tilde).label.value
            r = reduced_hjb_residual(
                f, t, phi, alpha, mu_tilde, dt=delta, dphi=delta, t_bounds=(0.0, horizon)
            )
            worst_closed = max(worst_closed, abs(r))
            rows.append(f"{_fmt(t)},{_fmt(phi)},{label},{_fmt(r)},{_fmt(delta)},{_fmt(delta)}")

    grid = _solve_from_config(cfg)
    surface = GridSurface(grid)
    dt_grid = 2.0 / grid.n
    dphi_grid = 2.0 * (grid.phi_grid[1] - grid.phi_grid[0])
    worst_grid = 0.0
    for t in (0.75 * surface.t_max, surface.t_max):
        region = classify_region(t, 0.0, alpha, mu_tilde)
        phi = math.sqrt(region.boundary_a * region.boundary_c)  # interior of region B
        if phi >= surface.phi_max:
            continue
        label = classify_region(t, phi, alpha, mu_tilde).label.value
        r = reduced_hjb_residual(
            surface,
            t,
            phi,
            alpha,
            mu_tilde,
            dt=dt_grid,
            dphi=dphi_grid,
            t_bounds=(0.0, surface.t_max),
            phi_bounds=(0.0, surface.phi_max),
        )
        worst_grid = max(worst_grid, abs(r))
        rows.append(f"{_fmt(t)},{_fmt(phi)},{label},{_fmt(r)},{_fmt(dt_grid)},{_fmt(dphi_grid)}")
    _write_lines(out_dir / "hjb_residuals.csv", rows)
    _write_summary(
        out_dir,
        "hjb_summary.json",
        _summary(
            cfg,
            args,
            {
                "runtime_seconds": time.monotonic() - started,
                "max_closed_form_residual": worst_closed,
                "max_grid_residual": worst_grid,
            },
        ),
    )
    return EXIT_OK


def cmd_sellout_compare(cfg: ExperimentConfig, out_dir: Path, args) -> int:
    started = time.monotonic()
    # identical per-lane candidate sets on both solves keep the exact-arithmetic
    # sandwich inequalities intact under float rounding
    matched = PsiSearch(scan_points=cfg.dp.psi_grid_size, golden_iters=0,
                        use_cap=False, warm_start=False)
    free = solve_backward(cfg.market, cfg.impact, cfg.dp.n, k_max=cfg.dp.k_max,
                          phi_grid=cfg.dp.phi_grid_size, psi_search=matched)
    constrained = solve_backward_sellout(cfg.market, cfg.impact, cfg.dp.n, k_max=cfg.dp.k_max,
                                         phi_grid=cfg.dp.phi_grid_size, psi_search=matched)
    lines = ["k,phi,F_prev,F_sellout,F"]
    worst = 0.0
    for k in range(1, free.k_max + 1):
        for i, phi in enumerate(free.phi_grid):
            lo = free.values[k - 1, i]
            so = constrained.values[k, i]
            hi = free.values[k, i]
            worst = max(worst, lo - so, so - hi)
            lines.append(f"{k},{_fmt(phi)},{_fmt(lo)},{_fmt(so)},{_fmt(hi)}")
    _write_lines(out_dir / "sellout_compare.csv", lines)
    _write_summary(
        out_dir,
        "sellout_summary.json",
        _summary(
            cfg,
            args,
            {"runtime_seconds": time.monotonic() - started, "max_sandwich_violation": worst},
        ),
    )
    if worst > 0.0:
        print(f"sandwich inequality violated by {worst}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config JSON")
    common.add_argument("--out", default=None, help="output directory (defaults to config 'outputs')")
    common.add_argument("--seed", type=int, default=None, help="override the config RNG seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for the layer kernel")

    parser = argparse.ArgumentParser(prog="optexec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common], help="backward induction; value grid + policy CSVs")
    fig = sub.add_parser("figures", parents=[common], help="strategy/holdings/surface/region CSVs")
    fig.add_argument("--phi-list", type=_parse_float_list, default=[1.0, 10.0, 100.0])
    conv = sub.add_parser("converge", parents=[common], help="value vs step count table")
    conv.add_argument("--n-list", type=_parse_int_list, default=[25, 50, 100, 200, 400])
    conv.add_argument("--phi", type=float, default=None, help="holdings at which to compare (default phi0)")
    mc = sub.add_parser("mc", parents=[common], help="Monte Carlo playout of the reference strategy")
    mc.add_argument("--mode", choices=["continuous", "discrete"], default="continuous")
    hjb = sub.add_parser("hjb-check", parents=[common], help="PDE residual sweep")
    hjb.add_argument("--delta", type=float, default=1e-4, help="finite-difference step for closed forms")
    sub.add_parser("sellout-compare", parents=[common], help="forced-liquidation vs free value sandwich")
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "figures": cmd_figures,
    "converge": cmd_converge,
    "mc": cmd_mc,
    "hjb-check": cmd_hjb_check,
    "sellout-compare": cmd_sellout_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.outputs
    if not out:
        print("no output directory: pass --out or set 'outputs' in the config", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out_dir}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg, out_dir, args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure under {out_dir}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
