"""Monte Carlo playout of execution schedules and convergence tables.

Paths are simulated in log space with exact Gaussian increments; selling
enters as an extra downward drift (continuous playout) or as discrete block
displacements (n-step playout).  Draws come from counter-based Philox streams
split per fixed-size path chunk, so a given (seed, path index) always sees the
same noise regardless of how the work is batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .closed_form import linear_impact_value, quadratic_impact_value
from .dp import PsiSearch, solve_backward, value_at
from .impact import ImpactKind, ImpactSpec
from .market import MarketParams, log_price
from .strategy import ExecutionStrategy

__all__ = [
    "SimConfig",
    "TabulatedUtility",
    "ExecutionOutcome",
    "run_discrete",
    "run_continuous",
    "estimate_value",
    "ConvergenceRow",
    "convergence_table",
    "write_outcomes_csv",
    "write_convergence_csv",
]

_CHUNK = 8192


@dataclass(frozen=True)
class TabulatedUtility:
    """Utility tabulated on (w, s) at empty and full holdings, blended in phi.

    Both tables must be non-decreasing along each axis and the full-holdings
    table must dominate the empty one, keeping the blend monotone in all three
    arguments.  Outside the grids the tables extrapolate as constants.  The
    polynomial growth envelope (coefficient and power) is recorded for
    bookkeeping only.
    """

    w_grid: tuple[float, ...]
    s_grid: tuple[float, ...]
    table_empty: tuple[tuple[float, ...], ...]
    table_full: tuple[tuple[float, ...], ...]
    phi_max: float
    growth_coef: float | None = None
    growth_power: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.w_grid)
        s = np.asarray(self.s_grid)
        if np.any(np.diff(w) <= 0) or np.any(np.diff(s) <= 0):
            raise ValueError("utility grids must be strictly increasing")
        lo = np.asarray(self.table_empty, dtype=float)
        hi = np.asarray(self.table_full, dtype=float)
        shape = (len(self.w_grid), len(self.s_grid))
        if lo.shape != shape or hi.shape != shape:
            raise ValueError("utility tables must be shaped (len(w_grid), len(s_grid))")
        for tab in (lo, hi):
            if np.any(tab < 0):
                raise ValueError("utility must be non-negative")
            if np.any(np.diff(tab, axis=0) < 0) or np.any(np.diff(tab, axis=1) < 0):
                raise ValueError("utility tables must be non-decreasing along each axis")
        if np.any(hi < lo):
            raise ValueError("full-holdings table must dominate the empty one")
        if not self.phi_max > 0:
            raise ValueError("phi_max must be positive")

    def _bilinear(self, table: np.ndarray, w, s):
        wg = np.asarray(self.w_grid)
        sg = np.asarray(self.s_grid)
        wi = np.clip(np.searchsorted(wg, w, side="right") - 1, 0, len(wg) - 2)
        si = np.clip(np.searchsorted(sg, s, side="right") - 1, 0, len(sg) - 2)
        fw = np.clip((w - wg[wi]) / (wg[wi + 1] - wg[wi]), 0.0, 1.0)
        fs = np.clip((s - sg[si]) / (sg[si + 1] - sg[si]), 0.0, 1.0)
        v00 = table[wi, si]
        v01 = table[wi, si + 1]
        v10 = table[wi + 1, si]
        v11 = table[wi + 1, si + 1]
        return (1 - fw) * ((1 - fs) * v00 + fs * v01) + fw * ((1 - fs) * v10 + fs * v11)

    def __call__(self, w, phi, s):
        lo = self._bilinear(np.asarray(self.table_empty, dtype=float), w, s)
        hi = self._bilinear(np.asarray(self.table_full, dtype=float), w, s)
        blend = np.clip(np.asarray(phi, dtype=float) / self.phi_max, 0.0, 1.0)
        return (1 - blend) * lo + blend * hi


@dataclass(frozen=True)
class SimConfig:
    paths: int
    seed: int
    dt_fine: float = 5e-4
    utility: TabulatedUtility | None = None

    def __post_init__(self) -> None:
        if self.paths < 1:
            raise ValueError("paths must be positive")
        if not self.dt_fine > 0:
            raise ValueError("dt_fine must be positive")


@dataclass(frozen=True)
class ExecutionOutcome:
    path_id: int
    terminal_w: float
    terminal_phi: float
    terminal_s: float


def _chunk_stream(seed: int, chunk_index: int) -> np.random.Generator:
    # jumped Philox: path noise depends only on (seed, chunk, position, step)
    return np.random.Generator(np.random.Philox(key=seed).jumped(chunk_index))


def _chunk_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    # always draw the full chunk width so a path's noise is independent of
    # how many paths happen to share its (partial) chunk
    return rng.standard_normal(_CHUNK)[:count]


def _chunks(paths: int):
    for start in range(0, paths, _CHUNK):
        yield start // _CHUNK, start, min(start + _CHUNK, paths)


def run_discrete(
    params: MarketParams,
    spec: ImpactSpec,
    n: int,
    blocks,
    config: SimConfig,
) -> list[ExecutionOutcome]:
    """Play a block schedule through the n-step dynamics, one exact step per block.

    Each step applies the block's displacement, books proceeds at the impacted
    price, then diffuses the log price over 1/n.  Unused trailing steps sell
    nothing but still diffuse.
    """
    psi = np.asarray(blocks, dtype=float)
    if psi.ndim != 1 or psi.size > n:
        raise ValueError("blocks must be a vector with at most n entries")
    if np.any(psi < 0):
        raise ValueError("blocks must be non-negative")
    if psi.sum() > params.phi0 + 1e-12:
        raise ValueError("blocks oversell the endowment")
    psi = np.concatenate([psi, np.zeros(n - psi.size)])
    displacements = spec.block(n, psi)
    dt = 1.0 / n
    vol = params.sigma * math.sqrt(dt)
    x0 = log_price(params.s0)
    terminal_phi = params.phi0 - float(psi.sum())

    outcomes: list[ExecutionOutcome] = []
    for ci, start, stop in _chunks(config.paths):
        rng = _chunk_stream(config.seed, ci)
        count = stop - start
        x = np.full(count, x0)
        w = np.zeros(count)
        for l in range(n):
            x = x - displacements[l]
            if psi[l] > 0.0:
                w = w + psi[l] * np.exp(x)
            z = _chunk_normals(rng, count)
            x = x + vol * z - params.mu * dt
        s = np.exp(x)
        outcomes.extend(
            ExecutionOutcome(start + i, float(w[i]), terminal_phi, float(s[i]))
            for i in range(count)
        )
    return outcomes


def run_continuous(
    params: MarketParams,
    spec: ImpactSpec,
    strategy: ExecutionStrategy,
    config: SimConfig,
) -> list[ExecutionOutcome]:
    """Play a rate schedule through the continuous dynamics on a fine grid.

    Each constant piece is stepped with the largest uniform substep not above
    ``dt_fine`` that divides the piece exactly, so steps never straddle a rate
    change.  Cash accrues as rate * price * dt at the step-start price; the
    impact of selling enters the within-step drift.
    """
    if strategy.end > params.horizon * (1 + 1e-12):
        raise ValueError("strategy extends beyond the horizon")
    if strategy.total > params.phi0 + 1e-12:
        raise ValueError("strategy oversells the endowment")
    pieces = list(zip(strategy.rates, strategy.times, strategy.times[1:]))
    if strategy.end < params.horizon - 1e-12:
        pieces.append((0.0, strategy.end, params.horizon))
    x0 = log_price(params.s0)
    terminal_phi = params.phi0 - strategy.total

    outcomes: list[ExecutionOutcome] = []
    for ci, start, stop in _chunks(config.paths):
        rng = _chunk_stream(config.seed, ci)
        count = stop - start
        x = np.full(count, x0)
        w = np.zeros(count)
        for rate, a, b in pieces:
            length = b - a
            steps = max(1, math.ceil(length / config.dt_fine - 1e-9))
            dt = length / steps
            drift = (params.mu + spec.cumulative(rate)) * dt
            vol = params.sigma * math.sqrt(dt)
            for _ in range(steps):
                if rate > 0.0:
                    w = w + rate * np.exp(x) * dt
                z = _chunk_normals(rng, count)
                x = x + vol * z - drift
        s = np.exp(x)
        outcomes.extend(
            ExecutionOutcome(start + i, float(w[i]), terminal_phi, float(s[i]))
            for i in range(count)
        )
    return outcomes


def estimate_value(outcomes: list[ExecutionOutcome], config: SimConfig) -> tuple[float, float]:
    """Sample mean and standard error of the utility over outcomes."""
    if not outcomes:
        raise ValueError("outcomes must be non-empty")
    if config.utility is None:
        u = np.array([o.terminal_w for o in outcomes])
    else:
        w = np.array([o.terminal_w for o in outcomes])
        phi = np.array([o.terminal_phi for o in outcomes])
        s = np.array([o.terminal_s for o in outcomes])
        u = np.asarray(config.utility(w, phi, s), dtype=float)
    mean = float(u.mean())
    stderr = float(u.std(ddof=1) / math.sqrt(u.size)) if u.size > 1 else 0.0
    return mean, stderr


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: float
    reference: float
    abs_gap: float


def _closed_form_reference(params: MarketParams, spec: ImpactSpec, t: float, phi: float) -> float | None:
    if spec.kind is ImpactKind.LOG_LINEAR:
        return linear_impact_value(spec.alpha, 0.0, phi, 1.0)
    if spec.kind is ImpactKind.LOG_QUADRATIC:
        return quadratic_impact_value(t, 0.0, phi, 1.0, spec.alpha, params.mu_tilde)
    return None


def convergence_table(
    params: MarketParams,
    spec: ImpactSpec,
    t: float,
    phi: float,
    n_list,
    phi_grid=2000,
    psi_search: PsiSearch = PsiSearch(),
    reference: float | None = None,
) -> list[ConvergenceRow]:
    """Backward-induction values at (t, phi) across step counts, with a reference.

    The reference is the closed form where one exists; otherwise the two
    finest runs are extrapolated assuming a first-order gap in 1/n.
    """
    ns = [int(n) for n in n_list]
    if not ns:
        raise ValueError("n_list must be non-empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be strictly ascending")
    if not 0 < t <= params.horizon:
        raise ValueError("t must lie in (0, horizon]")
    values = []
    for n in ns:
        k = int(math.floor(n * t + 1e-9))
        grid = solve_backward(params, spec, n, k_max=k, phi_grid=phi_grid, psi_search=psi_search)
        values.append(value_at(grid, k, 0.0, phi, 1.0))
    if reference is None:
        reference = _closed_form_reference(params, spec, t, phi)
    if reference is None:
        reference = 2.0 * values[-1] - values[-2] if len(values) > 1 else values[-1]
    return [ConvergenceRow(n, v, reference, abs(v - reference)) for n, v in zip(ns, values)]


def write_outcomes_csv(outcomes: list[ExecutionOutcome], path: str | Path) -> None:
    lines = ["path_id,terminal_w,terminal_phi,terminal_s"]
    for o in outcomes:
        lines.append(f"{o.path_id},{o.terminal_w!r},{o.terminal_phi!r},{o.terminal_s!r}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_convergence_csv(rows: list[ConvergenceRow], path: str | Path) -> None:
    lines = ["n,value,reference,abs_gap"]
    for r in rows:
        lines.append(f"{r.n},{r.value!r},{r.reference!r},{r.abs_gap!r}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
