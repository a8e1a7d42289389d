"""Backward-induction solver for the per-share value of a liquidation program.

For a risk-neutral seller with cash utility the k-step value separates as
``V_k(w, phi, s) = w + s * F_k(phi)``, so the recursion runs on the scalar
surface F alone:

    F_k(phi) = max over psi in [0, phi] of
               exp(-g_n(psi)) * (psi + exp(-mu_tilde/n) * F_{k-1}(phi - psi)),
    F_0 = 0.

One block of psi shares earns ``psi * exp(-g_n(psi))`` per unit price and
scales the expected next price by ``exp(-g_n(psi)) * exp(-mu_tilde/n)``
(exact lognormal mean, not an Euler proxy).  A sell-out variant forces full
liquidation by the horizon via an infeasibility sentinel at the terminal
layer.

The inner maximisation scans a dense candidate ladder and then refines the
bracketing interval by golden section.  Grid points within one layer are
independent, so the kernel parallelises across them; layers are sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange

from .impact import ImpactKind, ImpactSpec
from .market import MarketParams
from .strategy import ExecutionStrategy

__all__ = [
    "PsiSearch",
    "ValueGrid",
    "INFEASIBLE",
    "solve_backward",
    "solve_backward_sellout",
    "value_at",
    "playout",
]

INFEASIBLE = -math.inf

_LINEAR, _QUADRATIC, _CUSTOM = 0, 1, 2


@dataclass(frozen=True)
class PsiSearch:
    """Block-size search settings: dense scan then golden-section refinement.

    ``use_cap`` prunes the scan above the provable one-step dominance bound of
    the built-in impact kinds (the objective is decreasing beyond it); ties in
    the scan resolve to the smallest block.
    """

    scan_points: int = 2000
    golden_iters: int = 48
    use_cap: bool = True
    warm_start: bool = True

    def __post_init__(self) -> None:
        if self.scan_points < 1:
            raise ValueError("scan_points must be positive")
        if self.golden_iters < 0:
            raise ValueError("golden_iters must be non-negative")


@dataclass
class ValueGrid:
    """Solved value surface F and maximising block sizes on a phi grid.

    ``values[k, i]`` is the per-share value with k steps to go at holdings
    ``phi_grid[i]``; ``policy[k, i]`` is the block the maximiser sells first.
    Row 0 is the terminal layer (all zero, or the sell-out sentinel).
    """

    n: int
    k_max: int
    phi_grid: np.ndarray
    values: np.ndarray
    policy: np.ndarray
    sellout: bool = False

    @property
    def phi0(self) -> float:
        return float(self.phi_grid[-1])

    def layer_time(self, k: int) -> float:
        return k / self.n

    def interp_value(self, k: int, phi: float) -> float:
        """Linearly interpolated F at layer k; sentinel-adjacent cells stay infeasible."""
        if not 0 <= k <= self.k_max:
            raise ValueError(f"layer {k} outside [0, {self.k_max}]")
        if not 0 <= phi <= self.phi0 * (1 + 1e-12):
            raise ValueError(f"phi {phi} outside [0, {self.phi0}]")
        vals = self.values[k]
        grid = self.phi_grid
        j = int(np.searchsorted(grid, phi, side="right")) - 1
        j = min(max(j, 0), len(grid) - 2)
        lo, hi = vals[j], vals[j + 1]
        if phi == grid[j]:
            return float(lo)
        if lo == INFEASIBLE or hi == INFEASIBLE:
            return INFEASIBLE
        frac = (phi - grid[j]) / (grid[j + 1] - grid[j])
        return float(lo + frac * (hi - lo))

    def to_csv(self, path: str | Path) -> None:
        """Rows ``k,phi,F,psi_hat``, k ascending then phi ascending."""
        lines = ["k,phi,F,psi_hat"]
        for k in range(self.k_max + 1):
            for i, phi in enumerate(self.phi_grid):
                lines.append(f"{k},{float(phi)!r},{float(self.values[k, i])!r},{float(self.policy[k, i])!r}")
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")


@njit(cache=True, inline="always")
def _block_impact(code, coef, nval, zk, hk, gk, psi):
    """g_n(psi) for the three impact kinds (custom: exact table integral of h)."""
    if code == _LINEAR:
        return coef * psi
    if code == _QUADRATIC:
        return coef * psi * psi
    z = nval * psi
    m = zk.shape[0]
    if z >= zk[m - 1]:
        return (gk[m - 1] + hk[m - 1] * (z - zk[m - 1])) / nval
    lo, hi = 0, m - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if zk[mid] <= z:
            lo = mid
        else:
            hi = mid
    dz = z - zk[lo]
    slope = (hk[lo + 1] - hk[lo]) / (zk[lo + 1] - zk[lo])
    return (gk[lo] + hk[lo] * dz + 0.5 * slope * dz * dz) / nval


@njit(cache=True, inline="always")
def _objective(g, psi, prev, beta, inv, m, code, coef, nval, zk, hk, gk):
    y = (g - psi) * inv
    idx = int(y)
    if idx > m - 2:
        idx = m - 2
    frac = y - idx
    v0 = prev[idx]
    cont = v0 + frac * (prev[idx + 1] - v0)
    return math.exp(-_block_impact(code, coef, nval, zk, hk, gk, psi)) * (psi + beta * cont)


@njit(cache=True)
def _forced_layer(grid, code, coef, nval, zk, hk, gk):
    # bitwise-identical to the scan kernel's objective at psi = phi with an
    # all-zero previous layer, so the sandwich inequalities survive rounding
    m = grid.shape[0]
    out = np.empty(m)
    for i in range(m):
        out[i] = math.exp(-_block_impact(code, coef, nval, zk, hk, gk, grid[i])) * grid[i]
    return out


@njit(cache=True, parallel=True)
def _layer(grid, prev, hi, warm, use_warm, code, coef, nval, zk, hk, gk, beta, inv, scan, iters):
    m = grid.shape[0]
    out_v = np.empty(m)
    out_p = np.empty(m)
    ratio = 0.6180339887498949
    for i in prange(m):
        g = grid[i]
        h = hi[i]
        best_v = beta * prev[i]  # psi = 0 keeps everything, price drifts down
        best_p = 0.0
        best_j = 0
        for j in range(1, scan + 1):
            psi = h * (j / scan)
            v = _objective(g, psi, prev, beta, inv, m, code, coef, nval, zk, hk, gk)
            if v > best_v:
                best_v = v
                best_p = psi
                best_j = j
        if use_warm:
            psi = warm[i]
            if psi > h:
                psi = h
            if psi > 0.0:
                v = _objective(g, psi, prev, beta, inv, m, code, coef, nval, zk, hk, gk)
                if v > best_v:
                    best_v = v
                    best_p = psi
        a = h * ((best_j - 1) / scan) if best_j > 0 else 0.0
        b = h * ((best_j + 1) / scan) if best_j < scan else h
        for _ in range(iters):
            c = b - ratio * (b - a)
            d = a + ratio * (b - a)
            fc = _objective(g, c, prev, beta, inv, m, code, coef, nval, zk, hk, gk)
            fd = _objective(g, d, prev, beta, inv, m, code, coef, nval, zk, hk, gk)
            if fc > best_v:
                best_v = fc
                best_p = c
            if fd > best_v:
                best_v = fd
                best_p = d
            if fc >= fd:
                b = d
            else:
                a = c
        out_v[i] = best_v
        out_p[i] = best_p
    return out_v, out_p


def _impact_kernel_args(spec: ImpactSpec, n: int):
    empty = np.empty(0)
    if spec.kind is ImpactKind.LOG_LINEAR:
        return _LINEAR, spec.block_coefficient(n), float(n), empty, empty, empty
    if spec.kind is ImpactKind.LOG_QUADRATIC:
        return _QUADRATIC, spec.block_coefficient(n), float(n), empty, empty, empty
    table = spec._cum_table
    return _CUSTOM, 0.0, float(n), table[:, 0].copy(), table[:, 1].copy(), table[:, 2].copy()


def _build_grid(phi0: float, phi_grid) -> np.ndarray:
    if isinstance(phi_grid, (int, np.integer)):
        if phi_grid < 1:
            raise ValueError("phi_grid resolution must be positive")
        return np.linspace(0.0, phi0, int(phi_grid) + 1)
    grid = np.asarray(phi_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("phi_grid must be one-dimensional with at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("phi_grid must be strictly increasing")
    if grid[0] != 0.0 or not math.isclose(grid[-1], phi0, rel_tol=1e-12):
        raise ValueError("phi_grid must span [0, phi0]")
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("the solver requires a uniform phi grid")
    return grid


def _solve(
    params: MarketParams,
    spec: ImpactSpec,
    n: int,
    k_max: int | None,
    phi_grid,
    psi_search: PsiSearch,
    terminal: np.ndarray | None,
    sellout: bool,
) -> ValueGrid:
    if n < 1:
        raise ValueError("n must be a positive integer")
    k_max = n if k_max is None else int(k_max)
    if not 0 <= k_max <= n:
        raise ValueError("k_max must lie in [0, n]")
    grid = _build_grid(params.phi0, phi_grid)
    m = grid.size
    beta = math.exp(-params.mu_tilde / n)
    inv = (m - 1) / (grid[-1] - grid[0])

    cap = spec.block_search_cap(n) if psi_search.use_cap else None
    if sellout or cap is None:
        hi = grid.copy()
    else:
        hi = np.minimum(grid, cap)

    values = np.empty((k_max + 1, m))
    policy = np.zeros((k_max + 1, m))
    if sellout:
        values[0] = INFEASIBLE
        values[0, 0] = 0.0
    elif terminal is not None:
        base = np.asarray(terminal, dtype=float)
        if base.shape != (m,):
            raise ValueError("terminal layer must match the phi grid")
        if not np.all(np.isfinite(base)):
            raise ValueError("terminal layer must be finite")
        values[0] = base
    else:
        values[0] = 0.0

    code, coef, nval, zk, hk, gk = _impact_kernel_args(spec, n)
    for k in range(1, k_max + 1):
        if sellout and k == 1:
            # only full liquidation reaches the feasible terminal state
            values[1] = _forced_layer(grid, code, coef, nval, zk, hk, gk)
            policy[1] = grid
            continue
        vals, pol = _layer(
            grid,
            values[k - 1],
            hi,
            policy[k - 1],
            psi_search.warm_start,
            code,
            coef,
            nval,
            zk,
            hk,
            gk,
            beta,
            inv,
            psi_search.scan_points,
            psi_search.golden_iters,
        )
        values[k] = vals
        policy[k] = pol
    return ValueGrid(n=n, k_max=k_max, phi_grid=grid, values=values, policy=policy, sellout=sellout)


def solve_backward(
    params: MarketParams,
    spec: ImpactSpec,
    n: int,
    k_max: int | None = None,
    phi_grid=2000,
    psi_search: PsiSearch = PsiSearch(),
    terminal: np.ndarray | None = None,
) -> ValueGrid:
    """Solve k_max backward-induction layers; ``terminal`` seeds layer 0."""
    return _solve(params, spec, n, k_max, phi_grid, psi_search, terminal, sellout=False)


def solve_backward_sellout(
    params: MarketParams,
    spec: ImpactSpec,
    n: int,
    k_max: int | None = None,
    phi_grid=2000,
    psi_search: PsiSearch = PsiSearch(),
) -> ValueGrid:
    """Same recursion under the constraint that all shares are sold by the horizon."""
    return _solve(params, spec, n, k_max, phi_grid, psi_search, terminal=None, sellout=True)


def value_at(grid: ValueGrid, k: int, w: float, phi: float, s: float) -> float:
    """Cash-plus-holdings value w + s * F_k(phi)."""
    if s < 0:
        raise ValueError("s must be non-negative")
    f = grid.interp_value(k, phi)
    if f == INFEASIBLE:
        return INFEASIBLE
    return w + s * f

def playout(grid: ValueGrid, phi_start: float) -> tuple[ExecutionStrategy, np.ndarray]:
    """Walk the solved policy forward from ``phi_start``.

    Returns the induced rate schedule (rate ``n * psi_l`` on [l/n, (l+1)/n))
    and the holdings trajectory, one entry per step boundary.
    """
    if not 0 <= phi_start <= grid.phi0 * (1 + 1e-12):
        raise ValueError("phi_start outside the solved grid")
    n, k_max = grid.n, grid.k_max
    if k_max == 0:
        # no decisions to read: an idle single-step schedule
        return ExecutionStrategy.zero(1.0 / n), np.array([phi_start])
    holdings = np.empty(k_max + 1)
    holdings[0] = phi_start
    rates = []
    phi = phi_start
    for l in range(k_max):
        psi = float(np.interp(phi, grid.phi_grid, grid.policy[k_max - l]))
        psi = min(max(psi, 0.0), phi)
        rates.append(n * psi)
        phi -= psi
        holdings[l + 1] = phi
    times = tuple(l / n for l in range(k_max + 1))
    return ExecutionStrategy(times=times, rates=tuple(rates)), holdings
