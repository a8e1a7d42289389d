"""Closed-form values and schedules for the two tractable impact kinds.

Under constant marginal impact the liquidation value is ``w + s(1-e^{-alpha
phi})/alpha`` at every positive horizon: the seller splits the block into
ever finer pieces sold immediately, so only total volume matters.

Under linearly increasing marginal impact (quadratic running total) the plane
of (horizon, holdings) splits into three regions:

* ``C`` - small holdings: sell at the steady rate ``sqrt(mu_tilde/alpha)``
  and finish early; value depends on holdings only.
* ``A`` - large holdings: sell at the horizon-limited rate, never finish;
  value depends on the horizon only.
* ``B`` - in between: no closed form is known, the backward-induction solver
  is the reference there.

For a risk-neutral seller the value of any fixed rate schedule reduces to a
deterministic discounted-proceeds functional, evaluated here exactly piece by
piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .impact import ImpactSpec
from .strategy import ExecutionStrategy

__all__ = [
    "Region",
    "RegionLabel",
    "instant_liquidation_value",
    "linear_impact_value",
    "classify_region",
    "quadratic_impact_value",
    "quadratic_impact_strategy",
    "steady_rate",
    "horizon_limited_rate",
    "proceeds_functional",
    "arctanh",
]


class Region(str, Enum):
    A = "A"  # holdings exceed what the horizon allows selling
    B = "B"  # intermediate; numerical solution only
    C = "C"  # holdings small enough to liquidate early


@dataclass(frozen=True)
class RegionLabel:
    label: Region
    boundary_a: float  # holdings above which the horizon binds (region A)
    boundary_c: float  # holdings below which liquidation finishes early (region C)


def arctanh(x: float) -> float:
    """0.5 * log((1+x)/(1-x)) with an infinity guard near x = 1."""
    if x < 0:
        raise ValueError("arctanh argument must be non-negative here")
    if x >= 1.0 - 1e-15:
        return math.inf
    return 0.5 * math.log1p(2.0 * x / (1.0 - x))


def instant_liquidation_value(h_infinity: float, w: float, phi: float, s: float) -> float:
    """Value of splitting a block infinitely finely in an instant.

    Defined only when the marginal impact saturates at a finite level; with
    unbounded marginal impact an instantaneous sale is worthless and the value
    function instead stays continuous at the zero horizon.
    """
    if math.isinf(h_infinity):
        raise ValueError("instantaneous liquidation requires a finite saturation level")
    if h_infinity < 0:
        raise ValueError("h_infinity must be non-negative")
    if phi < 0 or s < 0:
        raise ValueError("phi and s must be non-negative")
    if h_infinity == 0.0:
        return w + phi * s
    return w - s * math.expm1(-h_infinity * phi) / h_infinity


def linear_impact_value(alpha: float, w: float, phi: float, s: float) -> float:
    """Liquidation value under constant marginal impact, any positive horizon."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if phi < 0 or s < 0:
        raise ValueError("phi and s must be non-negative")
    return w - s * math.expm1(-alpha * phi) / alpha


def _check_quad_args(t: float, alpha: float, mu_tilde: float) -> None:
    if t <= 0:
        raise ValueError("t must be positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if mu_tilde <= 0:
        raise ValueError("mu_tilde must be positive")


def steady_rate(alpha: float, mu_tilde: float) -> float:
    """Constant sell rate that is optimal while holdings last (region C)."""
    return math.sqrt(mu_tilde / alpha)


def horizon_limited_rate(r: float, t: float, alpha: float, mu_tilde: float) -> float:
    """Optimal rate at elapsed time r when holdings never bind (region A).

    Grows without bound as r approaches the horizon t.
    """
    if not 0 <= r < t:
        raise ValueError("r must lie in [0, t)")
    return math.sqrt(mu_tilde / (alpha * (-math.expm1(-2.0 * mu_tilde * (t - r)))))


def classify_region(t: float, phi: float, alpha: float, mu_tilde: float) -> RegionLabel:
    """Place (t, phi) into region A, B or C of the quadratic-impact problem."""
    _check_quad_args(t, alpha, mu_tilde)
    if phi < 0:
        raise ValueError("phi must be non-negative")
    q = math.sqrt(-math.expm1(-2.0 * mu_tilde * t))
    boundary_a = arctanh(q) / math.sqrt(alpha * mu_tilde)
    boundary_c = steady_rate(alpha, mu_tilde) * t
    if phi >= boundary_a:
        label = Region.A
    elif phi <= boundary_c:
        label = Region.C
    else:
        label = Region.B
    return RegionLabel(label=label, boundary_a=boundary_a, boundary_c=boundary_c)


def quadratic_impact_value(
    t: float, w: float, phi: float, s: float, alpha: float, mu_tilde: float
) -> float | None:
    """Closed-form value under quadratic running impact, or None in region B."""
    if s < 0:
        raise ValueError("s must be non-negative")
    region = classify_region(t, phi, alpha, mu_tilde)
    c = 2.0 * math.sqrt(alpha * mu_tilde)
    if region.label is Region.A:
        q = math.sqrt(-math.expm1(-2.0 * mu_tilde * t))
        return w + s * q / c
    if region.label is Region.C:
        return w - s * math.expm1(-c * phi) / c
    return None


def quadratic_impact_strategy(
    t: float,
    phi: float,
    alpha: float,
    mu_tilde: float,
    pieces: int = 400,
    eps_trunc: float = 1e-3,
) -> ExecutionStrategy | None:
    """Optimal schedule in regions A and C, or None in region B.

    Region C is exact: the steady rate until holdings run out, then zero.
    Region A samples the horizon-limited rate onto ``pieces`` midpoint steps,
    truncated ``eps_trunc`` before the horizon where the rate diverges; the
    residual shares stay unsold.  Midpoint sampling undersells the exact
    (convex, increasing) rate, so the schedule never overdraws holdings.
    """
    region = classify_region(t, phi, alpha, mu_tilde)
    if region.label is Region.B:
        return None
    if region.label is Region.C:
        rate = steady_rate(alpha, mu_tilde)
        tau = phi / rate  # equals phi * sqrt(alpha / mu_tilde)
        if tau >= t * (1 - 1e-12):
            return ExecutionStrategy(times=(0.0, t), rates=(rate,))
        return ExecutionStrategy(times=(0.0, tau, t), rates=(rate, 0.0))
    if not 0 < eps_trunc < t:
        raise ValueError("eps_trunc must lie in (0, t)")
    if pieces < 1:
        raise ValueError("pieces must be positive")
    edges = np.linspace(0.0, t - eps_trunc, pieces + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    rates = tuple(horizon_limited_rate(r, t, alpha, mu_tilde) for r in mids)
    times = tuple(edges) + (t,)
    return ExecutionStrategy(times=times, rates=rates + (0.0,))


def proceeds_functional(strategy: ExecutionStrategy, spec: ImpactSpec, mu_tilde: float) -> float:
    """Exact risk-neutral proceeds per unit of initial price for a fixed schedule.

    Each constant piece integrates in closed form: a rate zeta over a window
    of length tau sells ``zeta * (1 - e^{-lambda tau}) / lambda`` discounted
    units, ``lambda = mu_tilde + g(zeta)``, with the discount accumulated
    across earlier pieces.  This is a lower bound on the optimal value.
    """
    if mu_tilde <= 0:
        raise ValueError("mu_tilde must be positive")
    total = 0.0
    accumulated = 0.0
    for rate, a, b in zip(strategy.rates, strategy.times, strategy.times[1:]):
        lam = mu_tilde + spec.cumulative(rate)
        tau = b - a
        total += rate * math.exp(-accumulated) * (-math.expm1(-lam * tau)) / lam
        accumulated += lam * tau
    return total
