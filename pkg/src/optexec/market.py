"""Price dynamics: a lognormal unaffected price plus trader-driven impact.

Everything runs in log space.  The unaffected log price follows a constant-
coefficient diffusion ``dX = sigma dB - mu dt``, so one step of length dt is
sampled exactly as ``x + sigma*sqrt(dt)*z - mu*dt``.  The price level has
effective drift ``-mu_tilde = -(mu - sigma**2/2)`` and a zero price is the
absorbing marker ``x = -inf`` (which every operation here preserves).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "MarketParams",
    "PathState",
    "ZERO_PRICE_LOG",
    "log_price",
    "step_log_price",
    "expected_price_factor",
    "apply_impact",
]

ZERO_PRICE_LOG = -math.inf


@dataclass(frozen=True)
class MarketParams:
    """Constant-coefficient market: drift mu, volatility sigma, start state.

    mu_tilde = mu - sigma**2/2 must be positive: waiting must cost something,
    otherwise the seller would postpone forever and the horizon would not bind.
    """

    mu: float
    sigma: float
    s0: float
    phi0: float
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.s0 < 0:
            raise ValueError("s0 must be non-negative")
        if not self.phi0 > 0:
            raise ValueError("phi0 must be positive")
        if not 0 < self.horizon <= 1:
            raise ValueError("horizon must lie in (0, 1]")
        if not self.mu_tilde > 0:
            raise ValueError("mu - sigma**2/2 must be positive")

    @property
    def mu_tilde(self) -> float:
        return self.mu - 0.5 * self.sigma * self.sigma

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "s0": self.s0,
            "phi0": self.phi0,
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MarketParams":
        allowed = {"mu", "sigma", "s0", "phi0", "horizon"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown market fields: {sorted(unknown)}")
        missing = {"mu", "sigma", "s0", "phi0"} - set(data)
        if missing:
            raise ValueError(f"missing market fields: {sorted(missing)}")
        return cls(
            mu=float(data["mu"]),
            sigma=float(data["sigma"]),
            s0=float(data["s0"]),
            phi0=float(data["phi0"]),
            horizon=float(data.get("horizon", 1.0)),
        )


@dataclass(frozen=True)
class PathState:
    """Snapshot of one liquidation path: cash, remaining shares, log price."""

    time: float
    w: float
    phi: float
    x: float  # log price; ZERO_PRICE_LOG marks an absorbed zero price

    @property
    def price(self) -> float:
        return math.exp(self.x) if self.x > ZERO_PRICE_LOG else 0.0


def log_price(s: float) -> float:
    """Log of a price level, mapping s = 0 to the absorbing marker."""
    if s < 0:
        raise ValueError("price must be non-negative")
    return math.log(s) if s > 0 else ZERO_PRICE_LOG


def step_log_price(params: MarketParams, x: float, dt: float, z: float) -> float:
    """One exact transition of the unaffected log price over dt given a N(0,1) draw."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return x + params.sigma * math.sqrt(dt) * z - params.mu * dt


def expected_price_factor(params: MarketParams, dt: float) -> float:
    """Expected one-step multiplier of the price level, exp(-mu_tilde * dt)."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    return math.exp(-params.mu_tilde * dt)


def apply_impact(x: float, impact_amount: float) -> float:
    """Depress a log price by a non-negative impact displacement."""
    if impact_amount < 0:
        raise ValueError("impact_amount must be non-negative")
    return x - impact_amount
