"""Piecewise-constant sell-rate schedules on [0, t]."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["ExecutionStrategy"]


@dataclass(frozen=True)
class ExecutionStrategy:
    """A deterministic schedule: rate ``rates[i]`` on ``[times[i], times[i+1])``.

    ``times`` has one more entry than ``rates``, starts at 0 and is strictly
    increasing; rates are non-negative.  The total sold is the exact integral
    of the rate path.
    """

    times: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.rates) + 1:
            raise ValueError("times must have exactly one more entry than rates")
        if len(self.rates) == 0:
            raise ValueError("strategy needs at least one piece")
        if self.times[0] != 0.0:
            raise ValueError("schedule must start at time 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be non-negative")

    @classmethod
    def zero(cls, t: float) -> "ExecutionStrategy":
        return cls(times=(0.0, float(t)), rates=(0.0,))

    @classmethod
    def from_arrays(cls, times: Sequence[float], rates: Sequence[float]) -> "ExecutionStrategy":
        return cls(times=tuple(float(t) for t in times), rates=tuple(float(r) for r in rates))

    @property
    def end(self) -> float:
        return self.times[-1]

    @property
    def total(self) -> float:
        return float(sum(r * (b - a) for r, a, b in zip(self.rates, self.times, self.times[1:])))

    def rate_at(self, r: float) -> float:
        """Rate in force at time r (right-continuous, zero outside [0, end))."""
        if r < 0 or r >= self.end:
            return 0.0
        idx = int(np.searchsorted(self.times, r, side="right")) - 1
        return self.rates[min(idx, len(self.rates) - 1)]

    def sold_by(self, r: float) -> float:
        """Exact cumulative amount sold on [0, r]."""
        total = 0.0
        for rate, a, b in zip(self.rates, self.times, self.times[1:]):
            if r <= a:
                break
            total += rate * (min(r, b) - a)
        return total

    def blocks(self, n: int) -> np.ndarray:
        """Exact per-interval integrals over the n-step grid l/n, l = 0..n.

        This is the natural discretisation of a rate path into n block sales;
        the schedule must end by time 1 for the blocks to capture it fully.
        """
        if n < 1:
            raise ValueError("n must be a positive integer")
        edges = np.arange(n + 1) / n
        return np.array([self.sold_by(b) - self.sold_by(a) for a, b in zip(edges[:-1], edges[1:])])

    def write_csv(self, path: str | Path, phi_start: float) -> None:
        """Rows ``r,zeta,phi_remaining`` at piece starts plus the terminal time."""
        lines = ["r,zeta,phi_remaining"]
        for rate, a in zip(self.rates, self.times):
            lines.append(f"{float(a)!r},{float(rate)!r},{float(phi_start - self.sold_by(a))!r}")
        lines.append(f"{float(self.end)!r},0.0,{float(phi_start - self.total)!r}")
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")
