"""Market-impact curves and their discrete per-step counterparts.

A sell rate ``zeta`` depresses the log price through a marginal impact curve
``h`` with running total ``g(zeta) = integral of h on [0, zeta]``.  In the
n-step model a block of ``psi`` shares sold at once moves the log price by
``g_n(psi)``; the discrete family is tied to the continuous curve by requiring
``d/dpsi g_n(psi) ~ h(n * psi)``, which makes per-share impact match across
resolutions as n grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ImpactKind",
    "ImpactSpec",
    "marginal_impact_gap",
    "mean_impact_gap",
]


class ImpactKind(str, Enum):
    LOG_LINEAR = "log_linear"
    LOG_QUADRATIC = "log_quadratic"
    CUSTOM = "custom"


# default discrete coefficient rules: constant alpha for the linear curve,
# n * alpha for the quadratic one
CoefficientRule = Callable[[int], float]


def _validate_table(table: Sequence[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(table, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("h_table must be a list of at least two [zeta, h] pairs")
    z, h = arr[:, 0], arr[:, 1]
    if z[0] != 0.0:
        raise ValueError("h_table must start at zeta = 0")
    if np.any(np.diff(z) <= 0):
        raise ValueError("h_table zeta knots must be strictly increasing")
    if np.any(h < 0) or np.any(np.diff(h) < 0):
        raise ValueError("h_table values must be non-negative and non-decreasing")
    return arr


@dataclass(frozen=True)
class ImpactSpec:
    """One impact model: marginal curve, running total, and block family.

    ``alpha_n`` selects the per-step coefficient for the built-in kinds:
    ``None`` uses the natural rule (``alpha`` for log-linear, ``n * alpha``
    for log-quadratic), a number fixes it, the string ``"n*alpha"`` forces
    the quadratic rule, and a callable receives n.  ``h_infinity`` is stored
    explicitly because downstream behaviour branches on whether the marginal
    curve saturates, and probing cannot distinguish slow divergence.
    """

    kind: ImpactKind
    alpha: float = 0.0
    alpha_n: float | str | CoefficientRule | None = None
    h_table: tuple[tuple[float, float], ...] | None = None
    h_infinity: float = math.inf
    _cum_table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind in (ImpactKind.LOG_LINEAR, ImpactKind.LOG_QUADRATIC):
            if not self.alpha > 0:
                raise ValueError("alpha must be positive")
            if self.h_table is not None:
                raise ValueError("h_table is only meaningful for the custom kind")
        else:
            if self.h_table is None:
                raise ValueError("custom impact requires h_table")
            arr = _validate_table(self.h_table)
            # exact running integral of the piecewise-linear marginal curve
            z, h = arr[:, 0], arr[:, 1]
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (h[1:] + h[:-1]) * np.diff(z))])
            object.__setattr__(self, "_cum_table", np.column_stack([z, h, cum]))
        if self.h_infinity < 0:
            raise ValueError("h_infinity must be non-negative")

    # ----------------------------------------------------------------- curves

    @classmethod
    def log_linear(cls, alpha: float, alpha_n: float | CoefficientRule | None = None) -> "ImpactSpec":
        """Constant marginal impact: h = alpha, g(zeta) = alpha * zeta."""
        return cls(kind=ImpactKind.LOG_LINEAR, alpha=alpha, alpha_n=alpha_n, h_infinity=alpha)

    @classmethod
    def log_quadratic(cls, alpha: float, alpha_n: float | str | CoefficientRule | None = None) -> "ImpactSpec":
        """Linear marginal impact: h = 2 * alpha * zeta, g(zeta) = alpha * zeta**2."""
        return cls(kind=ImpactKind.LOG_QUADRATIC, alpha=alpha, alpha_n=alpha_n, h_infinity=math.inf)

    @classmethod
    def custom(cls, h_table: Sequence[Sequence[float]], h_infinity: float) -> "ImpactSpec":
        """Tabulated marginal impact with linear interpolation between knots."""
        table = tuple((float(z), float(h)) for z, h in h_table)
        return cls(kind=ImpactKind.CUSTOM, h_table=table, h_infinity=float(h_infinity))

    def marginal(self, zeta):
        """Marginal impact h(zeta) of selling at rate zeta."""
        z = np.asarray(zeta, dtype=float)
        if np.any(z < 0):
            raise ValueError("zeta must be non-negative")
        if self.kind is ImpactKind.LOG_LINEAR:
            out = np.full_like(z, self.alpha)
        elif self.kind is ImpactKind.LOG_QUADRATIC:
            out = 2.0 * self.alpha * z
        else:
            knots = self._cum_table
            # constant extrapolation beyond the last knot
            out = np.interp(z, knots[:, 0], knots[:, 1])
        return float(out) if np.isscalar(zeta) else out

    def cumulative(self, zeta):
        """Running total g(zeta), the integral of the marginal curve.

        Exact for all three kinds; the tabulated curve integrates its linear
        interpolant in closed form (trapezoids plus a partial cell).
        """
        z = np.asarray(zeta, dtype=float)
        if np.any(z < 0):
            raise ValueError("zeta must be non-negative")
        if self.kind is ImpactKind.LOG_LINEAR:
            out = self.alpha * z
        elif self.kind is ImpactKind.LOG_QUADRATIC:
            out = self.alpha * z * z
        else:
            out = self._cumulative_table(z)
        return float(out) if np.isscalar(zeta) else out

    def _cumulative_table(self, z: np.ndarray) -> np.ndarray:
        knots = self._cum_table
        zk, hk, gk = knots[:, 0], knots[:, 1], knots[:, 2]
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        idx = np.clip(np.searchsorted(zk, zz, side="right") - 1, 0, len(zk) - 1)
        dz = zz - zk[idx]
        inside = idx < len(zk) - 1
        slope = np.zeros_like(zz)
        slope[inside] = (hk[idx[inside] + 1] - hk[idx[inside]]) / (zk[idx[inside] + 1] - zk[idx[inside]])
        out = gk[idx] + hk[idx] * dz + 0.5 * slope * dz * dz
        return out.reshape(np.shape(z))

    # ------------------------------------------------------------ block family

    def block_coefficient(self, n: int) -> float:
        """Per-step coefficient of the built-in block families at resolution n."""
        if self.kind is ImpactKind.CUSTOM:
            raise ValueError("custom impact has no block coefficient")
        rule = self.alpha_n
        if rule is None:
            return self.alpha * n if self.kind is ImpactKind.LOG_QUADRATIC else self.alpha
        if isinstance(rule, str):
            if rule != "n*alpha":
                raise ValueError(f"unknown alpha_n rule {rule!r}")
            return self.alpha * n
        if callable(rule):
            return float(rule(n))
        return float(rule)

    def block(self, n: int, psi):
        """Log-price displacement g_n(psi) of a block of psi shares at resolution n."""
        if n < 1:
            raise ValueError("n must be a positive integer")
        p = np.asarray(psi, dtype=float)
        if np.any(p < 0):
            raise ValueError("psi must be non-negative")
        if self.kind is ImpactKind.LOG_LINEAR:
            out = self.block_coefficient(n) * p
        elif self.kind is ImpactKind.LOG_QUADRATIC:
            out = self.block_coefficient(n) * p * p
        else:
            # natural rescaling of the continuous curve
            out = self._cumulative_table(n * p) / n
        return float(out) if np.isscalar(psi) else out

    def block_derivative(self, n: int, psi, step: float | None = None):
        """d/dpsi of the block displacement; central difference for custom curves."""
        p = np.asarray(psi, dtype=float)
        if self.kind is ImpactKind.LOG_LINEAR:
            out = np.full_like(p, self.block_coefficient(n))
        elif self.kind is ImpactKind.LOG_QUADRATIC:
            out = 2.0 * self.block_coefficient(n) * p
        else:
            dh = step if step is not None else 1e-6 * max(1.0, float(np.max(p, initial=0.0)))
            lo = np.maximum(p - dh, 0.0)
            out = (self.block(n, p + dh) - self.block(n, lo)) / (p + dh - lo)
        return float(out) if np.isscalar(psi) else out

    def block_search_cap(self, n: int) -> float | None:
        """Largest block worth considering in a one-step proceeds maximisation.

        Proceeds psi * exp(-g_n(psi)) peak where psi * g_n'(psi) = 1 for the
        built-in kinds and decrease beyond, so a value-iteration search can
        stop there; the tabulated kind gives no such guarantee.
        """
        if self.kind is ImpactKind.LOG_LINEAR:
            return 1.0 / self.block_coefficient(n)
        if self.kind is ImpactKind.LOG_QUADRATIC:
            return 1.0 / math.sqrt(2.0 * self.block_coefficient(n))
        return None

    def marginal_inverse(self, y: float, rel_tol: float = 1e-10) -> float:
        """Solve h(zeta) = y for zeta; requires a strictly increasing curve."""
        if y < self.marginal(0.0):
            raise ValueError("y below h(0)")
        if self.kind is ImpactKind.LOG_QUADRATIC:
            return y / (2.0 * self.alpha)
        if self.kind is ImpactKind.LOG_LINEAR:
            raise ValueError("constant marginal impact is not invertible")
        hi = 1.0
        while self.marginal(hi) < y:
            hi *= 2.0
            if hi > 1e300:
                raise ValueError("y exceeds the range of the marginal curve")
        lo = 0.0
        while hi - lo > rel_tol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if self.marginal(mid) < y:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # ------------------------------------------------------------ serialization

    def to_dict(self) -> dict:
        if callable(self.alpha_n):
            raise ValueError("a callable alpha_n rule cannot be serialized")
        out: dict = {"kind": self.kind.value}
        if self.kind is ImpactKind.CUSTOM:
            out["h_table"] = [[z, h] for z, h in self.h_table]
        else:
            out["alpha"] = self.alpha
            if self.alpha_n is not None:
                out["alpha_n"] = self.alpha_n
        out["h_infinity"] = "inf" if math.isinf(self.h_infinity) else self.h_infinity
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ImpactSpec":
        allowed = {"kind", "alpha", "alpha_n", "h_table", "h_infinity"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown impact fields: {sorted(unknown)}")
        kind = ImpactKind(data["kind"])
        h_inf = data.get("h_infinity")
        if h_inf == "inf":
            h_inf = math.inf
        if kind is ImpactKind.CUSTOM:
            if h_inf is None:
                raise ValueError("custom impact requires h_infinity")
            return cls.custom(data["h_table"], h_inf)
        alpha = data.get("alpha")
        if alpha is None:
            raise ValueError(f"{kind.value} impact requires alpha")
        spec = cls(
            kind=kind,
            alpha=float(alpha),
            alpha_n=data.get("alpha_n"),
            h_infinity=math.inf if kind is ImpactKind.LOG_QUADRATIC else float(alpha),
        )
        if h_inf is not None and not math.isclose(spec.h_infinity, h_inf) and not (
            math.isinf(spec.h_infinity) and math.isinf(h_inf)
        ):
            raise ValueError("h_infinity inconsistent with kind")
        return spec


def marginal_impact_gap(spec: ImpactSpec, n: int, grid) -> float:
    """Worst mismatch between the block derivative and the rescaled marginal curve.

    Returns ``max over psi in grid of |d/dpsi g_n(psi) - h(n psi)|``; the
    discrete family is considered consistent when this tends to zero in n.
    """
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ValueError("grid must be non-empty")
    step = 1e-6 * float(np.max(g)) if np.max(g) > 0 else 1e-6
    gap = np.abs(spec.block_derivative(n, g, step=step) - spec.marginal(n * g))
    return float(np.max(gap))


def mean_impact_gap(spec: ImpactSpec, n: int, grid) -> float:
    """Worst per-share impact mismatch ``max |g_n(psi)/psi - g(n psi)/(n psi)|``."""
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(g == 0):
        raise ValueError("grid must exclude psi = 0")
    gap = np.abs(spec.block(n, g) / g - spec.cumulative(n * g) / (n * g))
    return float(np.max(gap))
