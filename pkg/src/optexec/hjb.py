"""Pointwise residual checks of the dynamic-programming PDE.

The value function solves (in the viscosity sense) ``v_t - sup over zeta >= 0
of L^zeta v = 0`` where the generator collects diffusion, drift, trading gain
``zeta (s v_w - v_phi)`` and the impact drag ``-g(zeta) s v_s``.  This module
evaluates the Hamiltonian and its maximiser at explicit jets, and a reduced
one-dimensional residual for cash-linear values ``v = w + s f(t, phi)`` under
quadratic running impact:

    R = f_t + mu_tilde f - (1 - f_phi)^2 / (4 alpha f)   while f_phi < 1,
    R = f_t + mu_tilde f                                  otherwise.

Residuals are computed with central finite differences (one-sided second
order at domain edges), so closed-form solutions should show |R| = O(step^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dp import INFEASIBLE, ValueGrid
from .impact import ImpactKind, ImpactSpec

__all__ = [
    "JetPoint",
    "optimal_rate",
    "hamiltonian",
    "reduced_hjb_residual",
    "GridSurface",
]


@dataclass(frozen=True)
class JetPoint:
    """A second-order jet (point, gradient, curvature) of a candidate value.

    ``z = (w, phi, s)`` with s > 0 for interior evaluation, ``p`` the gradient
    in the same order, and ``x_ss`` the only second derivative the Hamiltonian
    reads.  A full symmetric Hessian may be attached; its (s, s) entry then
    overrides ``x_ss``.  The constant-coefficient diffusion enters through
    ``sigma`` and ``mu_tilde``.
    """

    z: tuple[float, float, float]
    p: tuple[float, float, float]
    mu_tilde: float
    sigma: float = 0.0
    x_ss: float = 0.0
    hess: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.z[2] <= 0:
            raise ValueError("interior evaluation requires s > 0")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.hess is not None:
            h = np.asarray(self.hess, dtype=float)
            if h.shape != (3, 3) or not np.allclose(h, h.T):
                raise ValueError("hess must be a symmetric 3x3 matrix")
            object.__setattr__(self, "x_ss", float(h[2, 2]))

    @property
    def trade_margin(self) -> float:
        """Marginal gain of selling: s * v_w - v_phi."""
        return self.z[2] * self.p[0] - self.p[1]

    @property
    def drag_weight(self) -> float:
        """Weight of the impact drag: s * v_s."""
        return self.z[2] * self.p[2]


def _require_invertible(spec: ImpactSpec) -> None:
    if spec.kind is ImpactKind.LOG_LINEAR or not math.isinf(spec.h_infinity):
        raise ValueError("the maximiser formula needs a strictly increasing, unbounded marginal curve")


def optimal_rate(point: JetPoint, spec: ImpactSpec) -> float:
    """Maximising sell rate of the Hamiltonian's control term.

    Zero when selling is marginally unprofitable; infinite (returned as
    ``math.inf``) when the drag weight vanishes while the margin is positive,
    which is outside the domain where the Hamiltonian is finite.
    """
    _require_invertible(spec)
    if point.p[2] < 0:
        raise ValueError("p_s must be non-negative: values are non-decreasing in s")
    margin = point.trade_margin
    drag = point.drag_weight
    if drag == 0.0:
        return 0.0 if margin <= 0.0 else math.inf
    if margin <= 0.0:
        return 0.0
    h0 = spec.marginal(0.0)
    return spec.marginal_inverse(max(margin / drag, h0))


def _control_term(point: JetPoint, spec: ImpactSpec, zeta_cap: float | None) -> float:
    """sup over admissible zeta of ``zeta * margin - g(zeta) * drag`` (>= 0 via zeta = 0)."""
    margin = point.trade_margin
    drag = point.drag_weight
    if zeta_cap is None:
        zeta = optimal_rate(point, spec)
        if math.isinf(zeta):
            return math.inf
    else:
        if zeta_cap < 0:
            raise ValueError("zeta_cap must be non-negative")
        if point.p[2] < 0:
            raise ValueError("p_s must be non-negative: values are non-decreasing in s")
        # concave in zeta, so clamp the unconstrained maximiser into [0, cap]
        if drag == 0.0:
            zeta = zeta_cap if margin > 0.0 else 0.0
        elif spec.kind is ImpactKind.LOG_LINEAR:
            zeta = zeta_cap if margin - spec.alpha * drag > 0.0 else 0.0
        else:
            h0 = spec.marginal(0.0)
            zeta = 0.0 if margin <= 0.0 else min(spec.marginal_inverse(max(margin / drag, h0)), zeta_cap)
    return max(zeta * margin - spec.cumulative(zeta) * drag, 0.0)


def hamiltonian(point: JetPoint, spec: ImpactSpec, zeta_cap: float | None = None) -> float:
    """The (negated-supremum) Hamiltonian at a jet; -inf where no finite maximiser exists.

    ``zeta_cap`` restricts the control to [0, cap]; the capped values decrease
    monotonically to the uncapped one as the cap grows.
    """
    s = point.z[2]
    sigma_hat = s * point.sigma
    drift_hat = -s * point.mu_tilde
    base = 0.5 * sigma_hat * sigma_hat * point.x_ss + drift_hat * point.p[2]
    control = _control_term(point, spec, zeta_cap)
    if math.isinf(control):
        return -math.inf
    return -(base + control)


def _derivative(f, x: float, step: float, lo: float | None, hi: float | None) -> float:
    """Central difference, falling back to one-sided second order at edges."""
    can_up = hi is None or x + step <= hi + 1e-15
    can_dn = lo is None or x - step >= lo - 1e-15
    if can_up and can_dn:
        return (f(x + step) - f(x - step)) / (2.0 * step)
    if can_dn:
        return (3.0 * f(x) - 4.0 * f(x - step) + f(x - 2.0 * step)) / (2.0 * step)
    if can_up:
        return (-3.0 * f(x) + 4.0 * f(x + step) - f(x + 2.0 * step)) / (2.0 * step)
    raise ValueError("step too large for the callable's domain")


def reduced_hjb_residual(
    f,
    t: float,
    phi: float,
    alpha: float,
    mu_tilde: float,
    dt: float = 1e-4,
    dphi: float = 1e-4,
    t_bounds: tuple[float, float] | None = None,
    phi_bounds: tuple[float, float] | None = None,
) -> float:
    """PDE residual of a reduced surface f(t, phi) under quadratic impact.

    ``f`` is any callable; pass ``t_bounds``/``phi_bounds`` when it is only
    defined on a box (finite differences then switch to one-sided stencils at
    the edges).  Requires f > 0 at the evaluation point.
    """
    if alpha <= 0 or mu_tilde <= 0:
        raise ValueError("alpha and mu_tilde must be positive")
    f0 = f(t, phi)
    if not f0 > 0:
        raise ValueError("residual is defined only where f > 0")
    t_lo, t_hi = t_bounds if t_bounds is not None else (None, None)
    p_lo, p_hi = phi_bounds if phi_bounds is not None else (None, None)
    f_t = _derivative(lambda x: f(x, phi), t, dt, t_lo, t_hi)
    f_phi = _derivative(lambda y: f(t, y), phi, dphi, p_lo, p_hi)
    residual = f_t + mu_tilde * f0
    if f_phi < 1.0:
        residual -= (1.0 - f_phi) ** 2 / (4.0 * alpha * f0)
    return residual


class GridSurface:
    """Adapter exposing a solved ValueGrid as a callable f(t, phi).

    Linear in t between layers and linear in phi within a layer, matching the
    solver's own interpolation.  Not defined across the sell-out sentinel.
    """

    def __init__(self, grid: ValueGrid):
        self._grid = grid
        self.t_max = grid.k_max / grid.n
        self.phi_max = grid.phi0

    @property
    def bounds(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (0.0, self.t_max), (0.0, self.phi_max)

    def __call__(self, t: float, phi: float) -> float:
        if not 0 <= t <= self.t_max * (1 + 1e-12):
            raise ValueError(f"t {t} outside [0, {self.t_max}]")
        k_real = min(t, self.t_max) * self._grid.n
        k0 = min(int(math.floor(k_real)), self._grid.k_max - 1) if self._grid.k_max > 0 else 0
        frac = k_real - k0
        lo = self._grid.interp_value(k0, phi)
        if self._grid.k_max == 0 or frac == 0.0:
            return lo
        hi = self._grid.interp_value(k0 + 1, phi)
        if lo == INFEASIBLE or hi == INFEASIBLE:
            return INFEASIBLE
        return lo + frac * (hi - lo)
