"""Optimal execution under convex market impact.

Backward-induction value functions for an n-step liquidation, their
continuous-horizon closed-form benchmarks, pointwise PDE residual checks,
and Monte Carlo playout of execution schedules.
"""

__version__ = "0.1.0"

from .closed_form import (
    Region,
    RegionLabel,
    classify_region,
    horizon_limited_rate,
    instant_liquidation_value,
    linear_impact_value,
    proceeds_functional,
    quadratic_impact_strategy,
    quadratic_impact_value,
    steady_rate,
)
from .dp import INFEASIBLE, PsiSearch, ValueGrid, playout, solve_backward, solve_backward_sellout, value_at
from .hjb import GridSurface, JetPoint, hamiltonian, optimal_rate, reduced_hjb_residual
from .impact import ImpactKind, ImpactSpec, marginal_impact_gap, mean_impact_gap
from .market import MarketParams, PathState, apply_impact, expected_price_factor, log_price, step_log_price
from .mc import (
    ConvergenceRow,
    ExecutionOutcome,
    SimConfig,
    TabulatedUtility,
    convergence_table,
    estimate_value,
    run_continuous,
    run_discrete,
)
from .strategy import ExecutionStrategy

__all__ = [
    "__version__",
    "ImpactKind",
    "ImpactSpec",
    "marginal_impact_gap",
    "mean_impact_gap",
    "MarketParams",
    "PathState",
    "log_price",
    "step_log_price",
    "expected_price_factor",
    "apply_impact",
    "ExecutionStrategy",
    "PsiSearch",
    "ValueGrid",
    "INFEASIBLE",
    "solve_backward",
    "solve_backward_sellout",
    "value_at",
    "playout",
    "Region",
    "RegionLabel",
    "classify_region",
    "instant_liquidation_value",
    "linear_impact_value",
    "quadratic_impact_value",
    "quadratic_impact_strategy",
    "steady_rate",
    "horizon_limited_rate",
    "proceeds_functional",
    "JetPoint",
    "optimal_rate",
    "hamiltonian",
    "reduced_hjb_residual",
    "GridSurface",
    "SimConfig",
    "TabulatedUtility",
    "ExecutionOutcome",
    "run_discrete",
    "run_continuous",
    "estimate_value",
    "ConvergenceRow",
    "convergence_table",
]
