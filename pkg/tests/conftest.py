import pytest
from hypothesis import settings

import optexec as ox

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


# --------------------------------------------------------------------------
# shared market / impact setups (the numerical-study parameters)

ALPHA = 0.01
MU_TILDE = 0.05


def market(phi0: float, sigma: float = 0.0, mu_tilde: float = MU_TILDE, s0: float = 1.0) -> ox.MarketParams:
    return ox.MarketParams(mu=mu_tilde + 0.5 * sigma * sigma, sigma=sigma, s0=s0, phi0=phi0)


@pytest.fixture(scope="session")
def quad_spec() -> ox.ImpactSpec:
    return ox.ImpactSpec.log_quadratic(ALPHA)


@pytest.fixture(scope="session")
def lin_spec() -> ox.ImpactSpec:
    return ox.ImpactSpec.log_linear(ALPHA)


FAST_SEARCH = ox.PsiSearch(scan_points=256, golden_iters=40)

# identical per-lane candidate sets on both sides of a solver comparison, so
# exact-arithmetic inequalities between solves survive float rounding
MATCHED_SEARCH = ox.PsiSearch(scan_points=2000, golden_iters=0, use_cap=False, warm_start=False)


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # compile the layer kernel once so solve timings exclude JIT cost
    ox.solve_backward(market(1.0), ox.ImpactSpec.log_quadratic(ALPHA), n=2, phi_grid=8,
                      psi_search=ox.PsiSearch(scan_points=8, golden_iters=4))
    ox.solve_backward_sellout(market(1.0), ox.ImpactSpec.log_quadratic(ALPHA), n=2, phi_grid=8,
                              psi_search=ox.PsiSearch(scan_points=8, golden_iters=4))


@pytest.fixture(scope="session")
def dp_cache(quad_spec, lin_spec):
    """Memoised heavy solves shared between module tests and the acceptance suite."""
    store: dict = {}

    def solve(kind: str, phi0: float, n: int, sellout: bool = False, phi_grid: int = 2000,
              search: ox.PsiSearch = ox.PsiSearch()):
        key = (kind, phi0, n, sellout, phi_grid, search)
        if key not in store:
            spec = quad_spec if kind == "quad" else lin_spec
            solver = ox.solve_backward_sellout if sellout else ox.solve_backward
            store[key] = solver(market(phi0), spec, n=n, phi_grid=phi_grid, psi_search=search)
        return store[key]

    return solve


# --------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion

_acceptance_lines: list[str] = []


def record_acceptance(number: int, name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    _acceptance_lines.append(f"ACCEPTANCE {number:2d} {name}: {status}{suffix}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
