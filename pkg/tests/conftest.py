import pytest

from tbctl.equilibrium import endemic_equilibrium
from tbctl.model import Parameters
from tbctl.optctl import STRATEGIES, FbsSettings, solve_fbs

# Rounded endemic equilibrium for beta = 100, sigma_r = sigma.
TABLE2 = (4554.0, 72.0, 24.0, 23950.0, 1400.0)

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def baseline_params():
    return Parameters(beta=100.0)


@pytest.fixture(scope="session")
def baseline_eq(baseline_params):
    return endemic_equilibrium(baseline_params)


@pytest.fixture(scope="session")
def solutions(baseline_params, baseline_eq):
    """Converged runs of strategies a, b and c at the baseline scenario."""
    return {
        name: solve_fbs(baseline_params, baseline_eq.state, mask, FbsSettings())
        for name, mask in STRATEGIES.items()
    }


@pytest.fixture(scope="session")
def baseline_solution(solutions):
    return solutions["a"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def beta_scan():
    """beta = 50..300 step 10, sigma_r = sigma, strategy a; returns (results, seconds)."""
    import time

    from tbctl.scenarios import sweep_beta

    t0 = time.perf_counter()
    results = sweep_beta(range(50, 301, 10), "sigma", "a", workers=8)
    return results, time.perf_counter() - t0


@pytest.fixture(scope="session")
def tf_scan():
    from tbctl.scenarios import ScenarioSpec, sweep_tf

    return sweep_tf([5, 7, 10, 15, 20, 25], ScenarioSpec(Parameters(beta=100.0)), workers=8)


@pytest.fixture(scope="session")
def weight_scan():
    from tbctl.scenarios import ScenarioSpec, sweep_weights

    w_sets = [(50, w, w) for w in (5, 25, 50, 100, 200, 500)]
    return sweep_weights(w_sets, ScenarioSpec(Parameters(beta=100.0)), workers=8)
