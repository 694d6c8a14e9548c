import numpy as np
import pytest

from regime_vi import canonical_params, make_grid, solve_penalized, solve_vi

# small grid for unit tests; the acceptance suite builds its own desk-scale solves
SMALL_NP, SMALL_NT = 101, 400


@pytest.fixture(scope="session")
def params():
    return canonical_params()


@pytest.fixture(scope="session")
def small_grid(params):
    return make_grid(params, SMALL_NP, SMALL_NT)


@pytest.fixture(scope="session")
def small_vi(params, small_grid):
    return solve_vi(params, small_grid)


@pytest.fixture(scope="session")
def small_penalty(params, small_grid):
    return solve_penalized(params, small_grid, 1e-4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
