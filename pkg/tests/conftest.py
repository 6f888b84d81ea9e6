import numpy as np
import pytest

from cersim.green import build_green_table
from cersim.intensity import analytic_response, output_correlations
from cersim.kernels import KernelContext
from cersim.params import Grid, PhysicalParams, Stage, stage_rates
from cersim.scenario import run_two_stage_analytic


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def small_grid():
    return Grid(32, 32, 2.0)


@pytest.fixture(scope="session")
def rates1(params):
    return stage_rates(params, Stage.SRS)


@pytest.fixture(scope="session")
def rates2(params):
    return stage_rates(params, Stage.CERS)


@pytest.fixture(scope="session")
def ctx1_small(rates1, small_grid):
    return KernelContext.build(rates1, small_grid)


@pytest.fixture(scope="session")
def table1_small(ctx1_small):
    return analytic_response(ctx1_small, full=True)


@pytest.fixture(scope="session")
def state1_small(table1_small):
    return output_correlations(table1_small)


@pytest.fixture(scope="session")
def green1_small(rates1, small_grid):
    return build_green_table(rates1, small_grid, full=True)


@pytest.fixture(scope="session")
def two_stage_64(params):
    return run_two_stage_analytic(params, Grid(64, 64, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}")
