import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blbvs.core import BINOMIAL, GAUSSIAN, GroupedDataset, GroupStructure

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def make_problem(seed, n=120, sizes=(2, 3, 1), family=GAUSSIAN, signal=1.0):
    rng = np.random.default_rng(seed)
    gs = GroupStructure.from_sizes(sizes)
    x = rng.standard_normal((n, gs.n_features))
    beta = signal * rng.standard_normal(gs.n_features)
    eta = 0.3 + x @ beta
    if family == BINOMIAL:
        y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    else:
        y = eta + rng.standard_normal(n)
    return GroupedDataset(x, y, gs, family)


@pytest.fixture
def gaussian_data():
    return make_problem(0)


@pytest.fixture
def binomial_data():
    return make_problem(1, n=200, family=BINOMIAL)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
