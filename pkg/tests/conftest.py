import numpy as np
import pytest

from measpec.model import potential_from_factors, potential_from_matrix
from measpec.oracle import example1_model, example2_model

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ex1():
    return example1_model()


@pytest.fixture(scope="session")
def ex2():
    return example2_model()


def random_models(count=20, seed=20240611):
    """Mixed factor/full-matrix models with m in {2, 3, 5}."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m = (2, 3, 5)[k % 3]
        if k % 2:
            out.append(potential_from_matrix(rng.normal(size=(m, m))))
        else:
            out.append(potential_from_factors(rng.normal(size=m), rng.normal(size=m)))
    return out


@pytest.fixture(scope="session")
def rand_models():
    return random_models()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
