import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdicts where capture cannot swallow them."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import fiberqed as fq

LAMBDA = 1.0e-6
A_STAR = 800e-9
H_STAR = 100e-9
R_STAR = 0.22e-6


@pytest.fixture(scope="session")
def fiber():
    return fq.FiberSpec.make(R_STAR, LAMBDA)


@pytest.fixture(scope="session")
def gm(fiber):
    return fq.solve_he11(fiber)


@pytest.fixture(scope="session")
def chain15():
    return fq.ChainSpec(n_atoms=15, a=A_STAR, h=H_STAR, lambda_a=LAMBDA)


@pytest.fixture(scope="session")
def cm15(chain15, fiber):
    return fq.assemble(chain15, fiber)


@pytest.fixture(scope="session")
def chain1():
    return fq.ChainSpec(n_atoms=1, a=LAMBDA, h=H_STAR, lambda_a=LAMBDA)


@pytest.fixture(scope="session")
def cm1(chain1, fiber):
    return fq.assemble(chain1, fiber)


@pytest.fixture(scope="session")
def sa(chain1, fiber):
    return fq.single_atom(chain1, fiber)


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
