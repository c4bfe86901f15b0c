import numpy as np
import pytest

from bandit_routing import build_network, grid_network

# filled by test_acceptance.report
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)


def diamond_net():
    # links: s->a, s->b, a->t, b->t
    return build_network(4, [(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3)


def parallel_net(d):
    return build_network(2, [(0, 1)] * d, 0, 1)


def single_edge_net():
    return build_network(2, [(0, 1)], 0, 1)


def chain_net():
    # one path of three links
    return build_network(4, [(0, 1), (1, 2), (2, 3)], 0, 3)


@pytest.fixture
def diamond():
    return diamond_net()


@pytest.fixture(scope="session")
def grid2():
    return grid_network(2)


@pytest.fixture(scope="session")
def grid4():
    return grid_network(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
