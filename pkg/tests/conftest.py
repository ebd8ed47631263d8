import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from blocknet import Graph  # noqa: E402

ACCEPTANCE_RESULTS = []


def random_graph(rng, n, p):
    a = np.triu(rng.random((n, n)) < p, 1)
    return Graph.from_dense((a | a.T).astype(np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return Graph.from_edge_list([(0, 1), (1, 2), (0, 2)], 3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
