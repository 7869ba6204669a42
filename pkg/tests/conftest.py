import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kronsync.graph_core import PowerGraph
from kronsync.io_ingest import load_case30

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def random_connected_graph(rng, n, k=None, extra=None, wlo=0.5, whi=5.0):
    """Random spanning tree plus extra edges, with k random generators."""
    edges = []
    order = rng.permutation(n)
    for pos in range(1, n):
        edges.append((int(order[pos]), int(order[rng.integers(pos)]), float(rng.uniform(wlo, whi))))
    extra = rng.integers(0, n) if extra is None else extra
    for _ in range(extra):
        i, j = rng.choice(n, 2, replace=False)
        edges.append((int(i), int(j), float(rng.uniform(wlo, whi))))
    k = int(rng.integers(1, n)) if k is None else k
    gens = tuple(int(v) for v in rng.choice(n, k, replace=False))
    return PowerGraph(n, tuple(edges), gens)


@st.composite
def graphs(draw, min_n=3, max_n=10, min_k=1):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(min_n, max_n))
    k = draw(st.integers(min_k, n - 1))
    return random_connected_graph(np.random.default_rng(seed), n, k)


@pytest.fixture
def path_graph():
    """Nodes 0-1-2 with weights 2 and 5; generators 0 and 1."""
    return PowerGraph(3, ((0, 1, 2.0), (1, 2, 5.0)), (0, 1))


@pytest.fixture(scope="session")
def case30():
    return load_case30()
