import numpy as np
import pytest

from cascadelab.graph import DirectedGraph, load_graph


def graph_from_pairs(pairs, n=None):
    pairs = list(pairs)
    if n is None:
        n = 1 + max(max(p) for p in pairs) if pairs else 0
    src = [a for a, _ in pairs]
    dst = [b for _, b in pairs]
    return DirectedGraph.from_arrays(n, src, dst)


def random_digraph(n, p, rng):
    m = rng.random((n, n)) < p
    np.fill_diagonal(m, False)
    src, dst = np.nonzero(m)
    return DirectedGraph.from_arrays(n, src, dst)


@pytest.fixture
def cycle3():
    return load_graph([("a", "b"), ("b", "c"), ("c", "a")])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
