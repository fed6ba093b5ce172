import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascadelab import synthetic
from cascadelab.errors import ConvergenceError
from cascadelab.graph import load_graph
from cascadelab.spectral import epidemic_threshold, largest_eigenvalue, power_iteration

from conftest import graph_from_pairs, random_digraph


def dense_radius(graph):
    return float(np.abs(np.linalg.eigvals(graph.adjacency().toarray())).max())


def test_three_cycle(cycle3):
    assert largest_eigenvalue(cycle3) == pytest.approx(1.0, abs=1e-8)
    assert epidemic_threshold(cycle3) == pytest.approx(1.0, abs=1e-8)


def test_complete_graph():
    g = graph_from_pairs([(i, j) for i in range(4) for j in range(4) if i != j])
    assert largest_eigenvalue(g) == pytest.approx(3.0, abs=1e-8)


def test_acyclic_graph_has_zero_radius():
    g = load_graph([("a", "b"), ("b", "c"), ("a", "c")])
    res = power_iteration(g)
    assert res.eigenvalue == 0.0 and res.threshold == float("inf")


def test_no_edges_rejected():
    with pytest.raises(ValueError):
        largest_eigenvalue(graph_from_pairs([], n=3))


def test_nonconvergence_carries_estimate():
    g = synthetic.power_law_graph(500, seed=0)
    with pytest.raises(ConvergenceError) as exc:
        power_iteration(g, max_iters=2)
    assert exc.value.estimate > 0 and exc.value.residual > 0


@pytest.mark.parametrize("seed", range(20))
def test_matches_dense_solver(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 51))
    g = random_digraph(n, float(rng.uniform(0.03, 0.3)), rng)
    if not g.edge_count:
        return
    assert largest_eigenvalue(g) == pytest.approx(dense_radius(g), abs=1e-6)


def test_reducible_graph_takes_dominant_block():
    # a 2-cycle feeding a 3-node complete block: radius comes from the block
    pairs = [(0, 1), (1, 0), (1, 2)] + [(i, j) for i in (2, 3, 4) for j in (2, 3, 4) if i != j]
    assert largest_eigenvalue(graph_from_pairs(pairs)) == pytest.approx(2.0, abs=1e-7)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_edge_addition_is_monotone(seed):
    rng = np.random.default_rng(seed)
    g = random_digraph(12, 0.15, rng)
    missing = [(i, j) for i in range(12) for j in range(12)
               if i != j and (i, j) not in g.edge_set()]
    extra = missing[int(rng.integers(len(missing)))]
    h = graph_from_pairs(sorted(g.edge_set()) + [extra], n=12)
    before = largest_eigenvalue(g) if g.edge_count else 0.0
    assert largest_eigenvalue(h) >= before - 1e-7


def test_residual_on_large_graph():
    g = synthetic.power_law_graph(10_000, seed=1, rewired=True)
    res = power_iteration(g)
    a = g.adjacency()
    v = res.vector
    assert np.linalg.norm(a @ v - res.eigenvalue * v) / np.linalg.norm(v) < 1e-7
