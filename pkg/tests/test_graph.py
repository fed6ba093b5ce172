import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascadelab import io
from cascadelab.errors import ParseError
from cascadelab.graph import DirectedGraph, VoteLog, load_graph, load_votes
from cascadelab.stats import (clustering_coefficient, degree_histogram, exposure_stats,
                              fit_log_normal, fit_power_law, DegreeHistogram)

edge_lists = st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=60)


def _records(pairs):
    return [(f"n{a}", f"n{b}") for a, b in pairs]


def test_load_graph_small():
    g = load_graph([("a", "b"), ("b", "c")])
    assert g.node_count == 3 and g.edge_count == 2
    assert g.ids == ("a", "b", "c")
    assert list(g.fans(0)) == [1] and list(g.friends(2)) == [1]


def test_self_loop_dropped_and_counted():
    g = load_graph([("a", "a")])
    assert g.node_count == 1 and g.edge_count == 0
    assert g.notes["self_loops_dropped"] == 1


def test_duplicates_dropped():
    g = load_graph([("a", "b"), ("a", "b"), ("b", "a")])
    assert g.edge_count == 2 and g.notes["duplicates_dropped"] == 1


def test_load_graph_errors():
    with pytest.raises(ParseError, match="no edge records"):
        load_graph([])
    with pytest.raises(ParseError) as exc:
        load_graph([("a", "b"), ("c",)], first_line=5)
    assert exc.value.line == 6
    with pytest.raises(ParseError):
        load_graph([("a", "")])


@given(edge_lists)
def test_graph_invariants(pairs):
    if not pairs:
        return
    g = load_graph(_records(pairs))
    expected = {(f"n{a}", f"n{b}") for a, b in pairs if a != b}
    got = {(g.ids[u], g.ids[v]) for u, v in g.edge_set()}
    assert got == expected
    assert g.out_degree().sum() == g.in_degree().sum() == g.edge_count
    for u in range(g.node_count):
        for v in g.fans(u):
            assert u in g.friends(v)
    assert sum(degree_histogram(g, "out").counts.values()) == g.node_count
    assert 0.0 <= clustering_coefficient(g) <= 1.0


@given(edge_lists)
@settings(max_examples=30, deadline=None)
def test_edge_list_round_trip(tmp_path_factory, pairs):
    if not pairs:
        return
    g = load_graph(_records(pairs))
    if not g.edge_count:
        return
    path = tmp_path_factory.mktemp("rt") / "g.edges"
    io.write_edge_list(g, path)
    back = io.read_graph(path)
    names = lambda h: {(h.ids[u], h.ids[v]) for u, v in h.edge_set()}
    assert names(back) == names(g)


def test_npz_round_trip(tmp_path):
    g = load_graph([("x", "y"), ("y", "z"), ("z", "x"), ("x", "x")])
    io.save_graph(g, tmp_path / "g.npz")
    back = io.read_graph(tmp_path / "g.npz")
    assert back.ids == g.ids and back.edge_set() == g.edge_set()
    assert back.notes["self_loops_dropped"] == 1


def test_digg_friends_file(tmp_path):
    path = tmp_path / "friends.csv"
    path.write_text("mutual,friend_date,user_id,friend_id\n"
                    "0,1,u1,f1\n1,2,u2,f1\n")
    g = io.read_graph(path)
    names = {(g.ids[a], g.ids[b]) for a, b in g.edge_set()}
    # user_id is a fan of friend_id: information flows friend -> user
    assert names == {("f1", "u1"), ("f1", "u2"), ("u2", "f1")}


def test_digg_friends_bad_mutual(tmp_path):
    path = tmp_path / "friends.csv"
    path.write_text("mutual,friend_date,user_id,friend_id\n0,1,u1,f1\n7,1,u2,f1\n")
    with pytest.raises(ParseError) as exc:
        io.read_graph(path)
    assert exc.value.line == 3


def test_edge_list_bad_line(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# comment\na b\nc d e\n")
    with pytest.raises(ParseError) as exc:
        io.read_graph(path)
    assert exc.value.line == 3


def test_load_votes_sorts_and_dedups():
    logs = load_votes([(10, "a", "s"), (5, "b", "s")])
    assert logs["s"].votes == (("b", 5.0), ("a", 10.0))
    assert logs["s"].submitter == "b"
    logs = load_votes([(5, "a", "s"), (6, "a", "s")])
    assert logs["s"].votes == (("a", 5.0),)


def test_load_votes_explicit_submitter_first():
    logs = load_votes([(1, "a", "s"), (3, "sub", "s")], submitters={"s": "sub"})
    assert logs["s"].voters[0] == "sub"
    times = [t for _, t in logs["s"].votes]
    assert times == sorted(times)


def test_load_votes_parse_error():
    with pytest.raises(ParseError) as exc:
        load_votes([(1, "a", "s"), ("x", "b", "s")], first_line=2)
    assert exc.value.line == 3


def test_votes_file_round_trip(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text("vote_date,voter_id,story_id\n3,a,s1\n1,b,s1\n2,c,s2\n")
    logs = io.read_votes(path)
    io.write_votes(logs.values(), tmp_path / "out.csv")
    assert io.read_votes(tmp_path / "out.csv") == logs


def test_degree_histogram_examples():
    cycle = load_graph([("a", "b"), ("b", "c"), ("c", "a")])
    assert degree_histogram(cycle, "out").counts == {1: 3}
    star = load_graph([("c", "x"), ("c", "y"), ("c", "z")])
    assert degree_histogram(star, "out").counts == {0: 3, 3: 1}
    assert degree_histogram(star, "in").counts == {0: 1, 1: 3}


def test_clustering_examples():
    tri = load_graph([("a", "b"), ("b", "c"), ("c", "a")])
    assert clustering_coefficient(tri) == pytest.approx(1.0)
    path = load_graph([("a", "b"), ("b", "c")])
    assert clustering_coefficient(path) == 0.0


def _clustering_oracle(g):
    nbrs = [set() for _ in range(g.node_count)]
    for u, v in g.edge_set():
        nbrs[u].add(v)
        nbrs[v].add(u)
    total = 0.0
    for u, ns in enumerate(nbrs):
        k = len(ns)
        if k < 2:
            continue
        links = sum(1 for a in ns for b in ns if a < b and b in nbrs[a])
        total += links / (k * (k - 1) / 2)
    return total / g.node_count


@given(edge_lists)
@settings(max_examples=60)
def test_clustering_matches_pairwise_count(pairs):
    if not pairs:
        return
    g = load_graph(_records(pairs))
    assert clustering_coefficient(g) == pytest.approx(_clustering_oracle(g), abs=1e-12)


def test_clustering_empty_graph():
    g = DirectedGraph.from_arrays(0, [], [])
    with pytest.raises(ValueError):
        clustering_coefficient(g)


def test_exposure_chain():
    g = load_graph([("x", "y")])
    log = VoteLog("s", (("x", 1.0), ("y", 2.0)), "x")
    st_ = exposure_stats(g, log)
    assert st_.vote_table() == {1: (1, 0)}


def test_exposure_shared_fan():
    g = load_graph([("u", "z"), ("v", "z")])
    log = VoteLog("s", (("u", 1.0), ("v", 2.0)), "u")
    st_ = exposure_stats(g, log)
    assert st_.vote_table() == {2: (0, 1)}
    assert st_.fraction_at_least(2) == 1.0


def test_exposure_counts_only_earlier_friends():
    # b votes before its friend a: b is not exposed by a
    g = load_graph([("a", "b"), ("b", "a")])
    log = VoteLog("s", (("b", 1.0), ("a", 2.0)), "b")
    st_ = exposure_stats(g, log)
    assert st_.vote_table() == {1: (1, 0)}
    assert exposure_stats(g, log, count="total").vote_table() == {1: (2, 0)}


def test_exposure_skips_unknown_voters_and_rejects_empty():
    g = load_graph([("a", "b")])
    st_ = exposure_stats(g, VoteLog("s", (("a", 1.0), ("ghost", 2.0)), "a"))
    assert st_.skipped_voters == 1
    with pytest.raises(ValueError):
        exposure_stats(g, VoteLog("s", (), None))


@given(edge_lists, st.data())
@settings(max_examples=60)
def test_exposure_conservation(pairs, data):
    if not pairs:
        return
    g = load_graph(_records(pairs))
    voters = data.draw(st.lists(st.sampled_from(g.ids), min_size=1, unique=True))
    log = VoteLog("s", tuple((v, float(i)) for i, v in enumerate(voters)), voters[0])
    st_ = exposure_stats(g, log)
    exposed = set()
    pos = {v: i for i, v in enumerate(voters)}
    for u, f in g.edge_set():
        a, b = g.ids[u], g.ids[f]
        if a in pos and (b not in pos or pos[a] < pos[b]):
            exposed.add(b)
    assert st_.exposed == len(exposed)
    assert sum(st_.multiplicity.values()) == len(exposed)


def _sample_power_law(gamma, k_max, size, rng):
    k = np.arange(1, k_max + 1)
    cdf = np.cumsum(k ** -gamma)
    cdf /= cdf[-1]
    return k[np.searchsorted(cdf, rng.random(size), side="right")]


def test_fit_power_law_recovers_exponent():
    rng = np.random.default_rng(7)
    ks = _sample_power_law(2.0, 1000, 100_000, rng)
    vals, counts = np.unique(ks, return_counts=True)
    hist = DegreeHistogram(dict(zip(vals.tolist(), counts.tolist())), "out")
    assert fit_power_law(hist, 1, k_max=1000) == pytest.approx(2.0, abs=0.05)
    assert fit_power_law(hist, 1) == pytest.approx(2.0, abs=0.05)


def test_fit_power_law_degenerate():
    with pytest.raises(ValueError):
        fit_power_law(DegreeHistogram({3: 10}, "out"))


def test_fit_log_normal():
    mu, sigma, mean = fit_log_normal([5.0] * 4)
    assert (mu, sigma, mean) == (pytest.approx(math.log(5)), 0.0, pytest.approx(5.0))
    rng = np.random.default_rng(3)
    mu, sigma, _ = fit_log_normal(rng.lognormal(2.0, 0.8, 100_000))
    assert mu == pytest.approx(2.0, rel=0.01) and sigma == pytest.approx(0.8, rel=0.01)
    with pytest.raises(ValueError):
        fit_log_normal([1.0, 0.0])
    with pytest.raises(ValueError):
        fit_log_normal([1.0])
