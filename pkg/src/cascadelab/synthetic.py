"""
Synthetic follower graphs for experiments without the Digg data.

All generators return :class:`DirectedGraph`.  "Undirected" graphs are
stored with both directions of every edge (mutual following).
"""

from __future__ import annotations

import numpy as np

from .graph import DirectedGraph
from .meanfield import power_law_distribution
from .rewire import configuration_rewire


def power_law_degrees(n, gamma, k_min, k_max, rng):
    """``n`` i.i.d. degrees from the discrete power law on ``[k_min, k_max]``."""
    dist = power_law_distribution(gamma, k_min, k_max)
    return rng.choice(dist.k, size=n, p=dist.p)


def _undirected_pairs(degrees, rng):
    degrees = np.asarray(degrees, dtype=np.int64)
    stubs = rng.permutation(np.repeat(np.arange(len(degrees), dtype=np.int64), degrees))
    if len(stubs) % 2:
        stubs = stubs[:-1]
    return stubs[0::2], stubs[1::2]


def symmetric(n, a, b, ids=None) -> DirectedGraph:
    """Mutual-edge graph from undirected pairs ``(a[i], b[i])``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return DirectedGraph.from_arrays(n, np.concatenate([a, b]), np.concatenate([b, a]), ids=ids)


def undirected_configuration(degrees, seed) -> DirectedGraph:
    """Erased configuration model: random stub pairing, loops and multi-edges removed."""
    rng = np.random.default_rng(seed)
    a, b = _undirected_pairs(degrees, rng)
    return symmetric(len(degrees), a, b)


def power_law_graph(n=10_000, gamma=2.0, k_min=1, k_max=100, seed=0,
                    rewired=False) -> DirectedGraph:
    """Mutual-edge power-law configuration graph, optionally rewired.

    ``rewired=True`` passes the result through the directed configuration
    model, which keeps each node's in- and out-degree (equal here) but
    removes reciprocity and any residual structure.
    """
    rng = np.random.default_rng(seed)
    g = undirected_configuration(power_law_degrees(n, gamma, k_min, k_max, rng),
                                 rng.integers(2**63))
    if rewired:
        g = configuration_rewire(g, int(rng.integers(2**63)))
    return g


def clustered_graph(n=10_000, clique_sizes=(4, 8), gamma=2.0, k_min=1, k_max=100,
                    seed=0) -> DirectedGraph:
    """Power-law graph with planted cliques.

    Nodes are partitioned into cliques with sizes drawn uniformly from
    ``clique_sizes`` (inclusive) and each clique is fully connected; a
    power-law configuration layer provides the links between cliques.
    All edges are mutual.
    """
    rng = np.random.default_rng(seed)
    lo, hi = clique_sizes
    order = rng.permutation(n)
    a, b = [], []
    start = 0
    while start < n:
        size = int(rng.integers(lo, hi + 1))
        members = order[start:start + size]
        start += size
        i, j = np.triu_indices(len(members), k=1)
        a.append(members[i])
        b.append(members[j])
    ca, cb = _undirected_pairs(power_law_degrees(n, gamma, k_min, k_max, rng), rng)
    a.append(ca)
    b.append(cb)
    return symmetric(n, np.concatenate(a), np.concatenate(b))


def layered_dag(widths, fanin, seed=0) -> DirectedGraph:
    """Layered acyclic graph: node 0 alone in layer 0, then ``widths``.

    Every node in layer 1 is a fan of node 0.  A node in a later layer
    follows ``fanin`` (an ``(lo, hi)`` inclusive range) distinct nodes of
    the previous layer.  No node can influence its own friends, so per-node
    exposure counts are independent of the node's own decisions.
    """
    rng = np.random.default_rng(seed)
    lo, hi = fanin
    src, dst = [], []
    prev = np.array([0])
    nxt = 1
    for li, width in enumerate(widths):
        layer = np.arange(nxt, nxt + width)
        nxt += width
        for v in layer:
            if li == 0:
                chosen = prev
            else:
                k = min(int(rng.integers(lo, hi + 1)), len(prev))
                chosen = rng.choice(prev, size=k, replace=False)
            src.extend(chosen.tolist())
            dst.extend([int(v)] * len(chosen))
        prev = layer
    return DirectedGraph.from_arrays(nxt, src, dst)


GENERATORS = {
    "powerlaw": power_law_graph,
    "clustered": clustered_graph,
}


def from_spec(spec: str) -> DirectedGraph:
    """Build a graph from ``name:key=value,...``.

    Examples: ``powerlaw:n=10000,gamma=2,kmax=100,seed=1,rewired=1`` or
    ``clustered:n=5000,seed=3``.
    """
    name, _, args = spec.partition(":")
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    kwargs = {}
    aliases = {"kmin": "k_min", "kmax": "k_max"}
    for item in filter(None, args.split(",")):
        key, _, value = item.partition("=")
        key = aliases.get(key.strip(), key.strip())
        if key == "rewired":
            kwargs[key] = value.strip() not in ("0", "false", "")
        elif key == "gamma":
            kwargs[key] = float(value)
        else:
            kwargs[key] = int(value)
    return GENERATORS[name](**kwargs)
