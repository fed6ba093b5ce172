"""
Degree-preserving randomization (directed configuration model).
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ConvergenceError
from .graph import DirectedGraph

logger = logging.getLogger(__name__)

MAX_DROP_FRACTION = 1e-3
GOOD, PENDING, DROPPED = 0, 1, 2


class RewireError(ConvergenceError):
    """Too many stubs left unmatched after the swap budget ran out."""


def match_stubs(out_degree, in_degree, rng, attempts_per_pair: int = 200):
    """Pair out-stubs with in-stubs uniformly, then repair collisions.

    Self-loops and repeated pairs are fixed by swapping the target with
    the target of a uniformly chosen other pair, accepted only when the
    swap does not create a new bad pair.  Pairs still bad after
    ``attempts_per_pair`` tries are dropped.

    Returns
    -------
    src, dst : ndarray
        Matched edges, simple and loop-free.
    dropped : int
        Number of stub pairs that could not be placed.
    """
    out_degree = np.asarray(out_degree, dtype=np.int64)
    in_degree = np.asarray(in_degree, dtype=np.int64)
    if out_degree.sum() != in_degree.sum():
        raise ValueError("out- and in-degree sums differ")
    n = len(out_degree)
    src = np.repeat(np.arange(n, dtype=np.int64), out_degree)
    dst = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), in_degree))
    m = len(src)
    if m == 0:
        return src, dst, 0

    keys = src * n + dst
    _, first = np.unique(keys, return_index=True)
    good = np.zeros(m, dtype=bool)
    good[first] = True
    good &= src != dst
    bad = np.flatnonzero(~good).tolist()
    if not bad:
        return src, dst, 0

    src_l = src.tolist()
    dst_l = dst.tolist()
    present = set(keys[good].tolist())
    state = np.where(good, GOOD, PENDING).tolist()
    dropped = 0
    pending = list(bad)
    while pending:
        i = pending.pop()
        if state[i] != PENDING:
            continue
        js = rng.integers(0, m - 1, size=attempts_per_pair).tolist() if m > 1 else []
        for j in js:
            j += j >= i
            if state[j] == DROPPED:
                continue
            si, sj = src_l[i], src_l[j]
            di, dj = dst_l[i], dst_l[j]
            ki, kj = si * n + dj, sj * n + di
            if si == dj or ki in present or ki == kj:
                continue
            j_ok = sj != di and kj not in present
            if state[j] == GOOD:
                if not j_ok:
                    continue
                present.discard(sj * n + dj)
            dst_l[i], dst_l[j] = dj, di
            present.add(ki)
            state[i] = GOOD
            if j_ok:
                present.add(kj)
                state[j] = GOOD
            break
        else:
            dropped += 1
            state[i] = DROPPED
    keep = [i for i in range(m) if state[i] == GOOD]
    src = np.asarray(src_l, dtype=np.int64)[keep]
    dst = np.asarray(dst_l, dtype=np.int64)[keep]
    return src, dst, dropped


def configuration_rewire(graph: DirectedGraph, seed: int,
                         attempts_per_pair: int = 200) -> DirectedGraph:
    """Random graph with every node's in- and out-degree kept.

    Raises
    ------
    RewireError
        If more than 0.1% of stubs had to be dropped.
    """
    if graph.node_count == 0:
        raise ValueError("cannot rewire an empty graph")
    rng = np.random.default_rng(seed)
    src, dst, dropped = match_stubs(graph.out_degree(), graph.in_degree(), rng,
                                    attempts_per_pair)
    m = graph.edge_count
    if dropped > MAX_DROP_FRACTION * m:
        raise RewireError(f"{dropped} of {m} stubs could not be placed",
                          estimate=dropped, residual=dropped / max(m, 1))
    if dropped:
        logger.warning("rewire dropped %d of %d stubs", dropped, m)
    return DirectedGraph.from_arrays(graph.node_count, src, dst, ids=graph.ids,
                                     notes={"stubs_dropped": dropped})
