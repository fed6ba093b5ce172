"""
Transmissibility inference and per-voter spreading dynamics.

A cascade is anything with ``seed`` and ``votes`` (``(node, time)`` pairs
in vote order, seed first): simulated cascades and extracted cascades both
qualify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import DirectedGraph


@dataclass(frozen=True)
class CascadeStats:
    """``v`` voters after the seed, ``w`` distinct exposed nodes, ``v/w``."""

    v: int
    w: int
    lam: float


def cascade_log_likelihood(v: int, w: int, lam: float) -> float:
    if not 0 <= v <= w:
        raise ValueError("need 0 <= v <= w")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    # 0 * log(0) terms are zero
    out = 0.0
    if v:
        out += -math.inf if lam == 0.0 else v * math.log(lam)
    if w - v:
        out += -math.inf if lam == 1.0 else (w - v) * math.log1p(-lam)
    return out


def cascade_likelihood(v: int, w: int, lam: float) -> float:
    """``(1 - lam)^(w - v) * lam^v``, evaluated in log space."""
    return math.exp(cascade_log_likelihood(v, w, lam))


def exposure_counts(cascade, graph: DirectedGraph, voters=None):
    """Count ``(v, w)`` under one-trial-per-node exposure.

    ``voters`` lists everyone who voted on the story; it defaults to the
    cascade's own voters.  A fan of a cascade member who voted on the story
    but is not a member voted before being exposed and is not a trial.
    """
    members = [u for u, _ in cascade.votes]
    member_set = set(members)
    all_voters = member_set if voters is None else member_set | set(voters)
    fans = graph.fan_lists
    watchers = set()
    for u in members:
        for f in fans[u]:
            if f not in all_voters:
                watchers.add(f)
    v = len(members) - 1
    return v, v + len(watchers)


def infer_lambda(cascade, graph: DirectedGraph, voters=None) -> CascadeStats:
    """Maximum-likelihood transmissibility ``v / w``."""
    v, w = exposure_counts(cascade, graph, voters)
    if w == 0:
        raise ValueError("cascade exposed nobody; transmissibility is not identifiable")
    return CascadeStats(v, w, v / w)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("need two equal-length sequences of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


@dataclass(frozen=True)
class DynamicsSeries:
    """Per-voter fanout and transmissibility, voter 1 being the seed.

    ``lam[i]`` and ``r[i]`` are NaN where ``d_watching[i] == 0``.
    """

    d_watching: np.ndarray
    d_voting: np.ndarray
    lam: np.ndarray
    r: np.ndarray

    def __len__(self):
        return len(self.d_watching)

    def rows(self):
        for i in range(len(self)):
            yield (i + 1, int(self.d_watching[i]), int(self.d_voting[i]),
                   float(self.lam[i]), float(self.r[i]))


def dynamics_series(cascade, graph: DirectedGraph) -> DynamicsSeries:
    """Walk voters in order and attribute each newly exposed fan once.

    A fan counts towards voter ``i``'s ``d_watching`` if it had not been
    exposed and had not voted when ``i`` voted; it counts towards
    ``d_voting`` if it votes later in the cascade.
    """
    votes = list(cascade.votes)
    position = {}
    for i, (u, _) in enumerate(votes):
        position.setdefault(u, i)
    fans = graph.fan_lists
    exposed = set()
    n = len(votes)
    d_watch = np.zeros(n, dtype=np.int64)
    d_vote = np.zeros(n, dtype=np.int64)
    for i, (u, _) in enumerate(votes):
        exposed.add(u)
        for f in fans[u]:
            if f in exposed:
                continue
            pos = position.get(f)
            if pos is not None and pos < i:
                continue
            exposed.add(f)
            d_watch[i] += 1
            if pos is not None:
                d_vote[i] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.where(d_watch > 0, d_vote / np.maximum(d_watch, 1), np.nan)
    r = np.where(d_watch > 0, d_watch * lam, np.nan)
    return DynamicsSeries(d_watch, d_vote, lam, r)


def geometric_bins(n: int, ratio: float = 1.5):
    """Voter-index bin edges ``[0, 1, 2, ...]`` growing by ``ratio``."""
    edges = [0]
    width = 1.0
    while edges[-1] < n:
        edges.append(min(n, edges[-1] + max(1, int(round(width)))))
        width *= ratio
    return edges


def binned_dynamics(series_list, ratio: float = 1.5):
    """Pool several series over geometric voter-index bins.

    Returns rows ``(first index, last index, mean d_watching, mean d_voting,
    pooled lambda)`` where pooled lambda is ``sum d_voting / sum d_watching``
    over all voters falling in the bin.
    """
    n = max(len(s) for s in series_list)
    edges = geometric_bins(n, ratio)
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        watch = np.concatenate([s.d_watching[lo:hi] for s in series_list])
        vote = np.concatenate([s.d_voting[lo:hi] for s in series_list])
        if not len(watch):
            continue
        tw = watch.sum()
        rows.append((lo + 1, hi, float(watch.mean()), float(vote.mean()),
                     float(vote.sum() / tw) if tw else math.nan))
    return rows
