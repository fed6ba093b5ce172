"""
Structural and behavioural statistics of follower graphs and vote logs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import optimize, special

from .graph import DirectedGraph, VoteLog


@dataclass(frozen=True)
class DegreeHistogram:
    """Node counts per degree.  ``direction`` is ``"out"`` (fans) or ``"in"``."""

    counts: dict
    direction: str

    @property
    def node_count(self) -> int:
        return sum(self.counts.values())

    def degrees(self) -> np.ndarray:
        """Expand back to one degree per node (sorted)."""
        ks = sorted(self.counts)
        return np.repeat(np.array(ks, dtype=np.int64), [self.counts[k] for k in ks])


def degree_histogram(graph: DirectedGraph, direction: str = "out") -> DegreeHistogram:
    if direction == "out":
        deg = graph.out_degree()
    elif direction == "in":
        deg = graph.in_degree()
    else:
        raise ValueError(f"direction must be 'in' or 'out', not {direction!r}")
    ks, cnt = np.unique(deg, return_counts=True)
    return DegreeHistogram(dict(zip(ks.tolist(), cnt.tolist())), direction)


def undirected_adjacency(graph: DirectedGraph) -> sp.csr_matrix:
    """Symmetric 0/1 adjacency: ``u ~ v`` if either direction is present."""
    a = graph.adjacency()
    u = ((a + a.T) > 0).astype(np.float64)
    return sp.csr_matrix(u)


def local_clustering(graph: DirectedGraph, block: int = 8192) -> np.ndarray:
    """Watts-Strogatz clustering of every node on the undirected projection.

    Nodes with fewer than two neighbours get 0.  Rows are processed in
    blocks so the two-step path matrix never has to exist in full.
    """
    a = undirected_adjacency(graph)
    n = a.shape[0]
    deg = np.asarray(a.sum(axis=1)).ravel()
    tri = np.empty(n)
    for lo in range(0, n, block):
        rows = a[lo:lo + block]
        tri[lo:lo + block] = np.asarray((rows @ a).multiply(rows).sum(axis=1)).ravel() / 2
    pairs = deg * (deg - 1) / 2
    out = np.zeros(n)
    mask = pairs > 0
    out[mask] = tri[mask] / pairs[mask]
    return out


def clustering_coefficient(graph: DirectedGraph) -> float:
    """Mean local clustering over all nodes (undirected projection)."""
    if graph.node_count == 0:
        raise ValueError("clustering of an empty graph is undefined")
    return float(local_clustering(graph).mean())


@dataclass
class ExposureStats:
    """Who saw a story from how many voting friends, and who then voted.

    ``voted[n]`` / ``not_voted[n]`` count exposed users with exactly ``n``
    voting friends at their decision point.  Instances add together, so
    statistics can be pooled over many stories.
    """

    voted: Counter = field(default_factory=Counter)
    not_voted: Counter = field(default_factory=Counter)
    skipped_voters: int = 0

    @property
    def multiplicity(self) -> dict:
        """Exposed users per multiplicity ``n`` (voters and non-voters)."""
        return dict(sorted((self.voted + self.not_voted).items()))

    @property
    def exposed(self) -> int:
        return sum(self.voted.values()) + sum(self.not_voted.values())

    def vote_table(self) -> dict:
        """``n -> (voted, not voted)``."""
        ns = sorted(set(self.voted) | set(self.not_voted))
        return {n: (self.voted[n], self.not_voted[n]) for n in ns}

    def p_vote(self, n: int) -> float:
        v, nv = self.voted[n], self.not_voted[n]
        return v / (v + nv) if v + nv else float("nan")

    def fraction_at_least(self, n: int) -> float:
        """Fraction of exposed users with ``n`` or more voting friends."""
        total = self.exposed
        hits = sum(c for m, c in self.multiplicity.items() if m >= n)
        return hits / total if total else float("nan")

    def __add__(self, other):
        return ExposureStats(self.voted + other.voted, self.not_voted + other.not_voted,
                             self.skipped_voters + other.skipped_voters)


def exposure_stats(graph: DirectedGraph, log: VoteLog, count: str = "before") -> ExposureStats:
    """Exposure multiplicity and voting outcome for every exposed user.

    A user is exposed when at least one friend voted before the user's
    decision point.  For a non-voter ``n`` is the number of friends who
    voted.  For a voter it is the number of friends who voted earlier in
    the log (equal timestamps are ordered by log position) when
    ``count="before"``, which is all real vote logs allow.  ``count="total"``
    uses every voting friend for voters too; on simulated cascades over
    graphs where a user cannot influence its own friends this is the count
    whose vote probability follows the generating model exactly.

    Voters missing from the graph are skipped and counted.
    """
    if not len(log):
        raise ValueError(f"story {log.story!r} has no votes")
    if count not in ("before", "total"):
        raise ValueError("count must be 'before' or 'total'")
    nodes, _, skipped = log.resolve(graph)
    rank = {}
    for pos, u in enumerate(nodes):
        rank.setdefault(u, pos)
    fans = graph.fan_lists
    n_friends = Counter()
    total = count == "total"
    for u in rank:
        ru = rank[u]
        for f in fans[u]:
            rf = rank.get(f)
            if rf is None or total or ru < rf:
                n_friends[f] += 1
    stats = ExposureStats(skipped_voters=skipped)
    for f, n in n_friends.items():
        if f in rank:
            stats.voted[n] += 1
        else:
            stats.not_voted[n] += 1
    return stats


def fit_power_law(hist: DegreeHistogram, k_min: int = 1, k_max: int | None = None) -> float:
    """Discrete maximum-likelihood exponent of the tail ``k >= k_min``.

    With ``k_max`` unset the model is the untruncated discrete power law
    normalised by the Hurwitz zeta function; with ``k_max`` set the law is
    normalised over ``[k_min, k_max]`` and degrees above it are ignored.
    """
    if k_min < 1:
        raise ValueError("k_min must be >= 1")
    ks = np.array([k for k in hist.counts if k >= k_min and (k_max is None or k <= k_max)])
    if len(ks) < 2:
        raise ValueError("need at least two distinct degrees in the tail")
    cnt = np.array([hist.counts[k] for k in ks], dtype=np.float64)
    n = cnt.sum()
    sum_log = float((cnt * np.log(ks)).sum())

    if k_max is None:
        def nll(g):
            return n * math.log(special.zeta(g, k_min)) + g * sum_log
        lo = 1.0 + 1e-9
    else:
        support = np.log(np.arange(k_min, k_max + 1, dtype=np.float64))

        def nll(g):
            return n * float(special.logsumexp(-g * support)) + g * sum_log
        lo = 1e-9
    res = optimize.minimize_scalar(nll, bounds=(lo, 20.0), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x)


def fit_log_normal(sizes) -> tuple:
    """Return ``(mu_log, sigma_log, mean)`` for positive sizes.

    ``mu_log`` and ``sigma_log`` are the mean and (population) standard
    deviation of ``log(size)``; ``mean`` is the implied log-normal mean.
    """
    x = np.asarray(sizes, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two sizes")
    if np.any(~(x > 0)):
        raise ValueError("sizes must be positive")
    logs = np.log(x)
    mu = float(logs.mean())
    sigma = float(logs.std())
    return mu, sigma, math.exp(mu + sigma ** 2 / 2)
