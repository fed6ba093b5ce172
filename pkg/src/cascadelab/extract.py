"""
Cascade extraction from vote logs with the cascade generating function.

Voters are processed in vote order.  A voter with no friend who voted
strictly earlier starts a new cascade (its generating-function value is 1);
any other voter ``j`` gets

    phi(j) = alpha * sum(phi(i) for earlier-voting friends i)

and belongs to every cascade that reaches one of those friends.  Split by
seed, ``phi_p(j)`` is the contribution of seed ``p`` alone; ``j`` is a
member of cascade ``p`` exactly when ``phi_p(j) > 0``, which does not
depend on ``alpha``.  Membership is therefore propagated as sets of seeds
and ``phi`` is only computed (in log space) on request.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .graph import DirectedGraph, VoteLog

logger = logging.getLogger(__name__)


@dataclass
class ExtractedCascade:
    """Voters attributed to one seed, in vote order (seed first)."""

    seed: int
    members: list
    log_phi: dict = field(default_factory=dict)
    alpha: float = 1.0

    @property
    def votes(self) -> list:
        return self.members

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def phi(self) -> dict:
        """``phi_p`` per member; may underflow to 0.0 or overflow to inf."""
        return {u: _exp(lp) for u, lp in self.log_phi.items()}

    def to_json(self, graph: DirectedGraph) -> dict:
        ids = graph.ids
        out = {"seed": ids[self.seed],
               "members": [[ids[u], t] for u, t in self.members]}
        if self.log_phi:
            # out-of-range values become null; log_phi stays exact
            out["phi"] = {ids[u]: _finite(_exp(lp)) for u, lp in self.log_phi.items()}
            out["log_phi"] = {ids[u]: lp for u, lp in self.log_phi.items()}
        return out


@dataclass
class StoryExtraction:
    story: str
    cascades: list
    total_votes: int
    skipped: int
    principal: ExtractedCascade | None = None

    def to_json(self, graph: DirectedGraph) -> dict:
        return {"story": self.story,
                "seeds": [graph.ids[c.seed] for c in self.cascades],
                "cascades": [c.to_json(graph) for c in self.cascades]}


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _finite(x):
    return x if 0.0 < x < math.inf else None


def _logsumexp(values):
    m = max(values)
    if m == -math.inf:
        return m
    return m + math.log(sum(math.exp(v - m) for v in values))


def _ordered_votes(log: VoteLog, graph: DirectedGraph):
    nodes, times, skipped = log.resolve(graph)
    votes = list(zip(nodes, times))
    sub = graph.index.get(log.submitter) if log.submitter is not None else None
    if sub is not None and sub not in set(nodes):
        # a submitter without a recorded vote starts the story
        votes.insert(0, (sub, votes[0][1] if votes else 0.0))
    return votes, sub, skipped


def extract_story(log: VoteLog, graph: DirectedGraph, alpha: float = 1.0,
                  with_phi: bool = False) -> StoryExtraction:
    """Split one story's votes into (possibly overlapping) cascades.

    The submitter always seeds its own cascade, the principal cascade.
    Voters absent from the graph are skipped and counted.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    votes, submitter, skipped = _ordered_votes(log, graph)
    if skipped:
        logger.info("story %s: %d voters not in graph", log.story, skipped)
    friends = graph.friend_lists
    log_alpha = math.log(alpha)
    vote_time = {}
    membership = {}
    log_phi = {}
    cascades = []
    for j, t in votes:
        earlier = [i for i in friends[j] if i in vote_time and vote_time[i] < t]
        vote_time[j] = t
        if not earlier or j == submitter:
            p = len(cascades)
            cascades.append(ExtractedCascade(j, [(j, t)], alpha=alpha))
            membership[j] = {p}
            if with_phi:
                log_phi[j] = {p: 0.0}
            continue
        seeds = set()
        for i in earlier:
            seeds |= membership[i]
        membership[j] = seeds
        for p in sorted(seeds):
            cascades[p].members.append((j, t))
        if with_phi:
            lp = {}
            for p in seeds:
                terms = [log_phi[i][p] for i in earlier if p in log_phi[i]]
                lp[p] = log_alpha + _logsumexp(terms)
            log_phi[j] = lp
    if with_phi:
        for j, per_seed in log_phi.items():
            for p, value in per_seed.items():
                cascades[p].log_phi[j] = value
    principal = next((c for c in cascades if c.seed == submitter), None)
    return StoryExtraction(log.story, cascades, len(log), skipped, principal)


def assign_cascades(log: VoteLog, graph: DirectedGraph, alpha: float = 1.0,
                    with_phi: bool = False) -> list:
    return extract_story(log, graph, alpha, with_phi).cascades


def principal_cascade(log: VoteLog, graph: DirectedGraph, alpha: float = 1.0,
                      with_phi: bool = False) -> ExtractedCascade:
    """The cascade seeded by the story's submitter."""
    if log.submitter is None:
        raise ValueError(f"story {log.story!r} has no submitter")
    if log.submitter not in graph.index:
        raise ValueError(f"submitter {log.submitter!r} of story {log.story!r} is not in the graph")
    return extract_story(log, graph, alpha, with_phi).principal
