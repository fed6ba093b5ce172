"""
Follower graph and vote log containers.

An edge ``u -> v`` means ``v`` is a fan of ``u``: ``v`` sees what ``u`` votes
on, so information flows from ``u`` to ``v``.  Nodes are dense integers
``0..n-1``; ``DirectedGraph.ids`` keeps the external string id of each one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ParseError

logger = logging.getLogger(__name__)


def _csr(n, rows, cols):
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, rows + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, cols.astype(np.int64, copy=False)


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable directed follower graph in compressed adjacency form.

    Build instances with :meth:`from_arrays` or :func:`load_graph`; the
    constructor does no validation.

    Attributes
    ----------
    ids : tuple of str
        External id of every node, indexed by dense node id.
    fan_ptr, fan_idx : ndarray
        CSR layout of the fan lists: ``fan_idx[fan_ptr[u]:fan_ptr[u+1]]``
        are the fans of ``u``, sorted.
    friend_ptr, friend_idx : ndarray
        CSR layout of the friend lists (the transpose).
    notes : mapping
        Counters recorded while building the graph (dropped self-loops,
        duplicates, stubs).
    """

    ids: tuple
    fan_ptr: np.ndarray
    fan_idx: np.ndarray
    friend_ptr: np.ndarray
    friend_idx: np.ndarray
    notes: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, n, src, dst, ids=None, notes=None):
        """Build a graph from parallel source/target arrays.

        Self-loops and repeated ``(src, dst)`` pairs are dropped and counted
        in ``notes``.
        """
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("node index out of range")
        notes = dict(notes or {})
        loops = src == dst
        n_loops = int(loops.sum())
        src, dst = src[~loops], dst[~loops]
        keys = src * n + dst
        _, first = np.unique(keys, return_index=True)
        first.sort()
        n_dup = src.size - first.size
        src, dst = src[first], dst[first]
        notes["self_loops_dropped"] = notes.get("self_loops_dropped", 0) + n_loops
        notes["duplicates_dropped"] = notes.get("duplicates_dropped", 0) + n_dup
        if ids is None:
            ids = tuple(str(i) for i in range(n))
        elif len(ids) != n:
            raise ValueError("ids must have one entry per node")
        fan_ptr, fan_idx = _csr(n, src, dst)
        friend_ptr, friend_idx = _csr(n, dst, src)
        return cls(tuple(ids), fan_ptr, fan_idx, friend_ptr, friend_idx, notes)

    @property
    def node_count(self) -> int:
        return len(self.fan_ptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.fan_idx)

    def fans(self, u: int) -> np.ndarray:
        return self.fan_idx[self.fan_ptr[u]:self.fan_ptr[u + 1]]

    def friends(self, v: int) -> np.ndarray:
        return self.friend_idx[self.friend_ptr[v]:self.friend_ptr[v + 1]]

    def out_degree(self) -> np.ndarray:
        """Number of fans of every node."""
        return np.diff(self.fan_ptr)

    def in_degree(self) -> np.ndarray:
        """Number of friends of every node."""
        return np.diff(self.friend_ptr)

    def edges(self):
        """Return ``(src, dst)`` arrays sorted by source then target."""
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), self.out_degree())
        return src, self.fan_idx.copy()

    def edge_set(self) -> set:
        src, dst = self.edges()
        return set(zip(src.tolist(), dst.tolist()))

    def adjacency(self) -> sp.csr_matrix:
        """Sparse adjacency with ``A[u, v] = 1`` iff ``v`` is a fan of ``u``."""
        n = self.node_count
        data = np.ones(self.edge_count, dtype=np.float64)
        return sp.csr_matrix((data, self.fan_idx, self.fan_ptr), shape=(n, n))

    @cached_property
    def index(self) -> dict:
        """Map external id -> dense node id."""
        return {name: i for i, name in enumerate(self.ids)}

    @cached_property
    def fan_lists(self) -> list:
        """Fan lists as plain Python lists; faster than array slices in loops."""
        idx = self.fan_idx.tolist()
        ptr = self.fan_ptr.tolist()
        return [idx[ptr[u]:ptr[u + 1]] for u in range(self.node_count)]

    @cached_property
    def friend_lists(self) -> list:
        idx = self.friend_idx.tolist()
        ptr = self.friend_ptr.tolist()
        return [idx[ptr[u]:ptr[u + 1]] for u in range(self.node_count)]

    def __repr__(self):
        return f"DirectedGraph(nodes={self.node_count}, edges={self.edge_count})"


def load_graph(records: Iterable[Sequence[str]], first_line: int = 1) -> DirectedGraph:
    """Build a graph from ``(source id, target id)`` records.

    Ids are assigned densely in first-seen order.  Nodes named only in a
    self-loop are kept (as isolated nodes); the loop itself is dropped.

    Parameters
    ----------
    records : iterable of pairs of str
        Information flows from source to target (target is a fan of source).
    first_line : int
        Line number reported for the first record in parse errors.
    """
    index: dict = {}
    src: list = []
    dst: list = []
    line = first_line - 1
    for line, rec in enumerate(records, start=first_line):
        try:
            a, b = rec
        except (TypeError, ValueError):
            raise ParseError(f"expected 2 fields, got {rec!r}", line) from None
        if not isinstance(a, str) or not isinstance(b, str) or not a or not b:
            raise ParseError(f"ids must be nonempty strings, got {rec!r}", line)
        src.append(index.setdefault(a, len(index)))
        dst.append(index.setdefault(b, len(index)))
    if not index:
        raise ParseError("no edge records", None)
    graph = DirectedGraph.from_arrays(len(index), src, dst, ids=tuple(index))
    if graph.notes["self_loops_dropped"] or graph.notes["duplicates_dropped"]:
        logger.warning("dropped %d self-loops and %d duplicate edges",
                       graph.notes["self_loops_dropped"], graph.notes["duplicates_dropped"])
    return graph


@dataclass(frozen=True)
class VoteLog:
    """Time-ordered votes on one story.

    ``votes`` holds ``(voter id, timestamp)`` with external string ids, so
    voters missing from the follower graph are kept.  Analyses resolve ids
    against a graph with :meth:`resolve`.
    """

    story: str
    votes: tuple
    submitter: str | None = None

    def __len__(self):
        return len(self.votes)

    @property
    def voters(self) -> list:
        return [v for v, _ in self.votes]

    def resolve(self, graph: DirectedGraph):
        """Map voters onto graph nodes.

        Returns ``(nodes, times, skipped)`` where ``nodes`` and ``times`` keep
        log order and ``skipped`` counts voters absent from the graph.
        """
        index = graph.index
        nodes, times = [], []
        for voter, t in self.votes:
            u = index.get(voter)
            if u is not None:
                nodes.append(u)
                times.append(t)
        return nodes, times, len(self.votes) - len(nodes)

    @classmethod
    def from_nodes(cls, graph: DirectedGraph, story: str, votes, submitter=None):
        """Build a log from ``(node id, time)`` pairs already in vote order."""
        ids = graph.ids
        sub = ids[submitter] if submitter is not None else None
        return cls(story, tuple((ids[u], float(t)) for u, t in votes), sub)


def load_votes(records: Iterable[Sequence], first_line: int = 1,
               submitters: Mapping[str, str] | None = None) -> dict:
    """Group ``(timestamp, voter id, story id)`` records into vote logs.

    Votes are sorted by time (stable, so equal timestamps keep file order)
    and a voter's repeat votes on the same story are dropped, keeping the
    earliest.  The submitter is taken from ``submitters`` when given,
    otherwise it is the earliest voter.
    """
    per_story: dict = {}
    for line, rec in enumerate(records, start=first_line):
        try:
            ts, voter, story = rec
            ts = float(ts)
        except (TypeError, ValueError):
            raise ParseError(f"expected (timestamp, voter, story), got {rec!r}", line) from None
        if ts != ts:
            raise ParseError("timestamp is NaN", line)
        if not voter or not story:
            raise ParseError(f"empty id in {rec!r}", line)
        per_story.setdefault(str(story), []).append((ts, str(voter)))

    logs = {}
    for story, votes in per_story.items():
        votes.sort(key=lambda tv: tv[0])
        seen = set()
        ordered = []
        for ts, voter in votes:
            if voter not in seen:
                seen.add(voter)
                ordered.append((voter, ts))
        submitter = (submitters or {}).get(story)
        if submitter is not None:
            pos = next((i for i, (v, _) in enumerate(ordered) if v == submitter), None)
            if pos:
                # submitter's vote goes first; it cannot be later than the story
                voter, _ = ordered.pop(pos)
                ordered.insert(0, (voter, ordered[0][1]))
        else:
            submitter = ordered[0][0]
        logs[story] = VoteLog(story, tuple(ordered), submitter)
    return logs
