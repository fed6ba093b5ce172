"""
Event-driven cascade simulation: independent cascade (ICM) and friend
saturation (FSM) models.

Randomness is attached to nodes, not to the order events happen in.  Each
run draws one uniform ``u`` and one delay fraction ``d`` per node.  The
uniform fixes how many exposures the node needs before it votes,

    need = 1 + floor(log(u) / log(1 - lam))      (geometric, P(need=1) = lam)

which is the same law as an independent Bernoulli(lam) trial per exposure.
Under ICM a node votes on its ``need``-th exposure; under FSM it votes on
its first exposure if ``need == 1`` and never otherwise.  A node votes at
``t + d * delay_max`` after the deciding exposure at time ``t`` and spreads
to its fans once, when it votes.

Two consequences are used throughout the tests: final voter sets do not
depend on the delays (any activation order reaches the same fixed point),
and with shared draws every FSM voter is also an ICM voter.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import multiprocessing as mp

import numpy as np

from .graph import DirectedGraph, VoteLog

logger = logging.getLogger(__name__)

MODELS = ("icm", "fsm")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Exactly one of ``lam`` (fixed transmissibility) and ``lam_range``
    (per-run uniform draw) is set.  ``seed_node=None`` picks a uniformly
    random seed node per run.
    """

    model: str = "icm"
    lam: float | None = None
    lam_range: tuple | None = None
    delay_max: float = 1.0
    runs: int = 1
    min_size: int = 10
    seed: int = 0
    seed_node: int | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if (self.lam is None) == (self.lam_range is None):
            raise ValueError("set exactly one of lam and lam_range")
        lo, hi = (self.lam, self.lam) if self.lam is not None else self.lam_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError("transmissibility must satisfy 0 <= lo <= hi <= 1")
        if not self.delay_max > 0:
            raise ValueError("delay_max must be positive")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass
class SimulatedCascade:
    """One simulated cascade.

    ``votes`` are ``(node, time)`` in vote order, seed first.
    ``new_exposures[i]`` is the number of fans first exposed by the i-th
    voter.  ``exposed`` holds exposed nodes that never voted.
    """

    lam: float
    seed: int
    votes: list
    exposed: frozenset
    new_exposures: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.votes)

    @property
    def voters(self) -> list:
        return [u for u, _ in self.votes]

    @property
    def v(self) -> int:
        return len(self.votes) - 1

    @property
    def w(self) -> int:
        return self.v + len(self.exposed)

    def to_vote_log(self, graph: DirectedGraph, story: str = "sim") -> VoteLog:
        return VoteLog.from_nodes(graph, story, self.votes, submitter=self.seed)

    def to_json(self, graph: DirectedGraph | None = None, **extra) -> dict:
        name = (lambda u: graph.ids[u]) if graph is not None else (lambda u: u)
        return dict(
            extra,
            **{"lambda": self.lam,
               "seed": name(self.seed),
               "votes": [[name(u), t] for u, t in self.votes],
               "exposed": sorted(name(u) for u in self.exposed),
               "new_exposures": list(self.new_exposures)})

    @classmethod
    def from_json(cls, rec: dict, graph: DirectedGraph | None = None):
        idx = (lambda x: graph.index[x]) if graph is not None else int
        return cls(float(rec["lambda"]), idx(rec["seed"]),
                   [(idx(u), float(t)) for u, t in rec["votes"]],
                   frozenset(idx(u) for u in rec["exposed"]),
                   list(rec.get("new_exposures", [])))


def node_draws(rng: np.random.Generator, n: int):
    """Per-node ``(u, d)``: decision uniforms in (0, 1] and delay fractions."""
    u = 1.0 - rng.random(n)
    d = rng.random(n)
    return u, d


def run_cascade(graph: DirectedGraph, config: SimConfig, lam: float, seed_node: int,
                rng: np.random.Generator | None = None, *, uniforms=None,
                delays=None) -> SimulatedCascade:
    """Simulate one cascade from ``seed_node`` to quiescence.

    The per-node draws come from ``rng`` unless ``uniforms`` / ``delays``
    are passed explicitly (used to couple runs).
    """
    n = graph.node_count
    if not 0 <= seed_node < n:
        raise ValueError(f"unknown seed node {seed_node}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if uniforms is None or delays is None:
        if rng is None:
            raise ValueError("need rng or explicit draws")
        u_draw, d_draw = node_draws(rng, n)
        uniforms = u_draw if uniforms is None else uniforms
        delays = d_draw if delays is None else delays

    fans = graph.fan_lists
    fsm = config.model == "fsm"
    d_max = config.delay_max
    if lam >= 1.0:
        inv_log = None
    elif lam > 1e-300:
        inv_log = 1.0 / math.log1p(-lam)
    else:
        # 0, or so small that the exposures needed overflow: nobody votes
        inv_log = 0.0

    # state: exposures so far for undecided nodes; -1 once voted or scheduled
    state = {seed_node: -1}
    heap = [(0.0, seed_node)]
    votes = []
    fresh_counts = []
    need = {}
    while heap:
        t, u = heapq.heappop(heap)
        votes.append((u, t))
        fresh = 0
        for f in fans[u]:
            c = state.get(f, 0)
            if c < 0:
                continue
            c += 1
            if c == 1:
                fresh += 1
                if inv_log is None:
                    k = 1
                elif inv_log == 0.0:
                    k = 0
                else:
                    k = 1 + int(math.log(uniforms[f]) * inv_log)
                need[f] = k
            else:
                k = need[f]
            if k == c and (c == 1 or not fsm):
                state[f] = -1
                heapq.heappush(heap, (t + delays[f] * d_max, f))
            else:
                state[f] = c
        fresh_counts.append(fresh)
    exposed = frozenset(f for f, c in state.items() if c > 0)
    return SimulatedCascade(lam, seed_node, votes, exposed, fresh_counts)


def run_stream(seed: int, run: int) -> np.random.Generator:
    """Independent generator for run ``run`` of master seed ``seed``."""
    return np.random.default_rng([seed, run])


def simulate_run(graph: DirectedGraph, config: SimConfig, run: int) -> SimulatedCascade:
    """One sweep run: draws lambda, then the seed node, then node draws."""
    rng = run_stream(config.seed, run)
    if config.lam is not None:
        lam = config.lam
    else:
        lo, hi = config.lam_range
        lam = float(lo + (hi - lo) * rng.random())
    if config.seed_node is None:
        seed_node = int(rng.integers(graph.node_count))
    else:
        seed_node = config.seed_node
    return run_cascade(graph, config, lam, seed_node, rng)


@dataclass(frozen=True)
class SweepRecord:
    run: int
    lam: float
    size: int
    seed_node: int
    exposed: int


CSV_HEADER = ("run", "lambda", "size", "seed_node", "exposed")


@dataclass
class SweepResult:
    config: SimConfig
    records: list
    runs: int
    cascades: list | None = None

    @property
    def emitted(self) -> int:
        return len(self.records)

    def summary(self) -> dict:
        return {"model": self.config.model, "runs": self.runs, "emitted": self.emitted,
                "filtered": self.runs - self.emitted, "min_size": self.config.min_size}

    def rows(self, graph: DirectedGraph | None = None):
        for r in self.records:
            node = graph.ids[r.seed_node] if graph is not None else r.seed_node
            yield (r.run, r.lam, r.size, node, r.exposed)


_WORKER_GRAPH = None


def _init_worker(graph):
    global _WORKER_GRAPH
    _WORKER_GRAPH = graph


def _run_chunk(config, runs, keep):
    return _do_runs(_WORKER_GRAPH, config, runs, keep)


def _do_runs(graph, config, runs, keep):
    out = []
    for run in runs:
        c = simulate_run(graph, config, run)
        if c.size > config.min_size:
            rec = SweepRecord(run, c.lam, c.size, c.seed, len(c.exposed))
            out.append((rec, c if keep else None))
    return out


def default_threads() -> int:
    env = os.environ.get("CASCADELAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(graph: DirectedGraph, config: SimConfig, threads: int = 1,
          keep_cascades: bool = False, first_run: int = 0) -> SweepResult:
    """Run ``config.runs`` cascades and keep those larger than ``min_size``.

    Run ``r`` uses the stream :func:`run_stream` ``(config.seed, r)``, so
    results do not depend on ``threads``.  Emitted records are in run order.
    """
    runs = range(first_run, first_run + config.runs)
    if threads <= 1 or config.runs < 2 * threads:
        pairs = _do_runs(graph, config, runs, keep_cascades)
    else:
        n_chunks = threads * 4
        chunks = [runs[i::n_chunks] for i in range(n_chunks)]
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(threads, mp_context=ctx, initializer=_init_worker,
                                 initargs=(graph,)) as pool:
            parts = pool.map(_run_chunk, [config] * len(chunks), chunks,
                             [keep_cascades] * len(chunks))
            pairs = [p for part in parts for p in part]
        pairs.sort(key=lambda rc: rc[0].run)
    records = [r for r, _ in pairs]
    cascades = [c for _, c in pairs] if keep_cascades else None
    return SweepResult(config, records, config.runs, cascades)


def write_cascades_json(cascades, path, graph: DirectedGraph | None = None, runs=None):
    """Write cascades as JSON lines, one record per cascade."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, c in enumerate(cascades):
            extra = {"run": runs[i]} if runs is not None else {}
            fh.write(json.dumps(c.to_json(graph, **extra)) + "\n")


def read_cascades_json(path, graph: DirectedGraph | None = None) -> list:
    with open(path, encoding="utf-8") as fh:
        return [SimulatedCascade.from_json(json.loads(line), graph) for line in fh if line.strip()]
