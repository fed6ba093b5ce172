"""
Largest adjacency eigenvalue and the spectral epidemic threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError
from .graph import DirectedGraph


@dataclass(frozen=True)
class EigenResult:
    eigenvalue: float
    vector: np.ndarray
    iterations: int
    residual: float

    @property
    def threshold(self) -> float:
        return 1.0 / self.eigenvalue if self.eigenvalue > 0 else math.inf


def is_acyclic(graph: DirectedGraph) -> bool:
    n_comp, _ = connected_components(graph.adjacency(), directed=True, connection="strong")
    return n_comp == graph.node_count


def power_iteration(graph: DirectedGraph, tol: float = 1e-8, max_iters: int = 10_000,
                    seed: int = 0, restarts: int = 1, shift: float = 1.0) -> EigenResult:
    """Spectral radius of the adjacency matrix by shifted power iteration.

    The radius of a non-negative matrix is the largest radius of its
    strongly connected components, and each component's block is
    irreducible, so power iteration there converges geometrically even when
    several components tie (on the whole matrix a tie between chained
    components forms a Jordan block and convergence is only algebraic).

    Within a component the iteration is ``x <- (A + shift*I) x`` from a
    strictly positive random start; the shift keeps the Perron vector but
    breaks the tie with other eigenvalues of maximal modulus that periodic
    components (e.g. a directed cycle) have.  The estimate is the Rayleigh
    quotient and iteration stops when successive estimates agree to ``tol``
    relatively and the residual is below ``tol``.  ``restarts > 1`` retries
    each component from fresh positive vectors and keeps the largest.

    The returned eigenvector of the full matrix is the dominant component's
    vector extended to the nodes upstream of it.
    """
    if graph.edge_count == 0:
        raise ValueError("graph has no edges")
    n = graph.node_count
    a = graph.adjacency()
    n_comp, labels = connected_components(a, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    if n_comp == n:
        return EigenResult(0.0, np.zeros(n), 0, 0.0)
    rng = np.random.default_rng(seed)
    src, dst = graph.edges()
    inner = labels[src] == labels[dst]
    inner_edges = np.bincount(labels[src[inner]], minlength=n_comp)

    found = []
    iters = 0
    for c in np.flatnonzero(sizes > 1):
        nodes = np.flatnonzero(labels == c)
        if inner_edges[c] == len(nodes):
            # a bare cycle: radius 1, uniform Perron vector
            res = EigenResult(1.0, np.full(len(nodes), len(nodes) ** -0.5), 0, 0.0)
        else:
            sub = a[nodes][:, nodes]
            res = None
            for _ in range(max(1, restarts)):
                r = _iterate(sub, rng.uniform(0.5, 1.5, size=len(nodes)), tol, max_iters, shift)
                iters += r.iterations
                if res is None or r.eigenvalue > res.eigenvalue:
                    res = r
        found.append((res, nodes))
    lam = max(r.eigenvalue for r, _ in found)
    tied = [(r, nodes) for r, nodes in found if r.eigenvalue >= lam * (1 - 10 * tol)]
    res, nodes, up = _most_upstream(graph, tied)
    x = _extend(a, res.eigenvalue, nodes, res.vector, up, tol, max_iters)
    resid = float(np.linalg.norm(a @ x - res.eigenvalue * x))
    return EigenResult(res.eigenvalue, x, iters, resid)


def _upstream(graph, nodes):
    """Nodes outside ``nodes`` with a path into them."""
    friends = graph.friend_lists
    seen = np.zeros(graph.node_count, dtype=bool)
    seen[nodes] = True
    stack = nodes.tolist()
    while stack:
        v = stack.pop()
        for u in friends[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    seen[nodes] = False
    return np.flatnonzero(seen)


def _most_upstream(graph, tied):
    """Pick a top component with no other top component upstream of it."""
    for res, nodes in tied:
        up = _upstream(graph, nodes)
        others = [other[0] for r, other in tied if other is not nodes]
        if not np.isin(others, up).any():
            return res, nodes, up
    raise AssertionError("component graph is acyclic, so some component is most upstream")


def _extend(a, lam, nodes, vec, up, tol, max_iters):
    """Eigenvector of the full matrix from a component's Perron vector.

    Rows of ``A x`` only see fans, so the vector must also be set on the
    nodes ``up`` with a path into the component: ``x_U = (A_UU x_U + A_UC x_C)
    / lam``, a Neumann series that converges because no upstream component
    reaches radius ``lam``.
    """
    x = np.zeros(a.shape[0])
    x[nodes] = vec
    if not len(up):
        return x
    a_uu = a[up][:, up]
    b = a[up] @ x / lam
    xu = b.copy()
    for _ in range(max_iters):
        nxt = a_uu @ xu / lam + b
        step = float(np.linalg.norm(nxt - xu))
        xu = nxt
        if step <= 1e-3 * tol * (1.0 + np.linalg.norm(xu)):
            break
    else:
        raise ConvergenceError(f"eigenvector extension did not settle at eigenvalue {lam:.10g}",
                               estimate=lam, residual=step)
    x[up] = xu
    return x / np.linalg.norm(x)


def _iterate(a, x, tol, max_iters, shift):
    x /= np.linalg.norm(x)
    est = math.nan
    ax = a @ x
    for it in range(1, max_iters + 1):
        prev = est
        est = float(x @ ax)
        resid = float(np.linalg.norm(ax - est * x))
        if abs(est - prev) <= tol * abs(est) and resid < tol:
            return EigenResult(est, x, it, resid)
        y = ax + shift * x
        x = y / np.linalg.norm(y)
        ax = a @ x
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(estimate {est:.10g}, residual {resid:.3g})",
        estimate=est, residual=resid)


def largest_eigenvalue(graph: DirectedGraph, tol: float = 1e-8, max_iters: int = 10_000,
                       seed: int = 0) -> float:
    return power_iteration(graph, tol, max_iters, seed).eigenvalue


def epidemic_threshold(graph: DirectedGraph, tol: float = 1e-8, max_iters: int = 10_000,
                       seed: int = 0) -> float:
    """Inverse of the largest eigenvalue (``inf`` for acyclic graphs)."""
    return power_iteration(graph, tol, max_iters, seed).threshold
