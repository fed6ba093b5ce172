"""
Heterogeneous mean-field SIR theory with unit recovery rate.

With infection rate ``lam`` and recovery rate 1, the final outbreak is
fixed by

    phi = sum_k (k - 1) / <k> * p(k) * (1 - exp(-lam * k * phi))
    R   = sum_k p(k) * (1 - exp(-lam * k * phi))

which has a positive root only above ``lam_c = <k> / (<k^2> - <k>)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class DegreeDistribution:
    """Normalised ``p(k)`` on consecutive integers ``k_min..k_max``."""

    k: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.k.ndim != 1 or self.k.shape != self.p.shape or not len(self.k):
            raise ValueError("k and p must be equal-length 1-d arrays")
        if self.k[0] < 1:
            raise ValueError("k_min must be >= 1")
        if np.any(self.p < 0) or abs(self.p.sum() - 1.0) > 1e-12:
            raise ValueError("p must be non-negative and sum to 1")

    @classmethod
    def from_histogram(cls, counts):
        """Empirical distribution from ``{degree: count}``; degree 0 is dropped."""
        k_max = max(counts)
        k = np.arange(1, k_max + 1)
        w = np.array([counts.get(int(x), 0) for x in k], dtype=np.float64)
        if w.sum() == 0:
            raise ValueError("no nodes with degree >= 1")
        return cls(k, w / w.sum())

    @property
    def mean(self) -> float:
        return float((self.k * self.p).sum())

    @property
    def second_moment(self) -> float:
        return float((self.k.astype(np.float64) ** 2 * self.p).sum())


def power_law_distribution(gamma: float, k_min: int, k_max: int) -> DegreeDistribution:
    """``p(k) ∝ k^-gamma`` on ``[k_min, k_max]``."""
    if gamma <= 0 or not 1 <= k_min <= k_max:
        raise ValueError("need gamma > 0 and 1 <= k_min <= k_max")
    k = np.arange(k_min, k_max + 1)
    w = k.astype(np.float64) ** -gamma
    return DegreeDistribution(k, w / w.sum())


def hmf_threshold(dist: DegreeDistribution) -> float:
    m1, m2 = dist.mean, dist.second_moment
    if m2 <= m1:
        raise ValueError("<k^2> <= <k>: no finite threshold")
    return m1 / (m2 - m1)


def _kernel(dist, lam):
    w = (dist.k - 1) / dist.mean * dist.p
    return w, lam * dist.k


def hmf_residual(dist: DegreeDistribution, lam: float, phi: float) -> float:
    """``g(phi) = phi - F(phi)``; zero at a fixed point."""
    w, a = _kernel(dist, lam)
    return phi - float((w * -np.expm1(-a * phi)).sum())


def hmf_final_size(dist: DegreeDistribution, lam: float, tol: float = 1e-9,
                   damping: float = 0.5, max_iters: int = 1_000_000) -> float:
    """Final outbreak fraction ``R`` for transmissibility ``lam``.

    Damped fixed-point iteration ``phi <- (1-d) phi + d F(phi)`` from
    ``phi = 1`` until ``|dphi| < tol``.  ``F`` is concave with ``F(0) = 0``
    and ``F'(0) = lam / lam_c``, so at or below threshold zero is the only
    fixed point and is returned directly (iterating there converges only
    geometrically at rate close to one).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if lam == 0.0 or lam * (dist.second_moment - dist.mean) <= dist.mean:
        return 0.0
    w, a = _kernel(dist, lam)
    phi = 1.0
    trace = []
    for it in range(max_iters):
        f = float((w * -np.expm1(-a * phi)).sum())
        step = damping * (f - phi)
        phi += step
        if it < 50 or it % 1000 == 0:
            trace.append(phi)
        if abs(step) < tol:
            break
    else:
        raise ConvergenceError(f"HMF iteration did not converge in {max_iters} steps",
                               estimate=phi, residual=abs(step), trace=trace)
    return float((dist.p * -np.expm1(-a * phi)).sum())


def hmf_curve(dist: DegreeDistribution, lams, nodes: int, tol: float = 1e-9):
    """Expected cascade size ``nodes * R`` along a grid of transmissibilities."""
    lams = list(lams)
    if not lams:
        raise ValueError("empty lambda grid")
    return [(float(lam), nodes * hmf_final_size(dist, lam, tol)) for lam in lams]
