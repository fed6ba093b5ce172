import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascadelab.meanfield import (DegreeDistribution, hmf_curve, hmf_final_size, hmf_residual,
                                  hmf_threshold, power_law_distribution)


def bisect_final_size(dist, lam, tol=1e-13):
    """Largest root of phi - F(phi) on (0, 1] by bisection, then R."""
    k = dist.k.astype(float)
    p = dist.p
    mean = (k * p).sum()

    def g(phi):
        return phi - sum((kk - 1) / mean * pk * (1 - math.exp(-lam * kk * phi))
                         for kk, pk in zip(k, p))

    lo, hi = 1e-12, 1.0
    if g(lo) >= 0:
        return 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    phi = (lo + hi) / 2
    return sum(pk * (1 - math.exp(-lam * kk * phi)) for kk, pk in zip(k, p))


def test_point_mass():
    d = power_law_distribution(2.0, 5, 5)
    assert list(d.k) == [5] and list(d.p) == [1.0]


def test_two_point():
    d = power_law_distribution(2.0, 1, 2)
    assert d.p == pytest.approx([0.8, 0.2], abs=1e-15)


def test_power_law_moments_by_direct_summation():
    z = sum(k ** -2.0 for k in range(1, 1001))
    m1 = sum(k ** -1.0 for k in range(1, 1001)) / z
    m2 = 1000 / z
    d = power_law_distribution(2.0, 1, 1000)
    assert d.mean == pytest.approx(m1, rel=1e-12)
    assert d.second_moment == pytest.approx(m2, rel=1e-12)
    # frozen from the summation above: normalised moments, not the raw harmonic sum
    assert m1 == pytest.approx(4.5534, abs=1e-4)
    assert m2 == pytest.approx(608.30, abs=0.01)
    assert hmf_threshold(d) == pytest.approx(0.0075416, abs=1e-6)
    assert hmf_threshold(d) == pytest.approx(m1 / (m2 - m1), rel=1e-12)


def test_invalid_distribution():
    with pytest.raises(ValueError):
        power_law_distribution(2.0, 0, 10)
    with pytest.raises(ValueError):
        power_law_distribution(2.0, 5, 4)
    with pytest.raises(ValueError):
        DegreeDistribution(np.array([1, 2]), np.array([0.6, 0.6]))


def test_regular_thresholds():
    assert hmf_threshold(power_law_distribution(2.0, 4, 4)) == pytest.approx(1 / 3)
    assert hmf_threshold(power_law_distribution(2.0, 2, 2)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        hmf_threshold(power_law_distribution(2.0, 1, 1))


def test_zero_lambda_and_subthreshold():
    d = power_law_distribution(2.0, 1, 1000)
    assert hmf_final_size(d, 0.0) == 0.0
    assert hmf_final_size(d, 0.99 * hmf_threshold(d)) == 0.0


def test_supra_threshold_matches_bisection():
    d = power_law_distribution(2.0, 1, 1000)
    r = hmf_final_size(d, 0.02)
    assert r > 0
    assert r == pytest.approx(bisect_final_size(d, 0.02), abs=1e-6)


@given(st.floats(1.5, 3.0), st.integers(1, 3), st.integers(20, 300), st.floats(1.2, 8.0))
@settings(max_examples=20, deadline=None)
def test_fixed_point_residual_and_oracle(gamma, k_min, k_max, factor):
    d = power_law_distribution(gamma, k_min, k_max)
    lam = min(1.0, factor * hmf_threshold(d))
    r = hmf_final_size(d, lam)
    assert 0.0 <= r <= 1.0
    assert r == pytest.approx(bisect_final_size(d, lam), abs=1e-6)


def test_curve_monotone_and_linear_in_nodes():
    d = power_law_distribution(2.0, 1, 1000)
    grid = np.linspace(0, 0.2, 81)
    sizes = [s for _, s in hmf_curve(d, grid, 1000)]
    assert all(b >= a for a, b in zip(sizes, sizes[1:]))
    doubled = [s for _, s in hmf_curve(d, grid, 2000)]
    assert doubled == pytest.approx([2 * s for s in sizes])
    # first positive grid point brackets the threshold within one step
    step = grid[1] - grid[0]
    first = next(lam for lam, s in zip(grid, sizes) if s > 10 * 1e-9 * 1000)
    assert first - step <= hmf_threshold(d) <= first


def test_curve_below_threshold_is_zero():
    d = power_law_distribution(2.0, 1, 1000)
    lc = hmf_threshold(d)
    assert all(s == 0 for _, s in hmf_curve(d, np.linspace(0, 0.9 * lc, 10), 500))
    with pytest.raises(ValueError):
        hmf_curve(d, [], 10)


def test_residual_at_return_is_small():
    d = power_law_distribution(2.2, 1, 200)
    lam = 3 * hmf_threshold(d)
    r = hmf_final_size(d, lam, tol=1e-10)
    # recover phi from R by solving the monotone map once more
    phis = np.linspace(1e-6, 1, 200_001)
    rs = np.array([(d.p * -np.expm1(-lam * d.k * x)).sum() for x in phis[::1000]])
    phi = np.interp(r, rs, phis[::1000])
    assert abs(hmf_residual(d, lam, phi)) < 1e-3


def test_hmf_tracks_simulation_on_mutual_graph():
    # With every edge mutual, an infected node cannot reinfect its infector,
    # which is the (k - 1) excess-degree assumption behind the HMF equation.
    from cascadelab import synthetic
    from cascadelab.simulate import SimConfig, sweep

    dist = power_law_distribution(2.0, 1, 100)
    lam = 2 * hmf_threshold(dist)
    g = synthetic.power_law_graph(10_000, gamma=2.0, k_min=1, k_max=100, seed=1)
    res = sweep(g, SimConfig(lam=lam, runs=3000, seed=5), threads=4)
    ratio = np.mean([r.size for r in res.records]) / (10_000 * hmf_final_size(dist, lam))
    assert 0.5 <= ratio <= 1.0
