import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leaderfield.finite_system import evolve_finite_marginal
from leaderfield.interaction import ScalingSchedule, UniformG
from leaderfield.laws import ChaoticFamily, OrderedFamily, UniformLaw, WrappedGaussianLaw
from leaderfield.particle_sim import (compare_to_exact, distinct_tuple_mean, empirical_coefficients,
                                      make_sampler, run_rng, set_partitions, simulate)

GEN = UniformG()
INIT = ChaoticFamily(WrappedGaussianLaw(0.5))


def test_rng_streams_are_reproducible_and_distinct():
    a = run_rng(5, 0).random(4)
    assert np.array_equal(a, run_rng(5, 0).random(4))
    assert not np.array_equal(a, run_rng(5, 1).random(4))
    assert not np.array_equal(a, run_rng(6, 0).random(4))


def test_simulation_is_deterministic_and_thread_independent():
    sched = ScalingSchedule.critical(12)
    a = simulate(sched, GEN, INIT, 0.5, [0.25, 0.5], 6, seed=11)
    b = simulate(sched, GEN, INIT, 0.5, [0.25, 0.5], 6, seed=11)
    c = simulate(sched, GEN, INIT, 0.5, [0.25, 0.5], 6, seed=11, threads=2)
    assert np.array_equal(a.angles, b.angles) and np.array_equal(a.angles, c.angles)
    assert np.array_equal(a.events, c.events)
    d = simulate(sched, GEN, INIT, 0.5, [0.25, 0.5], 6, seed=12)
    assert not np.array_equal(a.angles, d.angles)


def test_angles_wrapped_and_event_counts():
    sched = ScalingSchedule.critical(20, lam=1.5)
    res = simulate(sched, GEN, INIT, 1.0, [0.0, 1.0], 200, seed=3)
    assert res.angles.shape == (200, 2, 20)
    assert res.angles.min() >= -math.pi and res.angles.max() < math.pi
    expect = 1.5 * 400
    assert abs(res.events.mean() - expect) <= 5 * math.sqrt(expect / 200)


def test_ordered_start_is_a_common_angle():
    sched = ScalingSchedule.critical(8)
    res = simulate(sched, GEN, make_sampler("ordered", {"law": "uniform"}), 1.0, [0.0], 3, seed=0)
    assert np.ptp(res.angles[:, 0, :], axis=-1).max() == 0.0


def test_set_partition_counts_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(k))) for k in range(5)] == [1, 1, 2, 5, 15]


@settings(max_examples=40, deadline=None)
@given(N=st.integers(3, 6), n=st.lists(st.integers(-3, 3), min_size=1, max_size=3),
       seed=st.integers(0, 2 ** 32 - 1))
def test_distinct_tuple_mean_matches_brute_force(N, n, seed):
    theta = np.random.default_rng(seed).uniform(-math.pi, math.pi, N)
    tuples = list(itertools.permutations(range(N), len(n)))
    ref = sum(np.exp(-1j * sum(a * theta[i] for a, i in zip(n, idx))) for idx in tuples) / len(tuples)
    assert distinct_tuple_mean(theta, tuple(n)) == pytest.approx(ref, abs=1e-12)


def test_monte_carlo_pairs_agree_with_exact_marginal():
    sched = ScalingSchedule.critical(16)
    res = simulate(sched, GEN, INIT, 1.0, [0.5, 1.0], 600, seed=42)
    idx = [(1, -1), (1, 1), (2, -1), (0, 2)]
    est = empirical_coefficients(res, 2, idx)
    rep = compare_to_exact(est, evolve_finite_marginal(INIT, sched, GEN, 2))
    assert rep.pass_rate >= 0.85
    sampled = empirical_coefficients(res, 2, idx, method="sampled", tuple_samples=16, seed=1)
    for a, b in zip(est, sampled):
        assert abs(a.mean - b.mean) <= 5 * (a.stderr + b.stderr) + 1e-3


def test_comparison_flags_wrong_reference():
    sched = ScalingSchedule.critical(16)
    res = simulate(sched, GEN, INIT, 1.0, [0.5, 1.0], 400, seed=9)
    est = empirical_coefficients(res, 1, [(1,), (2,)])
    wrong = evolve_finite_marginal(ChaoticFamily(UniformLaw()), sched, GEN, 1)
    assert compare_to_exact(est, wrong).pass_rate == 0.0


def test_invalid_arguments():
    sched = ScalingSchedule.critical(4)
    with pytest.raises(ValueError):
        simulate(sched, GEN, INIT, 1.0, [2.0], 2, seed=0)
    with pytest.raises(ValueError):
        simulate(sched, GEN, INIT, -1.0, [0.0], 2, seed=0)
    with pytest.raises(ValueError):
        make_sampler("clustered")
    res = simulate(sched, GEN, INIT, 1.0, [1.0], 2, seed=0)
    with pytest.raises(ValueError):
        empirical_coefficients(res, 5, [(1, 1, 1, 1, 1)])
    with pytest.raises(ValueError):
        empirical_coefficients(res, 1, [(1,)], method="bootstrap")
