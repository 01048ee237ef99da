import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

import oracles
from leaderfield.bounds import (constants_ledger, finite_distance_check, kappa, level_set_images,
                                level_sets, limit_distance_check, limit_tail, quadratic_sum_brute,
                                quadratic_sum_rhs, s_map, zeta_three_halves)
from leaderfield.finite_system import evolve_finite_marginal
from leaderfield.interaction import GaussianG, ScalingSchedule, UniformG
from leaderfield.laws import ChaoticFamily, WrappedGaussianLaw
from leaderfield.limit_dynamics import evolve_limit_marginal, stationary_hierarchy


@settings(max_examples=30)
@given(k=st.integers(1, 7), data=st.data())
def test_level_sets_are_compositions(k, data):
    r = data.draw(st.integers(1, k))
    comps = level_sets(k, r)
    assert len(comps) == math.comb(k - 1, r - 1)
    assert all(sum(p) == k and len(p) == r and min(p) >= 1 for p in comps)
    assert comps == sorted(set(comps))


def test_s_map_and_images():
    assert s_map((2, 1), (2, 0, 1), (5, 7, 11)) == (16, 7)
    assert s_map((1, 1, 1), (0, 1, 2), (1, 2, 3)) == (1, 2, 3)
    with pytest.raises(ValueError):
        s_map((2, 2), (0, 1, 2), (1, 2, 3))
    with pytest.raises(ValueError):
        level_sets(3, 4)
    imgs = level_set_images((1, 2, 4))
    assert (7,) in imgs and (3, 4) in imgs and (4, 3) in imgs and (5, 2) in imgs
    assert all(len(m) < 3 for m in imgs)


def test_zeta_three_halves():
    assert zeta_three_halves() == pytest.approx(float(special.zeta(1.5)), abs=1e-12)


@pytest.mark.parametrize("m,K,A,B", [(1.0, 4, 0, 0), (1 / 12, 3, 2, -5), (2.5, 7, -3, 4), (3.0, 6, 1, 1)])
def test_quadratic_sum_brute_is_an_upper_estimate(m, K, A, B):
    M = 2000
    small = quadratic_sum_brute(m, K, A, B, M)
    full = oracles.brute_quadratic_sum(m, K, A, B, 40 * M)
    assert small >= full
    assert small <= quadratic_sum_rhs(m, K)


def test_quadratic_rhs_branches():
    z = zeta_three_halves()
    assert quadratic_sum_rhs(2.0, 6) == pytest.approx(3.0 + 8 * z)
    assert quadratic_sum_rhs(2.0, 5) == pytest.approx(6.0 + 8 * z)
    with pytest.raises(ValueError):
        quadratic_sum_rhs(0.0, 1)


def test_ledger_at_large_N_meets_hypotheses():
    led = constants_ledger(UniformG(), ScalingSchedule.critical(1024), 2)
    assert led.hypotheses_met
    assert led.kappa == 2 and kappa(3) == 3
    assert led.gamma == pytest.approx(min(math.pi ** 2 / (2 * 4 ** 8 * led.g_norm ** 4
                                                          * ((4 * led.ml) ** 0.25 + 2 * math.pi) ** 2),
                                          led.m2 / 2))
    assert led.calC[2] == pytest.approx(9 * led.frak_c[2])
    js = led.to_json()
    assert js["hypotheses_met"] and set(js["D"]) == {"1", "2"}


def test_ledger_small_N_fails_thresholds():
    led = constants_ledger(UniformG(), ScalingSchedule.critical(16), 2)
    assert not led.hypotheses_met


def test_moment_order_three_exponent():
    gen = GaussianG(1.0, l=3)
    led = constants_ledger(gen, ScalingSchedule.critical(4096, l=3), 1)
    assert led.kappa == 3
    assert led.frak_N0 >= led.alpha_floor ** (6 / 5)


def test_limit_distance_report():
    hier = stationary_hierarchy(2, 1.0, validate=False)
    lim = evolve_limit_marginal(ChaoticFamily(WrappedGaussianLaw(0.4)), 1.0, 1.0, 2, n_max=4)
    rep = limit_distance_check(lim, hier, [0.0, 0.5, 3.0])
    assert rep.passed and len(rep.checks) == 81 * 2
    assert min(c.slack for c in rep.checks) >= 0
    assert rep.to_csv().startswith("name,index,t,lhs,rhs,pass,slack")
    assert limit_tail(1.0, 1.0, 1.0) == pytest.approx(math.exp(-2) / (1 - math.exp(-2)) + math.exp(-0.5))
    with pytest.raises(ValueError):
        limit_distance_check(lim, stationary_hierarchy(2, 2.0, validate=False), [1.0])


def test_finite_distance_at_N1024():
    gen = UniformG()
    sched = ScalingSchedule.critical(1024)
    init = ChaoticFamily(WrappedGaussianLaw(0.5))
    hier = stationary_hierarchy(2, gen.m2, validate=False)
    fin = evolve_finite_marginal(init, sched, gen, 2, n_max=3)
    lim = evolve_limit_marginal(init, gen.m2, 1.0, 2, n_max=3)
    rep = finite_distance_check(fin, lim, hier, constants_ledger(gen, sched, 2), [0.5, 2.0])
    assert not rep.informational and rep.passed
    assert {c.name for c in rep.checks} == {"quantitative", "finite_to_limit"}
