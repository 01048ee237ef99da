import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leaderfield.laws import ChaoticFamily, OrderedFamily, WrappedGaussianLaw
from leaderfield.limit_dynamics import evolve_limit_marginal, stationary_hierarchy
from leaderfield.partial_order import (PartialOrderProfile, build_partial_order_marginal,
                                       check_partial_order_factorization, compose_partially_ordered,
                                       decoupled_obstruction_check, ones_coeff, ordered_profile,
                                       partial_order_coeff, propagation_failure_witness,
                                       stationary_profile, uniform_coeff, uniform_profile)
from leaderfield.spectral import SpectralCoefficients, check_even, check_probability, check_symmetric

LAW = WrappedGaussianLaw(0.8)
HIER = stationary_hierarchy(3, 1.0, validate=False)


@settings(max_examples=50, deadline=None)
@given(n=st.lists(st.integers(-6, 6), min_size=1, max_size=3))
def test_ordered_profile_is_ordered_family(n):
    prof = ordered_profile(LAW, 3)
    assert partial_order_coeff(prof, tuple(n)) == pytest.approx(OrderedFamily(LAW).coeff(tuple(n)))


@settings(max_examples=50, deadline=None)
@given(n=st.lists(st.integers(-4, 4), min_size=1, max_size=3))
def test_uniform_profile_is_uniform(n):
    assert partial_order_coeff(uniform_profile(3), tuple(n)) == uniform_coeff(tuple(n))


def test_stationary_profile_marginals_are_probabilities():
    prof = stationary_profile(HIER, 3)
    assert prof.validate(4)
    for k in (1, 2, 3):
        c = build_partial_order_marginal(prof, k, 4)
        assert check_probability(c) and check_even(c) and check_symmetric(c)


def test_limit_trajectory_approaches_stationary_profile():
    prof = stationary_profile(HIER, 3)
    sol = evolve_limit_marginal(ChaoticFamily(LAW), 1.0, 1.0, 3, n_max=3)
    late = {3: sol.evaluate(80.0)}
    assert check_partial_order_factorization(late, prof, tol=1e-10)
    early = {3: sol.evaluate(0.5)}
    assert not check_partial_order_factorization(early, prof, tol=1e-3)


def test_chaotic_data_is_not_partially_ordered():
    fam = {k: SpectralCoefficients.from_function(k, 3, ChaoticFamily(LAW).coeff) for k in (1, 2)}
    v = check_partial_order_factorization(fam, uniform_profile(2))
    assert not v and v.residuals[2] > 0.1


def test_profile_validation_flags_odd_nu():
    odd = lambda n: complex(math.cos(n[0]), 0.2 * math.sin(n[0]))
    prof = PartialOrderProfile({1: uniform_coeff, 2: uniform_coeff}, {2: odd})
    v = prof.validate(3)
    assert not v.passed
    fam = {2: build_partial_order_marginal(prof, 2, 3)}
    res = check_partial_order_factorization(fam, prof)
    assert res.residuals[2] == 0.0 and not res.profile_ok


def test_compose_multiplies_leader_law():
    inner = stationary_profile(HIER, 2)
    comp = compose_partially_ordered(lambda n: LAW.coeff(n[0]), inner)
    for n in [(1, 2), (0, 0), (3, -1)]:
        base = partial_order_coeff(inner, n)
        assert partial_order_coeff(comp, n) == pytest.approx(LAW.coeff(sum(n)) * base)


def test_decoupled_obstruction():
    ks = (2, 3, 4)
    # point masses and uniform laws satisfy the identities
    assert decoupled_obstruction_check({k: ones_coeff for k in ks})
    assert decoupled_obstruction_check({k: (lambda n: uniform_coeff(n)) for k in ks})
    # a common non-degenerate nu cannot
    rep = decoupled_obstruction_check({k: (lambda n: LAW.coeff(n[0])) for k in ks})
    assert not rep and rep.binary_max > 0.1 and rep.j2_max > 0.01
    # the stationary marginals are not decoupled either
    st_nus = {k: (lambda k: lambda n: HIER.nu_hat(n + (0,) * (k - 2)))(k) for k in (2, 3)}
    assert not decoupled_obstruction_check(st_nus, common=False)


def test_propagation_witness_for_ordered_data():
    mu = lambda n: 2.0 / (2.0 + n * n)
    f20 = lambda n: mu(n[0] + n[1])
    w = propagation_failure_witness(mu, f20, 1.0, range(-4, 200))
    assert w.threshold == pytest.approx(math.sqrt(2))
    assert all(abs(n) > math.sqrt(2) for n in w.quantities)
    assert 1 not in w.quantities and 2 in w.witnesses
    assert w.growth[199] == pytest.approx(0.5, rel=1e-3)


def test_stationary_pair_has_no_witness():
    # the stationary state is partially ordered, so the obstruction vanishes
    f10 = lambda n: HIER.f_infty_hat((n,))
    f20 = lambda n: HIER.f_infty_hat(n)
    w = propagation_failure_witness(f10, f20, 1.0, range(2, 30))
    assert max(w.quantities.values()) < 1e-14 and not w.witnesses
