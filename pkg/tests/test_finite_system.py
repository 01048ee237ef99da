import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leaderfield.finite_system import evolve_finite_marginal, finite_rate, finite_vs_limit_gap
from leaderfield.interaction import GaussianG, ScalingSchedule, UniformG, g_hat
from leaderfield.laws import ChaoticFamily, OrderedFamily, WrappedGaussianLaw, WrappedLaplaceLaw
from leaderfield.limit_dynamics import evolve_limit_marginal
from leaderfield.spectral import SpectralCoefficients, bochner_psd_check, check_symmetric

SCHED = ScalingSchedule.critical(16)
GEN = UniformG()
CHAOS = ChaoticFamily(WrappedGaussianLaw(0.6, mean=0.4))
ORDER = OrderedFamily(WrappedLaplaceLaw(1.2))
SOLS = {(name, k): evolve_finite_marginal(fam, SCHED, GEN, k)
        for name, fam in (("chaos", CHAOS), ("order", ORDER)) for k in (1, 2, 3)}

idx = lambda k: st.tuples(*[st.integers(-6, 6)] * k)
times = st.floats(0.0, 4.0)


def test_order_one_closed_form():
    sol = SOLS["chaos", 1]
    for n in (1, 3, -7):
        for t in (0.3, 2.0):
            rate = 16 / 15 * 15 * (1 - g_hat(GEN, SCHED.eps, n))
            assert sol.coefficient((n,))(t) == pytest.approx(math.exp(-rate * t) * CHAOS.coeff((n,)),
                                                             abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 3), t=times, fam=st.sampled_from(["chaos", "order"]))
def test_total_mass_is_conserved(k, t, fam):
    assert SOLS[fam, k].coefficient((0,) * k)(t) == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(n=idx(2), t=times, fam=st.sampled_from(["chaos", "order"]))
def test_marginals_are_consistent(n, t, fam):
    # a zero frequency integrates a particle out
    lower = SOLS[fam, 2].coefficient(n)(t)
    upper = SOLS[fam, 3].coefficient(n + (0,))(t)
    assert upper == pytest.approx(lower, abs=1e-12)
    assert SOLS[fam, 3].coefficient((n[0], 0, n[1]))(t) == pytest.approx(lower, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=idx(3), t=times, fam=st.sampled_from(["chaos", "order"]))
def test_exchangeable_and_hermitian(n, t, fam):
    sol = SOLS[fam, 3]
    v = sol.coefficient(n)(t)
    assert sol.coefficient((n[2], n[0], n[1]))(t) == pytest.approx(v, abs=1e-13)
    assert sol.coefficient(tuple(-x for x in n))(t) == pytest.approx(v.conjugate(), abs=1e-13)


def test_positive_definite_along_trajectory():
    sol = SOLS["order", 2]
    for t in (0.0, 0.5, 3.0):
        c = SpectralCoefficients.from_function(2, 6, lambda n: sol.coefficient(n)(t))
        pts = [(0, 0), (1, 0), (0, 1), (2, -1), (-1, 3), (3, 3)]
        assert bochner_psd_check(c, pts).min_eigenvalue >= -1e-12


def test_rate_formula():
    n = (2, -1)
    ghat = [g_hat(GEN, SCHED.eps, x) for x in n]
    expect = 16 / 15 * (14 * sum(1 - g for g in ghat) + 2)
    assert finite_rate(SCHED, GEN, n) == pytest.approx(expect)


def test_requires_enough_particles():
    with pytest.raises(ValueError):
        evolve_finite_marginal(CHAOS, ScalingSchedule.critical(3), GEN, 3)
    with pytest.raises(ValueError):
        SOLS["chaos", 2].coefficient((1,))


def test_tensor_initial_data_and_missing_indices():
    law = WrappedGaussianLaw(0.5)
    tens = {k: SpectralCoefficients.from_function(k, 2, ChaoticFamily(law).coeff) for k in (1, 2)}
    sol = evolve_finite_marginal(tens, SCHED, GEN, 2, n_max=2)
    ref = evolve_finite_marginal(ChaoticFamily(law), SCHED, GEN, 2)
    assert sol.coefficient((1, -2))(1.0) == pytest.approx(ref.coefficient((1, -2))(1.0))
    # (2, 2) folds to 4, which the tensor does not resolve
    assert not sol.has((2, 2))
    assert np.isnan(sol.values((2, 2), [1.0])[0])
    assert (2, 2) in sol.missing
    snap = sol.evaluate(1.0)
    assert np.isnan(snap.value((2, 2))) and not np.isnan(snap.value((1, 1)))


def test_gap_to_limit_shrinks_with_N():
    gen = GaussianG(1.0)
    gaps = []
    for N in (16, 64, 256, 1024):
        s = ScalingSchedule.critical(N)
        fin = evolve_finite_marginal(CHAOS, s, gen, 2, n_max=3)
        lim = evolve_limit_marginal(CHAOS, gen.m2, 1.0, 2, n_max=3)
        gap = finite_vs_limit_gap(fin, lim, [0.5, 1.0, 2.0])
        gaps.append(max(float(v.max()) for v in gap.values()))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.02
