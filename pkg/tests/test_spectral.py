import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leaderfield.laws import ChaoticFamily, WrappedGaussianLaw, WrappedLaplaceLaw
from leaderfield.spectral import (SpectralCoefficients, bochner_psd_check, check_even,
                                  check_probability, check_symmetric, cube_indices, density_eval,
                                  grid_points, marginal)


def product(law, k, r):
    fam = ChaoticFamily(law)
    return SpectralCoefficients.from_function(k, r, fam.coeff, "prod")


def test_value_and_contains():
    c = product(WrappedGaussianLaw(0.5), 2, 3)
    assert c.contains((3, -3)) and not c.contains((4, 0))
    assert c.value((1, 2)) == pytest.approx(math.exp(-0.125) * math.exp(-0.5))
    assert c.get((9, 9)) is None
    assert len(list(cube_indices(2, 3))) == 49


def test_json_round_trip():
    c = product(WrappedLaplaceLaw(2.0), 2, 2).with_meta(time=1.5)
    d = SpectralCoefficients.from_json(c.to_json())
    np.testing.assert_array_equal(d.values, c.values)
    assert d.time == 1.5 and d.n_max == 2


def test_marginal_of_product_is_factor():
    law = WrappedGaussianLaw(0.7)
    c = product(law, 3, 3)
    m = marginal(c, 2)
    ref = product(law, 2, 3)
    np.testing.assert_allclose(m.values, ref.values, atol=1e-15)


def test_predicates():
    c = product(WrappedGaussianLaw(0.5), 2, 3)
    assert check_probability(c) and check_even(c) and check_symmetric(c)
    bad = SpectralCoefficients(c.values * 0.5, 3)
    assert not check_probability(bad)
    skew = c.values.copy()
    skew[3 + 1, 3 + 2] += 0.1
    assert not check_symmetric(SpectralCoefficients(skew, 3))
    assert not check_even(SpectralCoefficients(skew, 3))


def test_density_of_uniform_is_one():
    c = SpectralCoefficients.uniform(2, 4)
    vals, resid = density_eval(c, grid_points(2, 64))
    np.testing.assert_allclose(vals, 1.0)
    assert resid == 0.0


def test_density_matches_wrapped_gaussian():
    s = 0.6
    law = WrappedGaussianLaw(s)
    c = product(law, 1, 40)
    th = np.linspace(-3, 3, 13)
    vals, _ = density_eval(c, th.reshape(-1, 1))
    ref = sum(np.exp(-(th + 2 * math.pi * j) ** 2 / (2 * s * s)) for j in range(-5, 6)) \
        * 2 * math.pi / (s * math.sqrt(2 * math.pi))
    np.testing.assert_allclose(vals, ref, rtol=1e-12, atol=1e-13)


def test_fejer_keeps_nonnegative():
    # truncated coefficients of a point mass oscillate; Fejer sums do not
    c = SpectralCoefficients.ones(1, 12)
    th = np.linspace(-math.pi, math.pi, 101).reshape(-1, 1)
    direct, _ = density_eval(c, th)
    fejer, _ = density_eval(c, th, "fejer")
    assert direct.min() < 0 <= fejer.min()


def test_non_hermitian_rejected():
    c = SpectralCoefficients(np.array([0.3j, 1.0, 0.0]), 1)
    with pytest.raises(ValueError):
        density_eval(c, [[0.4]])


def test_grid_contains_origin():
    for k in (1, 2, 3):
        g = grid_points(k, 512)
        assert g.shape[1] == k and any(np.all(p == 0) for p in g)


@settings(max_examples=25, deadline=None)
@given(sigma=st.floats(0.2, 2.0), pts=st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
                                               min_size=2, max_size=8))
def test_bochner_accepts_probability_laws(sigma, pts):
    c = product(WrappedGaussianLaw(sigma), 2, 10)
    assert bochner_psd_check(c, pts).min_eigenvalue >= -1e-10


def test_bochner_rejects_non_positive_definite():
    vals = np.array([-0.9, 0.9, 1.0, 0.9, -0.9])
    c = SpectralCoefficients(vals, 2)
    assert not bochner_psd_check(c, [(0,), (1,), (2,)]).passed
