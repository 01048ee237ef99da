import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from leaderfield.exppoly import ExpPolynomial, convolve_terms

rates = st.floats(0.0, 6.0, allow_nan=False)
coeffs = st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False)


def quad_convolution(alpha, ep, t):
    f = lambda s, part: (np.exp(-alpha * (t - s)) * ep(s)).real if part == 0 else \
        (np.exp(-alpha * (t - s)) * ep(s)).imag
    re = integrate.quad(f, 0, t, args=(0,), epsabs=1e-13, epsrel=1e-12)[0]
    im = integrate.quad(f, 0, t, args=(1,), epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


@settings(max_examples=60, deadline=None)
@given(alpha=rates, terms=st.lists(st.tuples(coeffs, rates, st.integers(0, 3)), max_size=4),
       t=st.floats(0.05, 3.0))
def test_convolution_matches_quadrature(alpha, terms, t):
    ep = ExpPolynomial.from_terms(terms)
    conv = ep.convolve(alpha)
    assert abs(conv(t) - quad_convolution(alpha, ep, t)) <= 1e-8 * (1 + sum(abs(c) for c, _, _ in terms))


def test_resonant_convolution_raises_power():
    ep = ExpPolynomial.exponential(2.0, 1.5)
    conv = ep.convolve(1.5)
    assert conv.terms == ((2.0 + 0j, 1.5, 1),)
    t = 0.8
    assert conv(t) == pytest.approx(2.0 * t * math.exp(-1.5 * t))


def test_convolve_terms_splits_by_rate():
    kept, new = convolve_terms(2.0, [(1.0, 0.5, 0)])
    assert kept == [(1.0 / 1.5, 0.5, 0)]
    assert new == [(-1.0 / 1.5, 2.0, 0)]


def test_from_terms_merges_close_rates_and_drops_zeros():
    ep = ExpPolynomial.from_terms([(1, 1.0, 0), (2, 1.0 + 1e-14, 0), (3, 2.0, 1), (-3, 2.0, 1)])
    assert ep.terms == ((3 + 0j, 1.0, 0),)
    assert ExpPolynomial.from_terms([]).is_zero()


@given(st.lists(st.tuples(coeffs, rates, st.integers(0, 2)), max_size=5))
def test_json_round_trip(terms):
    ep = ExpPolynomial.from_terms(terms)
    assert ExpPolynomial.from_json(ep.to_json()) == ep


def test_at_zero_and_vector_evaluation():
    ep = ExpPolynomial.from_terms([(1, 0.0, 0), (2, 1.0, 1), (0.5, 3.0, 0)])
    assert ep.at_zero() == 1.5
    ts = np.array([0.0, 1.0])
    np.testing.assert_allclose(ep(ts), [1.5, 1 + 2 * math.exp(-1) + 0.5 * math.exp(-3)])
    assert (ep + ep.scale(-1)).is_zero()
