"""Fourier-space engine for the rescaled choose-the-leader mean-field model."""

__version__ = "0.1.0"

from .exppoly import ExpPolynomial
from .spectral import SpectralCoefficients
from .interaction import (GaussianG, LaplaceG, ScalingSchedule, TabulatedG, UniformG,
                          g_hat, make_generator)
from .laws import ChaoticFamily, OrderedFamily, TensorFamily, make_initial, make_law
from .finite_system import evolve_finite_marginal, finite_vs_limit_gap
from .limit_dynamics import (a_coefficients, b_bound_constants, decompose_ab, ell_bounds,
                             evolve_limit_marginal, evolve_order_regime, h_density, nu_density,
                             stationary_hierarchy)
from .particle_sim import compare_to_exact, empirical_coefficients, simulate
from .bounds import constants_ledger, finite_distance_check, limit_distance_check
