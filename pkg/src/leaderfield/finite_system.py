"""Exact finite-N marginal dynamics in Fourier space.

With c = lambda N / (N - 1) the order-k coefficients obey

    d/dt F_k(n) = -c ((N-k) sum_r (1 - g(n_r)) + k(k-1)) F_k(n)
                  + c sum_{i<j} (g(n_i) + g(n_j)) F_{k-1}(fold_ij n)

where g is the rescaled noise coefficient. The merged frequency n_i + n_j
sits at position min(i, j).
"""

from __future__ import annotations

import numpy as np

from ._engine import HierarchySolver, MarginalSolution
from .exppoly import RATE_RTOL
from .interaction import g_hat
from .laws import InitialFamily, TensorFamily
from .spectral import default_radius


def as_family(init) -> InitialFamily:
    if isinstance(init, InitialFamily):
        return init
    if isinstance(init, dict):
        return TensorFamily(init)
    # list of tensors for orders 1..k
    return TensorFamily({c.dimension: c for c in init})


class FiniteMarginalSolution(MarginalSolution):
    kind = "finite"

    def __init__(self, k, n_max, solver, initial, sched, gen):
        super().__init__(k, n_max, solver, initial)
        self.sched = sched
        self.gen = gen


def finite_rate(sched, gen, n) -> float:
    N, k = sched.N, len(n)
    c = sched.lam * N / (N - 1)
    loss = sum(1.0 - g_hat(gen, sched.eps, x) for x in n)
    return c * ((N - k) * loss + k * (k - 1))


def evolve_finite_marginal(init, sched, gen, k: int, n_max=None,
                           rtol: float = RATE_RTOL) -> FiniteMarginalSolution:
    """Closed-form trajectories of the order-k marginal of the N-particle system."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if sched.N < k + 1:
        raise ValueError(f"need N >= k + 1, got N={sched.N}, k={k}")
    family = as_family(init)
    N, eps = sched.N, sched.eps
    c = sched.lam * N / (N - 1)

    def gain(n, i, j):
        return c * (g_hat(gen, eps, n[i]) + g_hat(gen, eps, n[j]))

    solver = HierarchySolver(lambda n: finite_rate(sched, gen, n), gain, family.coeff, rtol)
    radius = default_radius(k) if n_max is None else n_max
    return FiniteMarginalSolution(k, radius, solver, family, sched, gen)


def finite_vs_limit_gap(sol, lim, times, indices=None) -> dict:
    """Per-index array of |F_{N,k}(n, t) - f_k(n, t)| over the time grid."""
    if sol.k != lim.k:
        raise ValueError(f"order mismatch: {sol.k} vs {lim.k}")
    if indices is None:
        if sol.n_max != lim.n_max:
            raise ValueError(f"truncation mismatch: {sol.n_max} vs {lim.n_max}")
        indices = sol.indices()
    times = np.asarray(times, dtype=float)
    out = {}
    for n in indices:
        n = tuple(n)
        out[n] = np.abs(sol.values(n, times) - lim.values(n, times))
    return out
