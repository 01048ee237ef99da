"""Lazy memoized solver for the marginal hierarchies.

All three hierarchies (finite N, critical limit, order regime) share the shape

    F_k(n, t) = e^{-R_k(n) t} F_k(n, 0)
              + sum_{i<j} G_k(n, i, j) int_0^t e^{-R_k(n)(t-s)} F_{k-1}(fold_ij n, s) ds

and differ only in the rate R_k and the gain G_k. Trajectories are built per
frequency vector on demand, so analytic initial data never needs truncating.

Each term carries a tag used by the a/b decomposition of the limit system:
tag 1 marks the stationary-profile branch, tag h >= 2 marks pieces decaying
at least like e^{-lambda h (h-1) t}.
"""

from __future__ import annotations

import numpy as np

from .exppoly import RATE_RTOL, ExpPolynomial, convolve_terms
from .spectral import SpectralCoefficients, cube_indices


def fold(n: tuple, i: int, j: int) -> tuple:
    """Merge entries i < j into position i (the other one is dropped)."""
    return n[:i] + (n[i] + n[j],) + n[i + 1:j] + n[j + 1:]


class MissingInitialData(KeyError):
    pass


class HierarchySolver:
    """rate(n) -> float, gain(n, i, j) -> complex, init(n) -> complex or None."""

    def __init__(self, rate, gain, init, rtol: float = RATE_RTOL):
        self.rate = rate
        self.gain = gain
        self.init = init
        self.rtol = rtol
        self._memo = {}
        self.missing = set()

    def tagged(self, n: tuple):
        """Dict tag -> list of raw (coeff, rate, power) terms, or None if missing."""
        n = tuple(int(x) for x in n)
        hit = self._memo.get(n, False)
        if hit is not False:
            return hit
        out = self._build(n)
        self._memo[n] = out
        if out is None:
            self.missing.add(n)
        return out

    def _build(self, n):
        k = len(n)
        f0 = self.init(n)
        if f0 is None:
            return None
        alpha = self.rate(n)
        terms = {k: [(complex(f0), alpha, 0)]} if f0 != 0 else {}
        for i in range(k):
            for j in range(i + 1, k):
                src = self.tagged(fold(n, i, j))
                if src is None:
                    return None
                c = self.gain(n, i, j)
                if c == 0:
                    continue
                for tag, sterms in src.items():
                    kept, new = convolve_terms(alpha, [(c * a, b, p) for a, b, p in sterms], self.rtol)
                    terms.setdefault(tag, []).extend(kept)
                    # the alpha-rate piece of the stationary branch belongs to order k
                    terms.setdefault(k if tag == 1 else tag, []).extend(new)
        merged = {}
        for tag, ts in terms.items():
            ep = ExpPolynomial.from_terms(ts, self.rtol)
            if not ep.is_zero():
                merged[tag] = ep.terms
        return merged

    def trajectory(self, n) -> ExpPolynomial:
        t = self.tagged(n)
        if t is None:
            raise MissingInitialData(tuple(n))
        return ExpPolynomial.from_terms([x for ts in t.values() for x in ts], self.rtol)

    def tags(self, n) -> dict:
        t = self.tagged(n)
        if t is None:
            raise MissingInitialData(tuple(n))
        return {tag: ExpPolynomial(ts) for tag, ts in t.items()}


class MarginalSolution:
    """Trajectories of the order-k marginal over the cube of radius n_max."""

    kind = "marginal"

    def __init__(self, k: int, n_max: int, solver: HierarchySolver, initial=None):
        self.k = int(k)
        self.n_max = int(n_max)
        self.solver = solver
        self.initial = initial

    def coefficient(self, n) -> ExpPolynomial:
        n = tuple(int(x) for x in n)
        if len(n) != self.k:
            raise ValueError(f"index {n} does not have {self.k} entries")
        return self.solver.trajectory(n)

    def has(self, n) -> bool:
        return self.solver.tagged(tuple(n)) is not None

    def indices(self):
        return cube_indices(self.k, self.n_max)

    @property
    def missing(self) -> list:
        """Stored indices whose trajectory could not be resolved."""
        return sorted(n for n in self.solver.missing if len(n) == self.k)

    def values(self, n, times):
        """Trajectory of one index on a time grid; NaN if missing."""
        if not self.has(n):
            return np.full(np.shape(times), np.nan, dtype=complex)
        return np.asarray(self.coefficient(n)(np.asarray(times, dtype=float)), dtype=complex)

    def evaluate(self, t: float):
        """SpectralCoefficients at time t; missing entries are NaN."""
        vals = np.empty((2 * self.n_max + 1,) * self.k, dtype=complex)
        for n in self.indices():
            idx = tuple(x + self.n_max for x in n)
            vals[idx] = self.coefficient(n)(t) if self.has(n) else complex(np.nan, np.nan)
        return SpectralCoefficients(vals, self.n_max, f"{self.kind}-k{self.k}", float(t))

    def to_json(self, indices=None) -> dict:
        idx = self.indices() if indices is None else indices
        rows = []
        for n in idx:
            n = tuple(n)
            rows.append({"index": list(n),
                         "terms": self.coefficient(n).to_json() if self.has(n) else None})
        return {"kind": self.kind, "k": self.k, "n_max": self.n_max, "coefficients": rows}
