"""Chaotic, ordered and partially ordered coefficient families.

A family is partially ordered with profile (eta_k, nu_{k-1}) when

    f_k(n) = eta_k(sum n) / k * sum_l nu_{k-1}(n without n_l).

Components may be SpectralCoefficients or plain coefficient functions; the
latter keep ordered (delta-coupled) data exact at any frequency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (SpectralCoefficients, Verdict, check_even, check_probability,
                       check_symmetric)


def lookup(comp, n: tuple) -> complex:
    if isinstance(comp, SpectralCoefficients):
        return comp.value(n)
    return comp(n)


def uniform_coeff(n: tuple) -> complex:
    return 1.0 + 0j if all(x == 0 for x in n) else 0j


def ones_coeff(n: tuple) -> complex:
    return 1.0 + 0j


@dataclass
class PartialOrderProfile:
    """eta[k] acts on 1-tuples, nu[k] on (k-1)-tuples (unused for k = 1)."""

    eta: dict
    nu: dict = field(default_factory=dict)
    label: str = ""

    @property
    def orders(self):
        return sorted(self.eta)

    def validate(self, n_max: int = 4, tol: float = 1e-10) -> Verdict:
        """Probability predicates for eta; also evenness and symmetry for nu."""
        fails, worst = [], 0.0
        for k in self.orders:
            eta = _materialize(self.eta[k], 1, n_max)
            v = check_probability(eta, tol)
            worst = max(worst, v.max_violation)
            fails += [f"eta_{k}: {m}" for m in v.failures]
            if k >= 2:
                nu = _materialize(self.nu[k], k - 1, n_max)
                for check in (check_probability, check_even, check_symmetric):
                    v = check(nu, tol)
                    worst = max(worst, v.max_violation)
                    fails += [f"nu_{k - 1}: {m}" for m in v.failures]
        return Verdict(not fails, worst, fails)


def _materialize(comp, dim, n_max):
    if isinstance(comp, SpectralCoefficients):
        r = min(n_max, comp.n_max)
        sl = tuple(slice(comp.n_max - r, comp.n_max + r + 1) for _ in range(dim))
        return SpectralCoefficients(comp.values[sl], r, comp.label)
    return SpectralCoefficients.from_function(dim, n_max, comp)


def uniform_profile(K: int) -> PartialOrderProfile:
    return PartialOrderProfile({k: uniform_coeff for k in range(1, K + 1)},
                               {k: uniform_coeff for k in range(2, K + 1)}, "uniform")


def ordered_profile(law, K: int) -> PartialOrderProfile:
    """Ordered data: eta = mu_0 and nu = product of point masses at 0."""
    eta = lambda n: law.coeff(n[0])
    return PartialOrderProfile({k: eta for k in range(1, K + 1)},
                               {k: ones_coeff for k in range(2, K + 1)}, "ordered")


def stationary_profile(hier, K: int) -> PartialOrderProfile:
    """Uniform leader with deviation law nu_{k-1} of the stationary hierarchy."""
    nu = lambda n: complex(hier.nu_hat(n))
    return PartialOrderProfile({k: uniform_coeff for k in range(1, K + 1)},
                               {k: nu for k in range(2, K + 1)}, "stationary")


def partial_order_coeff(profile: PartialOrderProfile, n: tuple) -> complex:
    k = len(n)
    if k not in profile.eta:
        raise KeyError(f"profile has no order {k}")
    e = lookup(profile.eta[k], (sum(n),))
    if k == 1 or e == 0:
        return complex(e)
    nu = profile.nu[k]
    tot = sum(lookup(nu, n[:l] + n[l + 1:]) for l in range(k))
    return complex(e * tot / k)


def build_partial_order_marginal(profile: PartialOrderProfile, k: int,
                                 n_max: int = 4) -> SpectralCoefficients:
    if k not in profile.eta:
        raise KeyError(f"profile has no order {k}")
    return SpectralCoefficients.from_function(
        k, n_max, lambda n: partial_order_coeff(profile, n), f"po-{profile.label}-{k}")


@dataclass
class FactorizationVerdict:
    passed: bool
    residuals: dict
    profile_ok: bool
    profile_failures: list

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {"passed": self.passed, "residuals": {str(k): v for k, v in self.residuals.items()},
                "profile_ok": self.profile_ok, "profile_failures": self.profile_failures}


def check_partial_order_factorization(family: dict, profile: PartialOrderProfile,
                                      tol: float = 1e-8) -> FactorizationVerdict:
    """Sup-norm residual per order between the family and the profile's marginals."""
    residuals = {}
    for k, coeffs in sorted(family.items()):
        built = build_partial_order_marginal(profile, k, coeffs.n_max)
        residuals[k] = float(np.max(np.abs(coeffs.values - built.values)))
    n_check = min([c.n_max for c in family.values()] + [4])
    pv = profile.validate(n_check)
    passed = pv.passed and all(r <= tol for r in residuals.values())
    return FactorizationVerdict(passed, residuals, pv.passed, pv.failures)


def compose_partially_ordered(eta_inf, inner: PartialOrderProfile) -> PartialOrderProfile:
    """Leader law eta_inf * zeta_k (pointwise product of coefficients), same nu."""
    eta = {}
    for k, zeta in inner.eta.items():
        eta[k] = (lambda z: (lambda n: lookup(eta_inf, n) * lookup(z, n)))(zeta)
    return PartialOrderProfile(eta, dict(inner.nu), f"composed-{inner.label}")


# decoupled profiles

@dataclass
class ObstructionReport:
    passed: bool
    j2_max: float
    j3_max: float
    binary_max: float | None
    failures: list

    def __bool__(self):
        return self.passed


def decoupled_obstruction_check(nus: dict, tol: float = 1e-10, n_range: int = 6,
                                common: bool | None = None) -> ObstructionReport:
    """Identities forced on nu_k when every marginal is partially ordered with a decoupled nu.

    nus maps k >= 2 to a one-dimensional coefficient function or tensor.
    With j = 2:  k nu_2(n) = 2 nu_k(n) + (k-2) nu_k(n)^2.
    With j = 3:  k (v3(a) v3(b) + v3(a+b)(v3(a) + v3(b)))
               = 3 (vk(a) vk(b) + vk(a+b)(vk(a) + vk(b)) + (k-3) vk(a+b) vk(a) vk(b)).
    If all nu_k coincide, their values must be 0 or 1.
    """
    f = {k: (lambda c: lambda n: float(np.real(lookup(c, (n,)))))(c) for k, c in nus.items()}
    ns = range(-n_range, n_range + 1)
    fails = []
    j2 = j3 = 0.0
    if 2 in f:
        for k in sorted(f):
            for n in ns:
                gap = abs(k * f[2](n) - 2 * f[k](n) - (k - 2) * f[k](n) ** 2)
                j2 = max(j2, gap)
                if gap > tol:
                    fails.append(("j2", k, n, gap))
    if 3 in f:
        for k in sorted(x for x in f if x >= 3):
            v3, vk = f[3], f[k]
            for a, b in itertools.product(ns, ns):
                lhs = k * (v3(a) * v3(b) + v3(a + b) * (v3(a) + v3(b)))
                rhs = 3 * (vk(a) * vk(b) + vk(a + b) * (vk(a) + vk(b))
                           + (k - 3) * vk(a + b) * vk(a) * vk(b))
                gap = abs(lhs - rhs)
                j3 = max(j3, gap)
                if gap > tol:
                    fails.append(("j3", k, (a, b), gap))
    if common is None:
        ks = sorted(f)
        common = all(abs(f[k](n) - f[ks[0]](n)) <= tol for k in ks for n in ns)
    binary = None
    if common:
        first = f[min(f)]
        binary = max(min(abs(first(n)), abs(first(n) - 1)) for n in ns)
        if binary > tol:
            fails.append(("binary", None, None, binary))
    return ObstructionReport(not fails, j2, j3, binary, fails)


# lack of propagation

@dataclass
class PropagationWitness:
    witnesses: list
    quantities: dict
    growth: dict
    threshold: float

    def to_json(self):
        return {"witnesses": self.witnesses, "threshold": self.threshold,
                "quantities": {str(n): v for n, v in self.quantities.items()},
                "growth": {str(n): v for n, v in self.growth.items()}}


def propagation_obstruction(f10, f20, m2: float, n: int) -> complex:
    """f_{2,0}(n, n) + 2 f_{1,0}(2n) / (m2 n^2 - 2)."""
    return complex(f20((n, n)) + 2 * f10(2 * n) / (m2 * n * n - 2))


def propagation_failure_witness(f10, f20, m2: float, n_values, tol: float = 1e-12) -> PropagationWitness:
    """Frequencies ruling out partial order of the limit pair (f_1, f_2) at all times.

    f10 takes an int, f20 a pair; only |n| > sqrt(2/m2) are admissible.
    growth[n] = n^2 |quantity| detects polynomial-rate non-vanishing.
    """
    thr = math.sqrt(2.0 / m2)
    wit, q, growth = [], {}, {}
    for n in n_values:
        n = int(n)
        if abs(n) <= thr:
            continue
        v = propagation_obstruction(f10, f20, m2, n)
        q[n] = abs(v)
        growth[n] = n * n * abs(v)
        if abs(v) > tol:
            wit.append(n)
    return PropagationWitness(wit, q, growth, thr)
