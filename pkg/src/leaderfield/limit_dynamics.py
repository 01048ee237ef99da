"""Mean-field limit dynamics in the critical regime and its stationary states.

Limit hierarchy (lambda = jump intensity, m2 = second moment of g):

    d/dt f_k(n) = -lambda (2k(k-1) + m2 |n|^2) / 2 f_k(n)
                  + 2 lambda sum_{i<j} f_{k-1}(fold_ij n)

Its long-time limit is f_{k,inf}(n) = delta_0(sum n) a_k(n), a partially
ordered state with a uniform leader and deviation law nu_{k-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._engine import HierarchySolver, MarginalSolution, fold
from .exppoly import RATE_RTOL, ExpPolynomial
from .finite_system import as_family
from .spectral import SpectralCoefficients, Verdict, default_radius, density_eval

RESONANCE_ATOL = 1e-9
CROSS_CHECK_TOL = 1e-10


class HierarchyValidationError(RuntimeError):
    pass


def exact_m2(m2):
    """m2 as a Fraction if it is (numerically) rational, else None."""
    if isinstance(m2, Fraction):
        return m2
    if isinstance(m2, int):
        return Fraction(m2)
    f = Fraction(float(m2)).limit_denominator(10 ** 6)
    if abs(float(f) - float(m2)) <= 1e-15 * max(1.0, abs(float(m2))):
        return f
    return None


def canonical(n: tuple) -> tuple:
    """Representative of n under permutations and global sign flip."""
    a = tuple(sorted(n))
    b = tuple(sorted(-x for x in n))
    return min(a, b)


class LimitMarginalSolution(MarginalSolution):
    kind = "limit"

    def __init__(self, k, n_max, solver, initial, m2, lam, regime="critical"):
        super().__init__(k, n_max, solver, initial)
        self.m2 = m2
        self.lam = lam
        self.regime = regime


def limit_rate(n, m2, lam: float = 1.0) -> float:
    """lambda (2k(k-1) + m2 |n|^2) / 2, exact when m2 is rational."""
    k = len(n)
    q = exact_m2(m2)
    s2 = sum(x * x for x in n)
    if q is not None:
        return lam * float(Fraction(2 * k * (k - 1)) / 2 + q * s2 / 2)
    return lam * (2 * k * (k - 1) + float(m2) * s2) / 2


def evolve_limit_marginal(init, m2, lam: float, k: int, n_max=None,
                          rtol: float = RATE_RTOL) -> LimitMarginalSolution:
    """Closed-form trajectories of the order-k marginal of the limit hierarchy."""
    if m2 <= 0:
        raise ValueError("m2 must be positive")
    family = as_family(init)
    solver = HierarchySolver(lambda n: limit_rate(n, m2, lam),
                             lambda n, i, j: 2.0 * lam, family.coeff, rtol)
    radius = default_radius(k) if n_max is None else n_max
    return LimitMarginalSolution(k, radius, solver, family, m2, lam)


def evolve_order_regime(init, lam: float, k: int, n_max=None,
                        rtol: float = RATE_RTOL) -> LimitMarginalSolution:
    """Order regime: rate lambda k(k-1), the gain couples two followers exactly."""
    family = as_family(init)
    solver = HierarchySolver(lambda n: lam * len(n) * (len(n) - 1),
                             lambda n, i, j: 2.0 * lam, family.coeff, rtol)
    radius = default_radius(k) if n_max is None else n_max
    return LimitMarginalSolution(k, radius, solver, family, None, lam, regime="order")


# a_k coefficients

class ACoefficients:
    """Lazy a_k(n) with exact Fractions when m2 is rational.

    a_1 = 1; for k >= 2 a_k(n) = 0 on the resonance set
    2k(k-1) + m2 |n|^2 = m2 (sum n)^2, otherwise
    a_k(n) = 4 sum_{i<j} a_{k-1}(fold_ij n) / (2k(k-1) + m2 (|n|^2 - (sum n)^2)).
    """

    def __init__(self, m2, use_canonical: bool = True):
        if m2 <= 0:
            raise ValueError("m2 must be positive")
        self.m2 = m2
        self.exact = exact_m2(m2)
        self.use_canonical = use_canonical
        self._memo = {}

    def denominator(self, n):
        k = len(n)
        s2 = sum(x * x for x in n)
        s = sum(n)
        m = self.exact if self.exact is not None else float(self.m2)
        return 2 * k * (k - 1) + m * (s2 - s * s)

    def is_resonant(self, n) -> bool:
        if len(n) < 2:
            return False
        d = self.denominator(n)
        return d == 0 if self.exact is not None else abs(d) < RESONANCE_ATOL

    def raw(self, n):
        n = tuple(int(x) for x in n)
        if len(n) == 1:
            return Fraction(1) if self.exact is not None else 1.0
        key = canonical(n) if self.use_canonical else n
        v = self._memo.get(key)
        if v is not None:
            return v
        if self.is_resonant(key):
            v = Fraction(0) if self.exact is not None else 0.0
        else:
            k = len(key)
            tot = sum((self.raw(fold(key, i, j)) for i in range(k) for j in range(i + 1, k)),
                      Fraction(0) if self.exact is not None else 0.0)
            v = 4 * tot / self.denominator(key)
        self._memo[key] = v
        return v

    def __call__(self, n) -> float:
        return float(self.raw(n))


@dataclass
class AHierarchy:
    m2: float
    coeffs: ACoefficients
    tables: dict = field(default_factory=dict)

    def value(self, n) -> float:
        return self.coeffs(n)


def a_coefficients(K: int, m2, truncation: int = 4, use_canonical: bool = True) -> AHierarchy:
    """a_1..a_K tabulated on the cube of the given radius (evaluated lazily beyond)."""
    ac = ACoefficients(m2, use_canonical)
    tables = {}
    for k in range(1, K + 1):
        r = min(truncation, default_radius(k))
        tables[k] = {n: ac(n) for n in _cube(k, r)}
    return AHierarchy(m2, ac, tables)


def _cube(k, r):
    import itertools
    return itertools.product(range(-r, r + 1), repeat=k)


def ell_bounds(K: int, m2):
    """(ell_1..ell_K, running products); |a_k| <= prod_{j<=k} ell_j."""
    q = exact_m2(m2)
    ells = [1.0]
    for k in range(2, K + 1):
        top = 2 * k * (k - 1)
        if q is not None:
            x = Fraction(top) / q
            if x.denominator == 1:
                ells.append(float(x))
                continue
            fl = math.floor(x)
            ells.append(top / float(min(top - q * fl, q * (fl + 1) - top)))
        else:
            x = top / m2
            if abs(x - round(x)) < RESONANCE_ATOL:
                ells.append(float(round(x)))
                continue
            fl = math.floor(x)
            ells.append(top / min(top - m2 * fl, m2 * (fl + 1) - top))
    prods = list(np.cumprod(ells))
    return ells, [float(p) for p in prods]


def b_bound_constants(K: int, m2, lam: float = 1.0) -> dict:
    """Uniform bounds C_k on the transient parts b_{h,k}, k = 2..K."""
    if K < 2:
        raise ValueError("K must be at least 2")
    m2 = float(m2)
    ells, prods = ell_bounds(K, m2)
    C = {2: 1 + max(ells[1], 4 / (m2 * math.e))}
    for k in range(3, K + 1):
        top = 2 * k * (k - 1)
        C[k] = max(1 + prods[k - 2] * max(ells[k - 1], top / (m2 * math.e)), k * C[k - 1] / 2)
    return C


def limit_distance_constant(k: int, m2) -> float:
    """D_k = max(C_k [k >= 2], prod_{j<=k} ell_j)."""
    _, prods = ell_bounds(k, m2)
    ck = b_bound_constants(k, m2)[k] if k >= 2 else 0.0
    return max(ck, prods[-1])


# a/b decomposition

@dataclass
class DecompositionEntry:
    index: tuple
    a_extracted: float | None
    a_exact: float
    b: dict
    max_b: float
    reconstruction_error: float


@dataclass
class DecompositionReport:
    k: int
    C_k: float
    entries: list
    a_tol: float

    @property
    def a_mismatch(self) -> float:
        gaps = [abs(e.a_extracted - e.a_exact) for e in self.entries if e.a_extracted is not None]
        return max(gaps, default=0.0)

    @property
    def max_b(self) -> float:
        return max((e.max_b for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return self.a_mismatch <= self.a_tol and self.max_b <= self.C_k + 1e-9

    def to_json(self):
        return {"k": self.k, "C_k": self.C_k, "a_mismatch": self.a_mismatch,
                "max_b": self.max_b, "passed": self.passed,
                "entries": [{"index": list(e.index), "a_extracted": e.a_extracted,
                             "a_exact": e.a_exact, "max_b": e.max_b,
                             "reconstruction_error": e.reconstruction_error} for e in self.entries]}


def shift_rates(ep: ExpPolynomial, delta: float) -> ExpPolynomial:
    """Multiply by e^{delta t}."""
    return ExpPolynomial.from_terms((c, b - delta, p) for c, b, p in ep.terms)


def decompose_ab(sol: LimitMarginalSolution, indices=None, times=None,
                 a_tol: float = 1e-9) -> DecompositionReport:
    """Split f_k(n,t) into sum_h e^{-lambda h(h-1)t} b_{h,k}(t) + a_k f_{1,0}(sum n) e^{-lambda m2 (sum n)^2 t/2}."""
    if sol.regime != "critical":
        raise ValueError("decomposition applies to the critical limit only")
    k, lam, m2 = sol.k, sol.lam, sol.m2
    if times is None:
        times = np.linspace(0.0, 10.0, 41)
    times = np.asarray(times, dtype=float)
    ac = ACoefficients(m2)
    ck = b_bound_constants(k, m2, lam)[k] if k >= 2 else 0.0
    if indices is None:
        indices = sol.indices()
    entries = []
    for n in indices:
        n = tuple(n)
        tags = sol.solver.tags(n)
        s = sum(n)
        stat_rate = limit_rate((s,), m2, lam)
        a_ext = None
        b = {}
        for tag, ep in tags.items():
            if tag == 1:
                if any(p != 0 or b_ != stat_rate for _, b_, p in ep.terms):
                    raise HierarchyValidationError(f"ungroupable stationary term at {n}: {ep.terms}")
                f10 = sol.initial.coeff((s,))
                coeff = ep.terms[0][0] if ep.terms else 0j
                if f10 is not None and abs(f10) > 1e-12:
                    a_ext = float((coeff / f10).real)
            else:
                floor_rate = lam * tag * (tag - 1)
                if any(b_ < floor_rate * (1 - 1e-12) - 1e-12 for _, b_, _ in ep.terms):
                    raise HierarchyValidationError(f"tag {tag} term decays too slowly at {n}")
                b[tag] = shift_rates(ep, floor_rate)
        max_b = max((float(np.max(np.abs(bb(times)))) for bb in b.values()), default=0.0)
        # reconstruction from the grouped pieces
        rec = np.zeros_like(times, dtype=complex)
        for tag, bb in b.items():
            rec += np.exp(-lam * tag * (tag - 1) * times) * bb(times)
        if 1 in tags:
            rec += tags[1](times)
        err = float(np.max(np.abs(rec - sol.coefficient(n)(times))))
        entries.append(DecompositionEntry(n, a_ext, ac(n), b, max_b, err))
    return DecompositionReport(k, ck, entries, a_tol)


# stationary hierarchy

class XiNu:
    """xi_k and nu_k coefficients, memoized over canonical representatives."""

    def __init__(self, m2, use_canonical: bool = True):
        self.m2 = float(m2)
        self.use_canonical = use_canonical
        self._xi = {}
        self._nu = {}

    def _key(self, n):
        return canonical(n) if self.use_canonical else n

    def xi(self, n) -> float:
        n = tuple(int(x) for x in n)
        k = len(n)
        if k == 1:
            return 1.0
        key = self._key(n)
        v = self._xi.get(key)
        if v is None:
            tot = sum(self.xi(fold(key, i, j)) for i in range(k) for j in range(i + 1, k))
            v = 4 * tot / (2 * k * (k - 1) + self.m2 * sum(x * x for x in key))
            self._xi[key] = v
        return v

    def nu(self, n) -> float:
        n = tuple(int(x) for x in n)
        if len(n) == 0:
            return 1.0
        key = self._key(n)
        v = self._nu.get(key)
        if v is None:
            k = len(key)
            s = sum(key)
            tot = 0.0
            for i in range(k):
                # replace n_i by minus the sum of the others
                m = key[:i] + (key[i] - s,) + key[i + 1:]
                tot += self.xi(m)
            den = 2 * k * (k + 1) + self.m2 * sum(x * x for x in key) + self.m2 * s * s
            v = 2 * (k + 1) * tot / den
            self._nu[key] = v
        return v


class StationaryHierarchy:
    """a_k, xi_k, nu_k and f_{k,inf} for k = 1..K."""

    def __init__(self, K: int, m2, radii=None):
        if K < 1:
            raise ValueError("K must be at least 1")
        self.K = int(K)
        self.m2 = m2
        self.radii = {k: default_radius(k) for k in range(1, K + 1)}
        if radii:
            self.radii.update({int(k): int(r) for k, r in radii.items()})
        self.acoef = ACoefficients(m2)
        self.xinu = XiNu(m2)
        self._nu_t = {}
        self._f_t = {}

    def a(self, n) -> float:
        return self.acoef(n)

    def xi(self, n) -> float:
        return self.xinu.xi(n)

    def nu_hat(self, n) -> float:
        return self.xinu.nu(n)

    def f_infty_hat(self, n) -> float:
        return float(sum(n) == 0) * self.acoef(n)

    def f_infty_via_nu(self, n) -> float:
        k = len(n)
        if sum(n) != 0:
            return 0.0
        return sum(self.nu_hat(n[:l] + n[l + 1:]) for l in range(k)) / k

    def _check_order(self, k):
        if not 1 <= k <= self.K:
            raise ValueError(f"order {k} outside 1..{self.K}")

    def nu(self, k: int) -> SpectralCoefficients:
        self._check_order(k)
        if k not in self._nu_t:
            self._nu_t[k] = SpectralCoefficients.from_function(
                k, self.radii[k], self.nu_hat, f"nu_{k}")
        return self._nu_t[k]

    def f_infty(self, k: int) -> SpectralCoefficients:
        self._check_order(k)
        if k not in self._f_t:
            self._f_t[k] = SpectralCoefficients.from_function(
                k, self.radii[k], self.f_infty_hat, f"f_inf_{k}")
        return self._f_t[k]

    def a_table(self, k: int) -> dict:
        self._check_order(k)
        return {n: self.a(n) for n in _cube(k, self.radii[k])}

    def xi_table(self, k: int) -> dict:
        self._check_order(k)
        return {n: self.xi(n) for n in _cube(k, self.radii[k])}

    def cross_validate(self, k: int, tol: float = CROSS_CHECK_TOL) -> float:
        """Largest gap between delta a_k and the nu-based formula on the stored cube."""
        self._check_order(k)
        worst = 0.0
        for n in _cube(k, self.radii[k]):
            if sum(n) != 0:
                continue
            gap = abs(self.a(n) - self.f_infty_via_nu(n))
            worst = max(worst, gap)
            if gap > tol:
                raise HierarchyValidationError(
                    f"f_inf cross-check failed at {n}: a={self.a(n)!r} nu-form={self.f_infty_via_nu(n)!r}")
        return worst

    def to_json(self) -> dict:
        return {"K": self.K, "m2": float(self.m2),
                "nu": {str(k): self.nu(k).to_json() for k in range(1, self.K + 1)},
                "f_infty": {str(k): self.f_infty(k).to_json() for k in range(1, self.K + 1)}}


def stationary_hierarchy(K: int, m2, radii=None, validate: bool = True) -> StationaryHierarchy:
    hier = StationaryHierarchy(K, m2, radii)
    if validate:
        for k in range(1, K + 1):
            hier.cross_validate(k)
    return hier


# densities

def h_series_terms(m2: float, tol: float) -> int:
    """Number of explicit terms so that the accelerated tail is below tol."""
    return max(8, int(math.ceil((8.0 / (3.0 * m2 * m2 * tol)) ** (1.0 / 3.0))))


def h_density(m2: float, grid, tol: float = 1e-12):
    """H(theta) = 1 + 4 sum_{n>=1} cos(n theta) / (m2 n^2 + 2).

    The 1/n^2 part of each coefficient is summed in closed form, leaving a
    remainder with terms O(n^-4) whose tail is at most 8 / (3 m2^2 M^3).
    """
    if m2 <= 0:
        raise ValueError("m2 must be positive")
    th = np.mod(np.asarray(grid, dtype=float) + math.pi, 2 * math.pi) - math.pi
    a = np.abs(th)
    base = (math.pi ** 2 / 6 - math.pi * a / 2 + a * a / 4) / m2
    M = h_series_terms(m2, tol)
    n = np.arange(1, M + 1, dtype=float)
    w = 2.0 / (m2 * n * n * (m2 * n * n + 2))
    rem = np.cos(np.multiply.outer(th, n)) @ w
    return 1.0 + 4.0 * (base - rem)


@dataclass
class NuDensity:
    values: np.ndarray
    summation: str
    min_value: float
    origin_value: float
    max_value: float

    @property
    def max_at_origin(self) -> bool:
        return self.origin_value >= self.max_value - 1e-9 * max(1.0, abs(self.max_value))


def nu_density(hier: StationaryHierarchy, k: int, grid, summation: str = "auto",
               neg_tol: float = 1e-8, tail_tol=None) -> NuDensity:
    """Density of nu_k on the grid (k-tuples). 'auto' falls back to Fejer sums if direct goes negative."""
    coeffs = hier.nu(k)
    if tail_tol is not None:
        shell = np.abs(coeffs.values).max(axis=None, initial=0.0,
                                          where=_shell_mask(coeffs.values.shape))
        if shell > tail_tol:
            raise ValueError(f"truncation tail {shell:.3g} exceeds {tail_tol:.3g}")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if k == 1 and grid.shape[1] != 1:
        grid = grid.reshape(-1, 1)
    origin = np.zeros((1, k))
    mode = "direct" if summation == "auto" else summation
    vals, _ = density_eval(coeffs, grid, mode)
    if summation == "auto" and vals.min() < -neg_tol:
        mode = "fejer"
        vals, _ = density_eval(coeffs, grid, mode)
    o, _ = density_eval(coeffs, origin, mode)
    res = NuDensity(vals, mode, float(vals.min()), float(o[0]), float(vals.max()))
    return res


def _shell_mask(shape):
    mask = np.zeros(shape, dtype=bool)
    for ax in range(len(shape)):
        idx = [slice(None)] * len(shape)
        idx[ax] = 0
        mask[tuple(idx)] = True
        idx[ax] = -1
        mask[tuple(idx)] = True
    return mask


def long_time_check(sol: LimitMarginalSolution, hier: StationaryHierarchy, t=None,
                    tol: float = 1e-8) -> Verdict:
    """f_k at t = 50/lambda against f_{k,inf} on every stored index."""
    t = 50.0 / sol.lam if t is None else t
    fails, worst = [], 0.0
    for n in sol.indices():
        gap = abs(sol.coefficient(n)(t) - hier.f_infty_hat(n))
        worst = max(worst, gap)
        if gap > tol:
            fails.append((n, gap))
    return Verdict(not fails, worst, fails)
