"""Explicit constants and inequality checks for the convergence estimates.

Covers the N thresholds, the epsilon/alpha conditions, the constants of the
finite-N to limit and limit to stationary estimates, level-set maps for the
initial-data terms, and the quadratic-sum lemma.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .interaction import default_alpha, tau_N
from .limit_dynamics import b_bound_constants, ell_bounds, limit_distance_constant

E = math.e


# level sets

def level_sets(k: int, r: int) -> list:
    """All r-tuples of positive integers summing to k, in lexicographic order."""
    if not 1 <= r <= k:
        raise ValueError(f"r must lie in 1..{k}, got {r}")
    out = []
    for cuts in itertools.combinations(range(1, k), r - 1):
        edges = (0,) + cuts + (k,)
        out.append(tuple(edges[i + 1] - edges[i] for i in range(r)))
    return sorted(out)


def s_map(p, sigma, n) -> tuple:
    """Consecutive block sums (sizes p) of n permuted by sigma (0-based)."""
    k = len(n)
    if sorted(sigma) != list(range(k)):
        raise ValueError(f"{sigma} is not a permutation of 0..{k - 1}")
    if any(x < 1 for x in p) or sum(p) != k:
        raise ValueError(f"{p} is not a composition of {k}")
    perm = [n[s] for s in sigma]
    out, pos = [], 0
    for size in p:
        out.append(sum(perm[pos:pos + size]))
        pos += size
    return tuple(out)


def level_set_images(n) -> list:
    """Distinct s_p^sigma(n) over r < k, p in L_k(r), sigma in S_k."""
    k = len(n)
    seen = set()
    for r in range(1, k):
        for p in level_sets(k, r):
            for sigma in itertools.permutations(range(k)):
                seen.add(s_map(p, sigma, n))
    return sorted(seen, key=lambda x: (len(x), x))


# quadratic sums

@lru_cache(maxsize=None)
def zeta_three_halves(M: int = 1000) -> float:
    """zeta(3/2) by Euler-Maclaurin with cutoff M."""
    s = 1.5
    head = math.fsum(n ** -s for n in range(1, M))
    tail = M ** (1 - s) / (s - 1) + 0.5 * M ** -s + s * M ** (-s - 1) / 12 \
        - s * (s + 1) * (s + 2) * M ** (-s - 3) / 720
    return head + tail


def quadratic_sum_rhs(m: float, K: int) -> float:
    if m <= 0:
        raise ValueError("m must be positive")
    x = K / m
    if abs(x - round(x)) < 1e-12:
        first = 6.0 / m
    else:
        fl = math.floor(x)
        first = 6.0 / min(K - m * fl, m * (fl + 1) - K)
    return first + 16.0 / m * zeta_three_halves()


def quadratic_sum_brute(m: float, K: int, A: int, B: int, M: int = 10 ** 6) -> float:
    """Sum over |n| <= M of 1/|m(n^2 + A n + B) + K| plus a rigorous tail bound."""
    n = np.arange(-M, M + 1, dtype=np.float64)
    d = np.abs(m * (n * n + A * n + B) + K)
    d = d[d > 1e-9 * max(1.0, abs(K))]
    head = math.fsum(1.0 / d)
    c = 1.0 - abs(A) / M - (abs(B) + abs(K) / m) / M ** 2
    return head + 2.0 / (m * c * M)


@dataclass
class QuadraticSumResult:
    m: float
    K: int
    bound: float
    brute: float
    worst_AB: tuple

    @property
    def passed(self) -> bool:
        return self.brute <= self.bound


def quadratic_sum_bound(m: float, K: int, AB=((0, 0),), M: int = 10 ** 6) -> QuadraticSumResult:
    bound = quadratic_sum_rhs(m, K)
    worst, arg = -math.inf, None
    for A, B in AB:
        v = quadratic_sum_brute(m, K, int(A), int(B), M)
        if v > worst:
            worst, arg = v, (int(A), int(B))
    return QuadraticSumResult(m, K, bound, worst, arg)


# constants ledger

def kappa(l: int) -> int:
    return 3 if l == 3 else 2


def _moment_exponent(l: int) -> int:
    return min(l // 2, 2)


@dataclass
class ConstantsLedger:
    N: int
    k: int
    l: int
    p: float
    q: float
    lam: float
    m2: float
    ml: float
    m3: float
    m4: float
    g_norm: float
    eps: float
    alpha: float
    tau_N: float
    N_0: float
    N_1: float
    frak_N0: float
    required_N: float
    gamma: float
    kappa: int
    alpha_cap: float
    alpha_floor: float
    e1: float
    e2: float
    e3: float
    c1: float
    c2: float
    c3: float
    c4: float
    ell: list
    ell_products: list
    frak_c: dict
    calC: dict
    C: dict
    D: dict
    thresholds: dict = field(default_factory=dict)

    @property
    def hypotheses_met(self) -> bool:
        return all(self.thresholds.values())

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("frak_c", "calC", "C", "D"):
            d[key] = {str(a): b for a, b in d[key].items()}
        d["hypotheses_met"] = self.hypotheses_met
        return d


def constants_ledger(gen, sched, k: int, l=None) -> ConstantsLedger:
    """Every explicit constant for order k at the schedule's N and alpha."""
    l = gen.l if l is None else int(l)
    if l < 3:
        raise ValueError("l must be at least 3")
    N, lam, eps = sched.N, sched.lam, sched.eps
    alpha = sched.alpha if sched.alpha else default_alpha(N, l)
    q, gn = gen.q, gen.lp_norm()
    m2, m3, m4, ml = gen.moment(2), gen.moment(3), gen.moment(4), gen.moment(l)
    pil = math.pi ** l
    mexp = _moment_exponent(l)
    root = (4 * ml) ** (1 / l) + 2 * math.pi
    Qg = 4 ** (2 * (q + 2)) * gn ** (2 * q) * root ** 2
    Nl = N ** ((2 - l) / 2)

    N0 = max((2 * ml) ** (l / 2) / math.pi ** 2, (32 * ml / (pil * max(8, m2))) ** (2 / (l - 2)))
    N1 = max(N0, 2 * k, (96 * ml * k / (pil * m2)) ** (2 / (l - 2)))
    if l == 3:
        cap = min(4 ** (q + 1) * gn ** q, m2 / (8 * m3), 1.0)
    else:
        cap = min(4 ** (q + 1) * gn ** q, math.sqrt(m2 / (2 * m4)), 1.0)
    floor_q = 4 ** (2 * (q + 3)) * ml * gn ** (2 * q) * root ** 2 / math.pi ** (l + 2)
    expo = 1.0 / (l / 2 - 2 / (2 + mexp))
    fN0 = max(floor_q ** expo, cap ** (-(3 if l == 3 else 4)))
    thmN = max(fN0, N1)
    gamma = min(math.pi ** 2 / (2 * Qg), m2 / 2)

    if l == 3:
        e1 = 4 / (3 * pil * m2 * E) * (12 * ml * Nl + pil * m3 * alpha)
        e2 = 8 * (12 * k * ml * Nl + pil * m3 * alpha) / (3 * pil * m2 * E)
        e3 = (24 * k * ml * Nl + 2 * pil * m3 * alpha + 3 * pil * m2) / (6 * pil)
        c1 = 4 * max(12 * ml, pil * m3) / (3 * pil * m2 * E)
        zeta_c = max(24 * ml, 2 * pil * m3, 3 * pil * m2) / (6 * pil)
    else:
        e1 = (48 * ml * Nl + pil * m4 * alpha ** 2) / (3 * pil * m2 * E)
        e2 = 2 * (48 * k * ml * Nl + pil * m4 * alpha ** 2) / (3 * pil * m2 * E)
        e3 = (96 * k * ml * Nl + 2 * pil * m4 * alpha ** 2 + 12 * pil * m2) / (24 * pil)
        c1 = max(48 * ml, pil * m4) / (3 * pil * m2 * E)
        zeta_c = max(96 * ml, 2 * pil * m4, 12 * pil * m2) / (24 * pil)

    def c2_at(j):
        return (2 + j * (j + 1)) * 4 * Qg / math.pi ** 2 + 8 / m2

    c3 = max(2 * c1, 32 / E ** 2, 2 * m2 / E, 16 * m2 ** 2 / E ** 2)
    c4 = max(zeta_c, 192 * c1 / m2, 16 / E, 256 / (m2 * E ** 2), 128 * m2 / E ** 2, 2.0)
    frak = {1: c1}
    for j in range(1, k):
        frak[j + 1] = c2_at(j) + c3 + c4 + 2 * frak[j] + 4 * Qg / math.pi ** 2 + 4 / m2
    calC = {j: (j * j + j + 3) * frak[j] for j in frak}
    ells, prods = ell_bounds(k, m2)
    C = b_bound_constants(k, m2) if k >= 2 else {}
    D = {j: limit_distance_constant(j, m2) for j in range(1, k + 1)}
    thresholds = {
        "N>=N_1": N >= N1,
        "N>=frak_N0": N >= fN0,
        "alpha<=cap": alpha <= cap,
        "N^(l/2) alpha^2 >= floor": N ** (l / 2) * alpha ** 2 >= floor_q,
        "critical_scaling": abs(N * eps * eps - 1) < 1e-12,
    }
    return ConstantsLedger(
        N=N, k=k, l=l, p=gen.p, q=q, lam=lam, m2=m2, ml=ml, m3=m3, m4=m4, g_norm=gn,
        eps=eps, alpha=alpha, tau_N=tau_N(gen, eps), N_0=N0, N_1=N1, frak_N0=fN0,
        required_N=thmN, gamma=gamma, kappa=kappa(l), alpha_cap=cap, alpha_floor=floor_q,
        e1=e1, e2=e2, e3=e3, c1=c1, c2=c2_at(k), c3=c3, c4=c4, ell=ells,
        ell_products=prods, frak_c=frak, calC=calC, C=C, D=D, thresholds=thresholds)


# inequality reports

@dataclass
class BoundCheck:
    index: tuple
    t: float
    lhs: float
    rhs: float
    name: str = ""

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class BoundReport:
    name: str
    constants: dict
    checks: list
    informational: bool = False

    @property
    def violations(self) -> int:
        return sum(not c.passed for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"name": self.name, "informational": self.informational,
                "passed": self.passed, "violations": self.violations,
                "constants": self.constants,
                "checks": [{"name": c.name, "index": list(c.index), "t": c.t, "lhs": c.lhs,
                            "rhs": c.rhs, "pass": c.passed, "slack": c.slack}
                           for c in self.checks]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "index", "t", "lhs", "rhs", "pass", "slack"])
        for c in self.checks:
            w.writerow([c.name, " ".join(map(str, c.index)), repr(c.t), repr(c.lhs),
                        repr(c.rhs), int(c.passed), repr(c.slack)])
        return buf.getvalue()


def limit_tail(t: float, lam: float, m2: float) -> float:
    """e^{-2 lambda t} / (1 - e^{-2 lambda t}) + e^{-lambda m2 t / 2}."""
    x = math.exp(-2 * lam * t)
    return x / (1 - x) + math.exp(-lam * m2 * t / 2)


def limit_distance_check(lim, hier, times, indices=None) -> BoundReport:
    """|f_k(t) - f_{k,inf}| <= D_k (e^{-2 lam t}/(1 - e^{-2 lam t}) + e^{-lam m2 t/2})."""
    if lim.regime != "critical":
        raise ValueError("needs a critical-regime limit solution")
    if float(lim.m2) != float(hier.m2):
        raise ValueError("m2 mismatch between solution and hierarchy")
    times = [float(t) for t in times if t > 0]
    Dk = limit_distance_constant(lim.k, lim.m2)
    checks = []
    for n in (lim.indices() if indices is None else indices):
        n = tuple(n)
        vals = lim.values(n, times)
        target = hier.f_infty_hat(n)
        for t, v in zip(times, vals):
            checks.append(BoundCheck(n, t, float(abs(v - target)),
                                     Dk * limit_tail(t, lim.lam, float(lim.m2)), "limit_to_stationary"))
    return BoundReport("limit_distance", {"D_k": Dk, "k": lim.k, "m2": float(lim.m2)}, checks)


def initial_gap_terms(fin_family, lim_family, n, N):
    """Initial gap at n and the weighted level-set maximum of lower-order gaps."""
    k = len(n)
    g0 = abs(fin_family.coeff(n) - lim_family.coeff(n))
    worst = 0.0
    for m in level_set_images(n):
        worst = max(worst, abs(fin_family.coeff(m) - lim_family.coeff(m)))
    return g0, (N / (N - 1)) ** (k - 1) * (k - 1) * worst


def finite_limit_rhs(led: ConstantsLedger, k: int, t: float, gap0: float, level: float) -> float:
    """Right side of the finite-N to limit estimate at order k."""
    lam, N, a, l = led.lam, led.N, led.alpha, led.l
    Qg = 4 ** (2 * (led.q + 2)) * led.g_norm ** (2 * led.q) * \
        ((4 * led.ml) ** (1 / l) + 2 * math.pi) ** 2
    Nl = N ** ((2 - l) / 2)
    mexp = _moment_exponent(l)
    decay = math.exp(-lam * k * (k - 1) * t) * (
        math.exp(-lam * N * a * a * math.pi ** 2 * t / (2 * Qg)) + math.exp(-lam * led.m2 * N * a * a * t / 2))
    poly = 1 / N + (k * Nl + 1) * a * a + k * Nl + a ** mexp + k * (k - 1) / (N * a * a)
    return math.exp(-lam * (2 * k * (k - 1) + led.m2) * t / 2) * gap0 + level + decay + led.frak_c[k] * poly


def quantitative_rhs(led: ConstantsLedger, k: int, t: float, gap0: float, level: float) -> float:
    lam, N = led.lam, led.N
    root = N ** (1.0 / led.kappa)
    return (gap0 + level + 2 * math.exp(-lam * k * (k - 1) * t) * math.exp(-lam * led.gamma * root * t)
            + led.calC[k] / root + led.D[k] * limit_tail(t, lam, led.m2))


def finite_distance_check(fin, lim, hier, ledger: ConstantsLedger, times, indices=None,
                          lim_initial=None) -> BoundReport:
    """|F_{N,k}(t) - f_{k,inf}| against the quantitative estimate, plus the
    intermediate finite-N to f_k(t) estimate. Informational when N is below
    the thresholds."""
    if fin.k != lim.k:
        raise ValueError("order mismatch")
    k = fin.k
    lim_family = lim.initial if lim_initial is None else lim_initial
    times = [float(t) for t in times if t > 0]
    checks = []
    for n in (fin.indices() if indices is None else indices):
        n = tuple(n)
        gap0, level = initial_gap_terms(fin.initial, lim_family, n, fin.sched.N)
        fv = fin.values(n, times)
        lv = lim.values(n, times)
        target = hier.f_infty_hat(n)
        for t, a, b in zip(times, fv, lv):
            checks.append(BoundCheck(n, t, float(abs(a - target)),
                                     quantitative_rhs(ledger, k, t, gap0, level), "quantitative"))
            checks.append(BoundCheck(n, t, float(abs(a - b)),
                                     finite_limit_rhs(ledger, k, t, gap0, level), "finite_to_limit"))
    return BoundReport("finite_distance", ledger.to_json(), checks,
                       informational=not ledger.hypotheses_met)
