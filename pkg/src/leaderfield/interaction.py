"""Interaction generating functions g and the rescaled torus noise g_eps.

The follower noise is eps * Z with Z ~ g conditioned on [-pi/eps, pi/eps].
Its Fourier coefficients are

    g_hat_eps(n) = int_{-pi/eps}^{pi/eps} g(x) cos(n eps x) dx
                   / int_{-pi/eps}^{pi/eps} g(x) dx.

This module also evaluates the low/high frequency estimates for g_hat_eps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

QUAD_EPSABS = 1e-12


class QuadratureError(RuntimeError):
    pass


class InteractionGenerator:
    """Even probability density on the real line.

    Subclasses supply pdf, absolute moments, the L^p norm, the Fourier
    transform and a sampler. l is the moment order used by the bounds and
    p the integrability exponent (q is its Holder conjugate).
    """

    family = "abstract"

    def __init__(self, p: float = 2.0, l: int = 4):
        if p <= 1:
            raise ValueError("p must exceed 1")
        if l < 3:
            raise ValueError("moment order l must be at least 3")
        self.p = float(p)
        self.l = int(l)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def m2(self) -> float:
        return self.moment(2)

    @property
    def ml(self) -> float:
        return self.moment(self.l)

    def m2_exact(self):
        """m_2 as a Fraction when it is rational, else None."""
        return None

    def params(self) -> dict:
        return {}

    def spec(self) -> dict:
        return {"family": self.family, "params": self.params(), "p": self.p, "l": self.l}

    def pdf(self, x):
        raise NotImplementedError

    def moment(self, order: int) -> float:
        raise NotImplementedError

    def lp_norm(self) -> float:
        raise NotImplementedError

    def fourier(self, xi: float) -> float:
        """int g(x) cos(xi x) dx over the whole line."""
        raise NotImplementedError

    def sample(self, rng, size):
        raise NotImplementedError

    def truncated_cos_integral(self, half_width: float, xi: float) -> float:
        """int_{-L}^{L} g(x) cos(xi x) dx by adaptive quadrature."""
        f = lambda x: float(self.pdf(x))
        if xi == 0:
            val, err = integrate.quad(f, 0.0, half_width, epsabs=QUAD_EPSABS, limit=400)
        else:
            val, err = integrate.quad(f, 0.0, half_width, weight="cos", wvar=xi,
                                      epsabs=QUAD_EPSABS, limit=400)
        if not np.isfinite(val) or err > 1e-8:
            raise QuadratureError(f"quadrature did not converge (err={err:.3g})")
        return 2.0 * val


class UniformG(InteractionGenerator):
    """Uniform density on [-w/2, w/2]; w=1 gives m_2 = 1/12."""

    family = "uniform"

    def __init__(self, width: float = 1.0, p: float = 2.0, l: int = 4):
        super().__init__(p, l)
        self.width = float(width)

    def params(self):
        return {"width": self.width}

    def m2_exact(self):
        w = Fraction(self.width).limit_denominator(10 ** 6)
        if float(w) != self.width:
            return None
        return w * w / 12

    def pdf(self, x):
        return np.where(np.abs(x) <= self.width / 2, 1.0 / self.width, 0.0)

    def moment(self, order):
        return (self.width / 2) ** order / (order + 1)

    def lp_norm(self):
        return self.width ** ((1.0 - self.p) / self.p)

    def fourier(self, xi):
        h = 0.5 * xi * self.width
        return 1.0 if h == 0 else math.sin(h) / h

    def truncated_cos_integral(self, half_width, xi):
        # closed form; the support may be cut by the truncation window
        a = min(half_width, self.width / 2)
        if xi == 0:
            return 2 * a / self.width
        return 2 * math.sin(xi * a) / (xi * self.width)

    def sample(self, rng, size):
        return rng.uniform(-self.width / 2, self.width / 2, size)


class GaussianG(InteractionGenerator):
    family = "gaussian"

    def __init__(self, sigma: float = 1.0, p: float = 2.0, l: int = 4):
        super().__init__(p, l)
        self.sigma = float(sigma)

    def params(self):
        return {"sigma": self.sigma}

    def m2_exact(self):
        s = Fraction(self.sigma).limit_denominator(10 ** 6)
        return s * s if float(s) == self.sigma else None

    def pdf(self, x):
        s = self.sigma
        return np.exp(-0.5 * (np.asarray(x) / s) ** 2) / (s * math.sqrt(2 * math.pi))

    def moment(self, order):
        s = self.sigma
        return s ** order * 2 ** (order / 2) * math.gamma((order + 1) / 2) / math.sqrt(math.pi)

    def lp_norm(self):
        s, p = self.sigma, self.p
        return ((2 * math.pi * s * s) ** ((1 - p) / 2) / math.sqrt(p)) ** (1 / p)

    def fourier(self, xi):
        return math.exp(-0.5 * (self.sigma * xi) ** 2)

    def truncated_cos_closed(self, half_width, xi):
        s = self.sigma
        z = (half_width + 1j * s * s * xi) / (s * math.sqrt(2))
        return float(math.exp(-0.5 * (s * xi) ** 2) * special.erf(z).real)

    def sample(self, rng, size):
        return self.sigma * rng.standard_normal(size)


class LaplaceG(InteractionGenerator):
    family = "laplace"

    def __init__(self, scale: float = 1.0, p: float = 2.0, l: int = 4):
        super().__init__(p, l)
        self.scale = float(scale)

    def params(self):
        return {"scale": self.scale}

    def m2_exact(self):
        b = Fraction(self.scale).limit_denominator(10 ** 6)
        return 2 * b * b if float(b) == self.scale else None

    def pdf(self, x):
        b = self.scale
        return np.exp(-np.abs(x) / b) / (2 * b)

    def moment(self, order):
        return self.scale ** order * math.gamma(order + 1)

    def lp_norm(self):
        b, p = self.scale, self.p
        return ((2 * b) ** (1 - p) / p) ** (1 / p)

    def fourier(self, xi):
        return 1.0 / (1.0 + (self.scale * xi) ** 2)

    def truncated_cos_closed(self, half_width, xi):
        b = self.scale
        z = 1.0 / b - 1j * xi
        return float(((1 - np.exp(-z * half_width)) / z).real / b)

    def sample(self, rng, size):
        return rng.laplace(0.0, self.scale, size)


class TabulatedG(InteractionGenerator):
    """Custom density from (x, g(x)) samples; symmetrized, normalized, trapezoid moments."""

    family = "custom"

    def __init__(self, x, g, p: float = 2.0, l: int = 4):
        super().__init__(p, l)
        x = np.asarray(x, dtype=float)
        g = np.asarray(g, dtype=float)
        order = np.argsort(x)
        x, g = x[order], g[order]
        # evenness is a hypothesis of the model; enforce it on the table
        grid = np.union1d(x, -x)
        sym = 0.5 * (np.interp(grid, x, g, 0, 0) + np.interp(-grid, x, g, 0, 0))
        self.x = grid
        self.g = sym / np.trapezoid(sym, grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (self.g[1:] + self.g[:-1]) * np.diff(grid))])
        self.cdf = cdf / cdf[-1]

    @classmethod
    def from_csv(cls, path, p: float = 2.0, l: int = 4):
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return cls(data[:, 0], data[:, 1], p, l)

    def params(self):
        return {"points": int(self.x.size)}

    def pdf(self, x):
        return np.interp(x, self.x, self.g, 0.0, 0.0)

    def moment(self, order):
        return float(np.trapezoid(np.abs(self.x) ** order * self.g, self.x))

    def lp_norm(self):
        return float(np.trapezoid(self.g ** self.p, self.x)) ** (1 / self.p)

    def fourier(self, xi):
        return float(np.trapezoid(self.g * np.cos(xi * self.x), self.x))

    def truncated_cos_integral(self, half_width, xi):
        mask = np.abs(self.x) <= half_width
        return float(np.trapezoid(self.g[mask] * np.cos(xi * self.x[mask]), self.x[mask]))

    def sample(self, rng, size):
        return np.interp(rng.uniform(0.0, 1.0, size), self.cdf, self.x)


def make_generator(spec: dict) -> InteractionGenerator:
    family = spec.get("family", "uniform")
    params = dict(spec.get("params", {}))
    p = spec.get("p", 2.0)
    l = spec.get("l", spec.get("moments_l", 4))
    if family == "uniform":
        return UniformG(params.get("width", 1.0), p, l)
    if family == "gaussian":
        return GaussianG(params.get("sigma", 1.0), p, l)
    if family == "laplace":
        return LaplaceG(params.get("scale", 1.0), p, l)
    if family in ("custom", "custom-tabulated", "tabulated"):
        if "csv" in params:
            return TabulatedG.from_csv(params["csv"], p, l)
        return TabulatedG(params["x"], params["g"], p, l)
    raise ValueError(f"unknown interaction family {family!r}")


# rescaled coefficients

@lru_cache(maxsize=None)
def _g_hat_cached(gen, eps, n):
    if n == 0:
        return 1.0
    half = math.pi / eps
    num = gen.truncated_cos_integral(half, abs(n) * eps)
    den = gen.truncated_cos_integral(half, 0.0)
    val = num / den
    if not -1.0 - 1e-12 <= val <= 1.0 + 1e-12:
        raise QuadratureError(f"g_hat({n}) = {val} outside [-1, 1]")
    return min(1.0, max(-1.0, val))


def g_hat(gen: InteractionGenerator, eps: float, n) -> float:
    """Fourier coefficient of the rescaled torus density g_eps at n."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if np.ndim(n):
        return np.array([_g_hat_cached(gen, float(eps), int(x)) for x in np.ravel(n)]).reshape(np.shape(n))
    return _g_hat_cached(gen, float(eps), int(n))


def fourier_transform_g(gen: InteractionGenerator, xi: float) -> float:
    return gen.fourier(xi)


def tau_N(gen: InteractionGenerator, eps: float) -> float:
    """2 eps^l m_l / (pi^l - eps^l m_l)."""
    l, ml = gen.l, gen.ml
    a = eps ** l * ml
    if a >= math.pi ** l:
        raise ValueError("scale too coarse: eps^l m_l >= pi^l")
    return 2 * a / (math.pi ** l - a)


@dataclass
class ScalingSchedule:
    N: int
    eps: float
    regime: str = "critical"
    alpha: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.regime == "critical":
            if self.eps != 1.0 / math.sqrt(self.N):
                raise ValueError("critical regime requires eps = 1/sqrt(N)")
        elif self.regime in ("order", "chaos"):
            ne2 = self.N * self.eps ** 2
            if (self.regime == "order" and ne2 >= 1) or (self.regime == "chaos" and ne2 <= 1):
                warnings.warn(f"N eps^2 = {ne2:.3g} looks inconsistent with regime {self.regime}")
        else:
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def critical(cls, N: int, lam: float = 1.0, l: int = 4, alpha=None) -> "ScalingSchedule":
        if alpha is None:
            alpha = default_alpha(N, l)
        return cls(N, 1.0 / math.sqrt(N), "critical", alpha, lam)

    def to_json(self):
        return {"N": self.N, "eps": self.eps, "regime": self.regime,
                "alpha": self.alpha, "lam": self.lam}


def default_alpha(N: int, l: int) -> float:
    """alpha_N = N^(-1/(2 + min(floor(l/2), 2)))."""
    return N ** (-1.0 / (2 + min(l // 2, 2)))


def check_scale(gen, eps):
    if not eps < math.pi / gen.ml ** (1.0 / gen.l):
        raise ValueError("eps must be below pi / m_l^(1/l)")


@dataclass
class LowFreqResult:
    n: int
    residual: float
    bound: float

    @property
    def passed(self):
        return self.residual <= self.bound


def low_freq_residual(gen, sched: ScalingSchedule, n: int) -> LowFreqResult:
    """|g_hat - 1 + m_2 eps^2 n^2 / 2| against tau_N plus the moment remainder."""
    eps = sched.eps
    check_scale(gen, eps)
    res = abs(g_hat(gen, eps, n) - 1.0 + 0.5 * gen.m2 * (eps * n) ** 2)
    if gen.l == 3:
        extra = gen.moment(3) / 3 * abs(eps * n) ** 3
    else:
        extra = gen.moment(4) / 12 * (eps * n) ** 4
    return LowFreqResult(int(n), res, tau_N(gen, eps) + extra)


def high_freq_denominator(gen, alpha):
    q = gen.q
    return 2 * 4 ** (2 * (q + 1) + 1) * gen.lp_norm() ** (2 * q) * \
        ((4 * gen.ml) ** (1 / gen.l) * alpha + 2 * math.pi) ** 2


@dataclass
class HighFreqResult:
    gap: float
    worst: float
    worst_n: int
    n_checked: list = field(default_factory=list)

    @property
    def passed(self):
        return self.worst <= self.gap


def high_freq_gap(gen, sched: ScalingSchedule, n_values=None) -> HighFreqResult:
    """Guaranteed upper bound on g_hat(n) - 1 for |n| >= alpha/eps, and a sweep."""
    eps, alpha = sched.eps, sched.alpha
    check_scale(gen, eps)
    if alpha > 4 ** (gen.q + 1) * gen.lp_norm() ** gen.q:
        raise ValueError("alpha exceeds 4^(q+1) ||g||_p^q")
    gap = tau_N(gen, eps) - alpha ** 2 * math.pi ** 2 / high_freq_denominator(gen, alpha)
    if n_values is None:
        lo = max(1, math.ceil(alpha / eps))
        hi = max(int(4 * alpha / eps), lo + 64)
        n_values = list(range(lo, hi + 1))
    n_values = [int(n) for n in n_values if abs(n) * eps >= alpha]
    worst, worst_n = -math.inf, None
    for n in n_values:
        v = g_hat(gen, eps, n) - 1.0
        if v > worst:
            worst, worst_n = v, n
    return HighFreqResult(gap, worst, worst_n, n_values)


def beta_threshold(gen, alpha: float) -> float:
    """Largest beta allowed by the away-from-zero estimate."""
    q = gen.q
    den = 4 ** (2 * (q + 1)) * gen.lp_norm() ** (2 * q) * \
        ((4 * gen.ml) ** (1 / gen.l) * alpha + 2 * math.pi) ** 2
    return min(0.5, alpha ** 2 * math.pi ** 2 / den)


def away_from_zero_check(gen, alpha: float, xis) -> bool:
    """F g(xi) - 1 <= -beta/2 for |xi| >= alpha."""
    beta = beta_threshold(gen, alpha)
    return all(gen.fourier(x) - 1.0 <= -beta / 2 for x in xis if abs(x) >= alpha)


class RejectionBudgetError(RuntimeError):
    pass


def sample_noise(gen, eps: float, rng, size=None, budget: int = 1000):
    """eps * Z with Z ~ g conditioned on [-pi/eps, pi/eps], in [-pi, pi)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    half = math.pi / eps
    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    filled = 0
    for _ in range(budget):
        z = gen.sample(rng, n - filled)
        z = z[np.abs(z) <= half]
        out[filled:filled + z.size] = z
        filled += z.size
        if filled == n:
            break
    else:
        raise RejectionBudgetError("rejection budget exceeded")
    x = eps * out
    x = np.where(x >= math.pi, -math.pi, x)
    if size is None:
        return float(x[0])
    return x.reshape(size)
