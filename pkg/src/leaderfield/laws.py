"""Laws on the circle and initial-data families for the marginal hierarchies.

A circle law knows its Fourier coefficients and how to sample itself.
An initial family returns the coefficient of its k-th marginal at any
frequency vector, so ordered (delta-coupled) data never gets truncated.
"""

from __future__ import annotations

import math

import numpy as np

from .spectral import SpectralCoefficients

TWO_PI = 2.0 * math.pi


def wrap_angle(x):
    """Map angles into [-pi, pi)."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y >= math.pi, -math.pi, y)
    return y if y.ndim else float(y)


class CircleLaw:
    name = "law"

    def coeff(self, n) -> complex:
        raise NotImplementedError

    def sample(self, rng, size):
        raise NotImplementedError

    def tensor(self, n_max: int) -> SpectralCoefficients:
        return SpectralCoefficients([self.coeff(n) for n in range(-n_max, n_max + 1)],
                                    n_max, self.name)

    def spec(self) -> dict:
        return {"law": self.name}


class UniformLaw(CircleLaw):
    name = "uniform"

    def coeff(self, n):
        return 1.0 + 0j if n == 0 else 0j

    def sample(self, rng, size):
        return rng.uniform(-math.pi, math.pi, size)


class WrappedGaussianLaw(CircleLaw):
    name = "wrapped_gaussian"

    def __init__(self, sigma: float, mean: float = 0.0):
        self.sigma, self.mean = float(sigma), float(mean)

    def coeff(self, n):
        return complex(np.exp(-1j * n * self.mean - 0.5 * (self.sigma * n) ** 2))

    def sample(self, rng, size):
        return wrap_angle(self.mean + self.sigma * rng.standard_normal(size))

    def spec(self):
        return {"law": self.name, "sigma": self.sigma, "mean": self.mean}


class WrappedLaplaceLaw(CircleLaw):
    """Coefficients a^2/(a^2+n^2); a=sqrt(2) gives 2/(2+n^2)."""

    name = "wrapped_laplace"

    def __init__(self, rate: float):
        self.rate = float(rate)

    def coeff(self, n):
        a2 = self.rate ** 2
        return complex(a2 / (a2 + n * n))

    def sample(self, rng, size):
        return wrap_angle(rng.laplace(0.0, 1.0 / self.rate, size))

    def spec(self):
        return {"law": self.name, "rate": self.rate}


class PointMassLaw(CircleLaw):
    name = "point_mass"

    def __init__(self, theta0: float = 0.0):
        self.theta0 = float(theta0)

    def coeff(self, n):
        return complex(np.exp(-1j * n * self.theta0))

    def sample(self, rng, size):
        return np.full(size, wrap_angle(self.theta0))

    def spec(self):
        return {"law": self.name, "theta0": self.theta0}


class TabulatedLaw(CircleLaw):
    """Density (w.r.t. dtheta/2pi) tabulated on a grid covering [-pi, pi]."""

    name = "tabulated"

    def __init__(self, theta, density):
        theta = np.asarray(theta, dtype=float)
        dens = np.asarray(density, dtype=float)
        if np.any(dens < 0):
            raise ValueError("negative density values")
        mass = np.trapezoid(dens, theta) / TWO_PI
        self.theta, self.density = theta, dens / mass
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(theta))])
        self.cdf = cdf / cdf[-1]

    def coeff(self, n):
        return complex(np.trapezoid(self.density * np.exp(-1j * n * self.theta), self.theta) / TWO_PI)

    def sample(self, rng, size):
        return wrap_angle(np.interp(rng.uniform(0.0, 1.0, size), self.cdf, self.theta))


def make_law(spec: dict) -> CircleLaw:
    name = spec.get("law", "uniform")
    if name == "uniform":
        return UniformLaw()
    if name == "wrapped_gaussian":
        return WrappedGaussianLaw(spec.get("sigma", 1.0), spec.get("mean", 0.0))
    if name == "wrapped_laplace":
        return WrappedLaplaceLaw(spec.get("rate", math.sqrt(2.0)))
    if name == "point_mass":
        return PointMassLaw(spec.get("theta0", 0.0))
    if name == "tabulated":
        return TabulatedLaw(spec["theta"], spec["density"])
    raise ValueError(f"unknown law {name!r}")


# initial families

class InitialFamily:
    kind = "family"

    def coeff(self, n: tuple):
        """Coefficient of the len(n)-th marginal at n, or None if unknown."""
        raise NotImplementedError

    def law(self) -> CircleLaw:
        raise NotImplementedError

    def first(self, n: int):
        return self.coeff((n,))


class ChaoticFamily(InitialFamily):
    """Product data f_{1,0}^{tensor k}."""

    kind = "chaotic"

    def __init__(self, law: CircleLaw):
        self._law = law
        self._cache = {}

    def law(self):
        return self._law

    def _c(self, n):
        v = self._cache.get(n)
        if v is None:
            v = self._cache[n] = self._law.coeff(n)
        return v

    def coeff(self, n):
        out = 1.0 + 0j
        for x in n:
            if x:
                out *= self._c(x)
        return out

    def sample(self, rng, N: int):
        return self._law.sample(rng, N)


class OrderedFamily(InitialFamily):
    """Delta-coupled data: coefficient mu_0(n_1 + ... + n_k)."""

    kind = "ordered"

    def __init__(self, law: CircleLaw):
        self._law = law

    def law(self):
        return self._law

    def coeff(self, n):
        return self._law.coeff(sum(n))

    def sample(self, rng, N: int):
        return np.full(N, float(self._law.sample(rng, 1)[0]))


class TensorFamily(InitialFamily):
    """User-supplied tensors per order; out-of-range indices are unknown."""

    kind = "tensor"

    def __init__(self, tensors: dict):
        self.tensors = dict(tensors)

    def coeff(self, n):
        t = self.tensors.get(len(n))
        if t is None:
            return None
        return t.get(n)


def make_initial(spec: dict) -> InitialFamily:
    kind = spec.get("kind", "chaotic")
    law = make_law(spec.get("law", {"law": "uniform"}))
    if kind == "chaotic":
        return ChaoticFamily(law)
    if kind == "ordered":
        return OrderedFamily(law)
    raise ValueError(f"unknown initial kind {kind!r}")
