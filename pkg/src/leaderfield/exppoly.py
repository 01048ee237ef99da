"""Exponential polynomials: finite sums of c * t**p * exp(-rate * t).

Every time-dependent Fourier coefficient produced by the marginal
recursions is one of these, so the time integrals are done in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# relative tolerance under which two decay rates count as the same rate
RATE_RTOL = 1e-12


def rates_close(a: float, b: float, rtol: float = RATE_RTOL) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class ExpPolynomial:
    """Canonical list of (coefficient, rate, power) terms.

    Terms are sorted by (rate, power), rates closer than RATE_RTOL are merged
    onto the first rate of the cluster, and exact-zero coefficients dropped.
    """

    terms: tuple = ()

    @classmethod
    def from_terms(cls, terms, rtol: float = RATE_RTOL) -> "ExpPolynomial":
        items = sorted(((complex(c), float(b), int(p)) for c, b, p in terms),
                       key=lambda x: (x[1], x[2]))
        merged = {}
        anchor = None
        order = []
        for c, b, p in items:
            if anchor is None or not rates_close(anchor, b, rtol):
                anchor = b
            key = (anchor, p)
            if key not in merged:
                merged[key] = 0j
                order.append(key)
            merged[key] += c
        out = tuple((merged[k], k[0], k[1]) for k in sorted(order)
                    if merged[k] != 0)
        return cls(out)

    @classmethod
    def constant(cls, c) -> "ExpPolynomial":
        return cls.from_terms([(c, 0.0, 0)])

    @classmethod
    def exponential(cls, c, rate: float) -> "ExpPolynomial":
        return cls.from_terms([(c, rate, 0)])

    def __add__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        return ExpPolynomial.from_terms(self.terms + other.terms)

    def scale(self, s) -> "ExpPolynomial":
        return ExpPolynomial.from_terms((c * s, b, p) for c, b, p in self.terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for c, b, p in self.terms:
            out = out + c * t ** p * np.exp(-b * t)
        return out if out.ndim else complex(out)

    def at_zero(self) -> complex:
        return sum((c for c, b, p in self.terms if p == 0), 0j)

    def is_zero(self) -> bool:
        return not self.terms

    def convolve(self, alpha: float, rtol: float = RATE_RTOL) -> "ExpPolynomial":
        """Closed form of t -> int_0^t exp(-alpha (t-s)) q(s) ds."""
        kept, new = convolve_terms(alpha, self.terms, rtol)
        return ExpPolynomial.from_terms(kept + new, rtol)

    def to_json(self) -> list:
        return [{"coeff_re": c.real, "coeff_im": c.imag, "rate": b, "power": p}
                for c, b, p in self.terms]

    @classmethod
    def from_json(cls, items) -> "ExpPolynomial":
        return cls.from_terms((complex(d["coeff_re"], d["coeff_im"]), d["rate"], d["power"])
                              for d in items)


def convolve_terms(alpha: float, terms, rtol: float = RATE_RTOL):
    """Raw (unmerged) terms of the convolution of exp(-alpha t) with terms.

    Returns (kept, new): pieces that stay at the source rates, and pieces at
    rate alpha (including the resonant t^(p+1) pieces).

    For beta != alpha, with d = alpha - beta,
        int_0^t e^{-alpha(t-s)} s^p e^{-beta s} ds
          = sum_j (-1)^j p!/(p-j)! t^(p-j) e^{-beta t} / d^(j+1)
            - (-1)^p p! e^{-alpha t} / d^(p+1)
    and for beta == alpha it is t^(p+1)/(p+1) e^{-alpha t}.
    """
    kept, new = [], []
    for c, beta, p in terms:
        if rates_close(alpha, beta, rtol):
            new.append((c / (p + 1), alpha, p + 1))
            continue
        d = alpha - beta
        fall = 1.0
        for j in range(p + 1):
            # fall = p!/(p-j)!
            kept.append(((-1) ** j * fall * c / d ** (j + 1), beta, p - j))
            fall *= p - j
        new.append((-((-1) ** p) * math.factorial(p) * c / d ** (p + 1), alpha, 0))
    return kept, new
