"""Truncated Fourier coefficient tensors of probability measures on T^k.

Convention: mu_hat(n) = int exp(-i n.theta) dmu(theta), densities taken with
respect to dtheta / (2 pi)^k, so density(theta) = sum_n mu_hat(n) exp(i n.theta).
Tensors are dense over the cube [-n_max, n_max]^k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

# default truncation radius per dimension
DEFAULT_RADII = {1: 64, 2: 64, 3: 16, 4: 8}


def default_radius(k: int) -> int:
    return DEFAULT_RADII.get(k, 4)


def delta0(n) -> int:
    """Indicator of the zero frequency (works on ints and on tuples)."""
    if isinstance(n, tuple):
        return int(all(x == 0 for x in n))
    return int(n == 0)


def cube_indices(k: int, n_max: int):
    """All multi-indices of the cube in C (row-major) storage order."""
    return itertools.product(range(-n_max, n_max + 1), repeat=k)


@dataclass
class Verdict:
    passed: bool
    max_violation: float = 0.0
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


class SpectralCoefficients:
    """Immutable dense coefficient tensor with label and model time."""

    def __init__(self, values, n_max: int, label: str = "", time=None):
        arr = np.array(values, dtype=complex)
        if arr.ndim < 1 or any(s != 2 * n_max + 1 for s in arr.shape):
            raise ValueError(f"shape {arr.shape} does not match n_max={n_max}")
        arr.flags.writeable = False
        self.values = arr
        self.n_max = int(n_max)
        self.label = label
        self.time = time

    @property
    def dimension(self) -> int:
        return self.values.ndim

    def __repr__(self):
        return (f"SpectralCoefficients(k={self.dimension}, n_max={self.n_max}, "
                f"label={self.label!r}, time={self.time})")

    def contains(self, n) -> bool:
        return len(n) == self.dimension and all(abs(x) <= self.n_max for x in n)

    def value(self, n) -> complex:
        n = tuple(int(x) for x in n)
        if not self.contains(n):
            raise IndexError(f"index {n} outside truncation radius {self.n_max}")
        return complex(self.values[tuple(x + self.n_max for x in n)])

    def get(self, n, default=None):
        return self.value(n) if self.contains(tuple(n)) else default

    def indices(self):
        return cube_indices(self.dimension, self.n_max)

    def with_meta(self, label=None, time=None) -> "SpectralCoefficients":
        return SpectralCoefficients(self.values, self.n_max,
                                    self.label if label is None else label,
                                    self.time if time is None else time)

    @classmethod
    def from_function(cls, k: int, n_max: int, fn, label: str = "", time=None):
        vals = np.empty((2 * n_max + 1,) * k, dtype=complex)
        for n in cube_indices(k, n_max):
            vals[tuple(x + n_max for x in n)] = fn(n)
        return cls(vals, n_max, label, time)

    @classmethod
    def uniform(cls, k: int, n_max: int, label: str = "uniform"):
        vals = np.zeros((2 * n_max + 1,) * k, dtype=complex)
        vals[(n_max,) * k] = 1.0
        return cls(vals, n_max, label)

    @classmethod
    def ones(cls, k: int, n_max: int, label: str = "point-mass-at-0"):
        return cls(np.ones((2 * n_max + 1,) * k, dtype=complex), n_max, label)

    def to_json(self) -> dict:
        rows = []
        flat = self.values.reshape(-1)
        for pos, n in enumerate(self.indices()):
            v = flat[pos]
            rows.append([*n, float(v.real), float(v.imag)])
        return {"dimension": self.dimension, "n_max": self.n_max, "values": rows,
                "label": self.label, "time": self.time}

    @classmethod
    def from_json(cls, d: dict) -> "SpectralCoefficients":
        k, n_max = int(d["dimension"]), int(d["n_max"])
        vals = np.zeros((2 * n_max + 1,) * k, dtype=complex)
        for row in d["values"]:
            idx = tuple(int(x) + n_max for x in row[:k])
            vals[idx] = complex(row[k], row[k + 1])
        return cls(vals, n_max, d.get("label", ""), d.get("time"))


def marginal(c: SpectralCoefficients, j: int) -> SpectralCoefficients:
    """Coefficients of the first j variables: value(n_1..n_j, 0, .., 0)."""
    k = c.dimension
    if not 1 <= j <= k:
        raise ValueError(f"marginal order {j} out of range 1..{k}")
    sl = (slice(None),) * j + (c.n_max,) * (k - j)
    return SpectralCoefficients(c.values[sl], c.n_max, c.label, c.time)


def check_probability(c: SpectralCoefficients, tol: float = 1e-10) -> Verdict:
    v = c.values
    fails = []
    zero = abs(v[(c.n_max,) * c.dimension] - 1.0)
    if zero > tol:
        fails.append(f"normalization off by {zero:.3g}")
    conj = float(np.max(np.abs(np.flip(v) - np.conj(v))))
    if conj > tol:
        fails.append(f"conjugate symmetry off by {conj:.3g}")
    over = float(np.max(np.abs(v)) - 1.0)
    if over > tol:
        fails.append(f"modulus exceeds 1 by {over:.3g}")
    worst = max(zero, conj, max(over, 0.0))
    return Verdict(not fails, worst, fails)


def check_even(c: SpectralCoefficients, tol: float = 1e-10) -> Verdict:
    gap = float(np.max(np.abs(np.flip(c.values) - c.values)))
    return Verdict(gap <= tol, gap, [] if gap <= tol else [f"value(n) != value(-n) by {gap:.3g}"])


def check_symmetric(c: SpectralCoefficients, tol: float = 1e-10,
                    n_samples: int = 200, seed: int = 0) -> Verdict:
    k = c.dimension
    if k <= 6:
        perms = list(itertools.permutations(range(k)))
    else:
        rng = np.random.default_rng(seed)
        perms = [tuple(rng.permutation(k)) for _ in range(n_samples)]
    gap = 0.0
    for p in perms:
        gap = max(gap, float(np.max(np.abs(np.transpose(c.values, p) - c.values))))
    return Verdict(gap <= tol, gap, [] if gap <= tol else [f"permutation defect {gap:.3g}"])


def fejer_weights(n_max: int) -> np.ndarray:
    n = np.arange(-n_max, n_max + 1)
    return 1.0 - np.abs(n) / (n_max + 1.0)


def density_eval(c: SpectralCoefficients, grid, summation: str = "direct",
                 imag_tol: float = 1e-8):
    """Density sum_n value(n) exp(i n.theta) on a list of k-tuples of angles.

    summation="fejer" applies product Fejer weights, which keeps the partial
    sum of a nonnegative density nonnegative.
    Returns (real values, largest imaginary residue).
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    k = c.dimension
    if grid.shape[1] != k:
        if k == 1 and grid.shape[0] == 1:
            grid = grid.T
        else:
            raise ValueError(f"grid points must have {k} angles")
    ns = np.arange(-c.n_max, c.n_max + 1)
    vals = c.values
    if summation == "fejer":
        w = fejer_weights(c.n_max)
        for ax in range(k):
            shape = [1] * k
            shape[ax] = -1
            vals = vals * w.reshape(shape)
    elif summation != "direct":
        raise ValueError(f"unknown summation {summation!r}")
    letters = "abcdefghij"[:k]
    phases = [np.exp(1j * np.outer(grid[:, d], ns)) for d in range(k)]
    expr = ",".join("g" + a for a in letters) + "," + letters + "->g"
    out = np.einsum(expr, *phases, vals, optimize="greedy")
    resid = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if resid > imag_tol:
        raise ValueError(f"density has imaginary residue {resid:.3g}; coefficients not Hermitian")
    return out.real, resid


def grid_points(k: int, n_points: int = 512, include_origin: bool = True) -> np.ndarray:
    """Tensor grid on [-pi, pi)^k with about n_points points in total."""
    per_axis = max(2, int(math.ceil(n_points ** (1.0 / k))))
    axis = -np.pi + 2 * np.pi * np.arange(per_axis) / per_axis
    if include_origin and per_axis % 2:
        axis = np.sort(np.append(axis, 0.0))
    mesh = np.meshgrid(*([axis] * k), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


@dataclass
class BochnerResult:
    passed: bool
    min_eigenvalue: float
    hermitian_defect: float


def bochner_psd_check(c: SpectralCoefficients, points, tol: float = 1e-10) -> BochnerResult:
    """Gram matrix value(p_a - p_b) over the given frequency points."""
    pts = [tuple(int(x) for x in p) for p in points]
    m = len(pts)
    gram = np.empty((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            diff = tuple(x - y for x, y in zip(pts[a], pts[b]))
            if not c.contains(diff):
                raise ValueError(f"difference {diff} not resolvable at n_max={c.n_max}")
            gram[a, b] = c.value(diff)
    herm = float(np.max(np.abs(gram - gram.conj().T))) if m else 0.0
    lam = float(np.min(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T)))) if m else 0.0
    return BochnerResult(lam >= -tol, lam, herm)
