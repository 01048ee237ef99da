"""Monte Carlo realization of the rescaled N-particle jump process.

Every unordered pair jumps at rate 2 lambda N / (N - 1), so events arrive as
a Poisson stream of total rate lambda N^2. At each event a uniform ordered
pair (leader, follower) is drawn and the follower jumps to the leader's angle
plus eps * Z, wrapped into [-pi, pi).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .interaction import sample_noise
from .laws import ChaoticFamily, InitialFamily, OrderedFamily, UniformLaw, make_law

TWO_PI = 2.0 * math.pi


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Independent counter-based stream for one run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(run,))))


def make_sampler(tag: str, law_spec=None) -> InitialFamily:
    law = make_law(law_spec) if law_spec else UniformLaw()
    if tag in ("uniform", "uniform-iid"):
        return ChaoticFamily(UniformLaw())
    if tag in ("iid", "chaotic"):
        return ChaoticFamily(law)
    if tag == "ordered":
        return OrderedFamily(law)
    raise ValueError(f"unknown initial sampler {tag!r}")


@dataclass
class ParticleEnsemble:
    N: int
    angles: np.ndarray
    time: float
    stream: int
    sched: object = None

    def __post_init__(self):
        if self.angles.shape != (self.N,):
            raise ValueError("angle array must have length N")


@dataclass
class SimulationResult:
    """angles[r, s] is the configuration of run r at times[s]."""

    N: int
    times: np.ndarray
    angles: np.ndarray
    events: np.ndarray
    seed: int
    sched: object = None
    meta: dict = field(default_factory=dict)

    @property
    def runs(self) -> int:
        return self.angles.shape[0]

    def ensemble(self, run: int, s: int) -> ParticleEnsemble:
        return ParticleEnsemble(self.N, self.angles[run, s], float(self.times[s]), run, self.sched)

    def save(self, path_prefix):
        np.save(f"{path_prefix}_angles.npy", self.angles)
        return {"N": self.N, "seed": self.seed, "runs": self.runs,
                "times": [float(t) for t in self.times],
                "sched": self.sched.to_json() if self.sched is not None else None,
                "events": [int(e) for e in self.events]}


def _one_run(args):
    sched, gen, initial, T, times, seed, r = args
    N, lam, eps = sched.N, sched.lam, sched.eps
    rng = run_rng(seed, r)
    theta = [float(x) for x in initial.sample(rng, N)]
    K = int(rng.poisson(lam * N * N * T))
    ev_t = np.sort(rng.uniform(0.0, T, K))
    lead = rng.integers(0, N, K)
    foll = rng.integers(0, N - 1, K)
    foll = foll + (foll >= lead)
    z = sample_noise(gen, eps, rng, K) if K else np.empty(0)
    cut = np.searchsorted(ev_t, times, side="right")
    out = np.empty((len(times), N))
    lead_l, foll_l, z_l = lead.tolist(), foll.tolist(), z.tolist()
    pi = math.pi
    pos = 0
    for s, stop in enumerate(cut):
        for e in range(pos, int(stop)):
            x = theta[lead_l[e]] + z_l[e]
            if x >= pi:
                x -= TWO_PI
            elif x < -pi:
                x += TWO_PI
            theta[foll_l[e]] = x
        pos = int(stop)
        out[s] = theta
    return out, K


def simulate(sched, gen, initial, T: float, times, runs: int, seed: int,
             threads: int = 1) -> SimulationResult:
    """R independent runs on [0, T] with snapshots at the given times."""
    if sched.N < 2:
        raise ValueError("N must be at least 2")
    if T <= 0:
        raise ValueError("horizon must be positive")
    if isinstance(initial, str):
        initial = make_sampler(initial)
    if not hasattr(initial, "sample"):
        raise ValueError("initial family cannot be sampled")
    times = np.asarray(sorted(float(t) for t in times))
    if times.size and (times[0] < 0 or times[-1] > T):
        raise ValueError("snapshot times must lie in [0, T]")
    jobs = [(sched, gen, initial, T, times, seed, r) for r in range(runs)]
    if threads > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(_one_run, jobs, chunksize=max(1, runs // (4 * threads))))
    else:
        res = [_one_run(j) for j in jobs]
    angles = np.stack([a for a, _ in res]) if res else np.empty((0, len(times), sched.N))
    events = np.array([k for _, k in res], dtype=np.int64)
    return SimulationResult(sched.N, times, angles, events, seed, sched)


# estimators

def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def distinct_tuple_mean(theta: np.ndarray, n: tuple) -> np.ndarray:
    """Average of exp(-i sum n_r theta_{i_r}) over ordered tuples of distinct particles.

    theta has shape (..., N). Uses inclusion-exclusion over set partitions of
    the tuple positions, so the cost is linear in N.
    """
    k = len(n)
    N = theta.shape[-1]
    if k > N:
        raise ValueError(f"k={k} exceeds N={N}")
    cache = {}

    def S(m):
        if m not in cache:
            cache[m] = np.exp(-1j * m * theta).sum(axis=-1)
        return cache[m]

    total = 0j
    for part in set_partitions(range(k)):
        term = 1.0
        for block in part:
            b = len(block)
            term = term * ((-1) ** (b - 1) * math.factorial(b - 1)) * S(sum(n[r] for r in block))
        total = total + term
    norm = math.perm(N, k)
    return total / norm


@dataclass
class EmpiricalEstimate:
    index: tuple
    t: float
    mean: complex
    stderr: float
    n_samples: int


def empirical_coefficients(result: SimulationResult, k: int, indices, method: str = "exact",
                           tuple_samples: int = 64, seed: int = 0) -> list:
    """Run-averaged estimates of F_{N,k}(n, t) with standard errors across runs."""
    if k > result.N:
        raise ValueError(f"k={k} exceeds N={result.N}")
    out = []
    R = result.runs
    for s, t in enumerate(result.times):
        theta = result.angles[:, s, :]
        for n in indices:
            n = tuple(int(x) for x in n)
            if len(n) != k:
                raise ValueError(f"index {n} does not have {k} entries")
            if method == "exact":
                per_run = distinct_tuple_mean(theta, n)
                count = R
            elif method == "sampled":
                rng = run_rng(seed, s)
                keys = rng.random((R, tuple_samples, result.N))
                idx = np.argsort(keys, axis=-1)[..., :k]
                ang = np.take_along_axis(theta[:, None, :].repeat(tuple_samples, 1), idx, axis=-1)
                per_run = np.exp(-1j * (ang * np.array(n)).sum(-1)).mean(-1)
                count = R * tuple_samples
            else:
                raise ValueError(f"unknown estimator {method!r}")
            mean = complex(per_run.mean())
            se = float(np.sqrt((np.abs(per_run - mean) ** 2).sum() / (R - 1) / R)) if R > 1 else 0.0
            out.append(EmpiricalEstimate(n, float(t), mean, se, count))
    return out


@dataclass
class ComparisonEntry:
    index: tuple
    t: float
    empirical: complex
    exact: complex
    stderr: float
    passed: bool


@dataclass
class ComparisonReport:
    z: float
    entries: list

    @property
    def pass_rate(self) -> float:
        return sum(e.passed for e in self.entries) / len(self.entries) if self.entries else 1.0

    def to_json(self):
        return {"z": self.z, "pass_rate": self.pass_rate,
                "entries": [{"index": list(e.index), "t": e.t,
                             "empirical_re": e.empirical.real, "empirical_im": e.empirical.imag,
                             "exact_re": e.exact.real, "exact_im": e.exact.imag,
                             "stderr": e.stderr, "pass": e.passed} for e in self.entries]}


def compare_to_exact(estimates, sol, z: float = 4.0, abs_floor: float = 1e-12) -> ComparisonReport:
    entries = []
    for est in estimates:
        if len(est.index) != sol.k:
            raise ValueError(f"index {est.index} does not match order {sol.k}")
        exact = complex(sol.coefficient(est.index)(est.t))
        ok = abs(est.mean - exact) <= z * est.stderr + abs_floor
        entries.append(ComparisonEntry(est.index, est.t, est.mean, exact, est.stderr, ok))
    return ComparisonReport(z, entries)


def estimates_rows(estimates):
    """CSV rows: index..., t, mean_re, mean_im, stderr, n_samples."""
    return [[*e.index, e.t, e.mean.real, e.mean.imag, e.stderr, e.n_samples] for e in estimates]
