"""Declarative experiment configs: one JSON document, validated into dataclasses."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

FAMILIES = ("uniform", "gaussian", "laplace", "custom")
REGIMES = ("critical", "order", "chaos")
INITIAL_KINDS = ("chaotic", "ordered")
LAWS = ("uniform", "wrapped_gaussian", "wrapped_laplace", "point_mass", "tabulated")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems) if not isinstance(problems, str) else [problems]
        super().__init__("; ".join(self.problems))


@dataclass
class GeneratorSpec:
    family: str = "uniform"
    params: dict = field(default_factory=dict)
    p: float = 2.0
    l: int = 4


@dataclass
class ScalingSpec:
    N: list = field(default_factory=lambda: [64])
    regime: str = "critical"
    lam: float = 1.0
    eps: float | None = None
    alpha: float | None = None


@dataclass
class InitialSpec:
    kind: str = "chaotic"
    law: dict = field(default_factory=lambda: {"law": "wrapped_gaussian", "sigma": 0.5})


@dataclass
class MCSpec:
    runs: int = 200
    tuple_samples: int = 64
    T: float | None = None
    estimator: str = "exact"
    z: float = 4.0
    min_pass_rate: float = 0.95


@dataclass
class DensitySpec:
    k: int = 1
    n_points: int = 512
    summation: str = "auto"


@dataclass
class OrderSpec:
    families: list = field(default_factory=list)
    profile: dict = field(default_factory=lambda: {"kind": "stationary"})
    tol: float = 1e-8


@dataclass
class ExperimentConfig:
    seed: int
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    scaling: ScalingSpec = field(default_factory=ScalingSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    k: int = 1
    K: int = 3
    m2: float | None = None
    n_max: int | None = None
    times: list = field(default_factory=lambda: [0.5, 1.0])
    indices: list | None = None
    mc: MCSpec = field(default_factory=MCSpec)
    density: DensitySpec = field(default_factory=DensitySpec)
    order: OrderSpec = field(default_factory=OrderSpec)
    out: str = "out"

    def to_dict(self) -> dict:
        return asdict(self)


_NESTED = {"generator": GeneratorSpec, "scaling": ScalingSpec, "initial": InitialSpec,
           "mc": MCSpec, "density": DensitySpec, "order": OrderSpec}


def _build(cls, data, where, problems):
    if not isinstance(data, dict):
        problems.append(f"{where}: expected an object")
        return cls() if cls is not ExperimentConfig else None
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            problems.append(f"{where}.{key}: unknown field")
    kw = {}
    for key, val in data.items():
        if key in _NESTED and key in names:
            kw[key] = _build(_NESTED[key], val, f"{where}.{key}", problems)
        elif key in names:
            kw[key] = val
    try:
        return cls(**kw)
    except TypeError as e:
        problems.append(f"{where}: {e}")
        return None


def _num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def validate(cfg: ExperimentConfig) -> list:
    p = []
    if not _int(cfg.seed) or not 0 <= cfg.seed < 2 ** 64:
        p.append("seed: must be an unsigned 64-bit integer")
    g = cfg.generator
    if g.family not in FAMILIES:
        p.append(f"generator.family: must be one of {FAMILIES}")
    if not _num(g.p) or g.p <= 1:
        p.append("generator.p: must be a number > 1")
    if not _int(g.l) or g.l < 3:
        p.append("generator.l: must be an integer >= 3")
    if not isinstance(g.params, dict):
        p.append("generator.params: must be an object")
    s = cfg.scaling
    if not isinstance(s.N, list) or not s.N or not all(_int(n) and n >= 2 for n in s.N):
        p.append("scaling.N: must be a non-empty list of integers >= 2")
    if s.regime not in REGIMES:
        p.append(f"scaling.regime: must be one of {REGIMES}")
    if not _num(s.lam) or s.lam <= 0:
        p.append("scaling.lam: must be positive")
    if s.eps is not None and (not _num(s.eps) or s.eps <= 0):
        p.append("scaling.eps: must be positive")
    if s.regime == "critical" and s.eps is not None:
        p.append("scaling.eps: fixed by the critical regime (eps = 1/sqrt(N)); omit it")
    if s.regime != "critical" and s.eps is None:
        p.append("scaling.eps: required outside the critical regime")
    if s.alpha is not None and (not _num(s.alpha) or s.alpha <= 0):
        p.append("scaling.alpha: must be positive")
    if cfg.initial.kind not in INITIAL_KINDS:
        p.append(f"initial.kind: must be one of {INITIAL_KINDS}")
    if not isinstance(cfg.initial.law, dict) or cfg.initial.law.get("law", "uniform") not in LAWS:
        p.append(f"initial.law.law: must be one of {LAWS}")
    if not _int(cfg.k) or not 1 <= cfg.k <= 4:
        p.append("k: must be an integer in 1..4")
    if not _int(cfg.K) or not 1 <= cfg.K <= 6:
        p.append("K: must be an integer in 1..6")
    if cfg.m2 is not None and (not _num(cfg.m2) or cfg.m2 <= 0):
        p.append("m2: must be positive")
    if cfg.n_max is not None and (not _int(cfg.n_max) or cfg.n_max < 0):
        p.append("n_max: must be a non-negative integer")
    if not isinstance(cfg.times, list) or not cfg.times or not all(_num(t) and t >= 0 for t in cfg.times):
        p.append("times: must be a non-empty list of non-negative numbers")
    if cfg.indices is not None:
        if not isinstance(cfg.indices, list) or not all(
                isinstance(n, list) and len(n) == cfg.k and all(_int(x) for x in n) for n in cfg.indices):
            p.append("indices: must be a list of integer lists of length k")
    m = cfg.mc
    if not _int(m.runs) or m.runs < 2:
        p.append("mc.runs: must be an integer >= 2")
    if not _int(m.tuple_samples) or m.tuple_samples < 1:
        p.append("mc.tuple_samples: must be a positive integer")
    if m.T is not None and (not _num(m.T) or m.T <= 0):
        p.append("mc.T: must be positive")
    if m.estimator not in ("exact", "sampled"):
        p.append("mc.estimator: must be 'exact' or 'sampled'")
    if not _num(m.z) or m.z <= 0:
        p.append("mc.z: must be positive")
    d = cfg.density
    if not _int(d.k) or not 1 <= d.k <= cfg.K:
        p.append("density.k: must be an integer in 1..K")
    if not _int(d.n_points) or d.n_points < 2:
        p.append("density.n_points: must be an integer >= 2")
    if d.summation not in ("auto", "direct", "fejer"):
        p.append("density.summation: must be auto, direct or fejer")
    if not isinstance(cfg.order.families, list):
        p.append("order.families: must be a list of file paths")
    if not isinstance(cfg.order.profile, dict) or cfg.order.profile.get("kind") not in (
            "uniform", "ordered", "stationary", "file"):
        p.append("order.profile.kind: must be uniform, ordered, stationary or file")
    if not isinstance(cfg.out, str) or not cfg.out:
        p.append("out: must be a non-empty path")
    return p


def from_dict(data: dict, require_seed: bool = True) -> ExperimentConfig:
    problems = []
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    if require_seed and "seed" not in data:
        problems.append("seed: required")
        data = dict(data, seed=0)
    cfg = _build(ExperimentConfig, data, "config", problems)
    if cfg is None:
        raise ConfigError(problems)
    problems += validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    return from_dict(data)
