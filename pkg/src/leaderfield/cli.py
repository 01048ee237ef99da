"""Command line entry point: leaderfield <subcommand> [--config PATH] [options].

Exit status: 0 when every asserted check passes, 1 on runtime failure or a
failed check, 2 on an invalid config or invalid arguments.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import platform
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bounds import constants_ledger, finite_distance_check, limit_distance_check
from .config import ConfigError, ExperimentConfig, from_dict, load
from .finite_system import evolve_finite_marginal
from .interaction import ScalingSchedule, make_generator
from .io import canonical_hash, sha256_file, write_csv, write_json
from .laws import make_initial, make_law
from .limit_dynamics import (evolve_limit_marginal, evolve_order_regime, h_density,
                             nu_density, stationary_hierarchy)
from .partial_order import (PartialOrderProfile, check_partial_order_factorization,
                            ordered_profile, stationary_profile, uniform_profile)
from .particle_sim import compare_to_exact, empirical_coefficients, estimates_rows, simulate
from .spectral import SpectralCoefficients, check_probability, grid_points

COMMANDS = ("stationary", "evolve", "evolve-finite", "simulate", "compare", "check-order",
            "verify-bounds", "density", "constants")

# output radii used when the config does not set n_max; kept small so the
# JSON artifacts stay readable
OUTPUT_RADII = {1: 64, 2: 32, 3: 8, 4: 4, 5: 2, 6: 2}
EVOLVE_RADII = {1: 16, 2: 8, 3: 4, 4: 2}


class CheckFailed(RuntimeError):
    pass


class Context:
    def __init__(self, cfg: ExperimentConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.gen = make_generator(asdict(cfg.generator))
        self.artifacts = {}
        self.checks = {}
        self.resolved = {}

    @property
    def m2(self) -> float:
        return float(self.cfg.m2) if self.cfg.m2 is not None else float(self.gen.m2)

    def schedule(self, N: int) -> ScalingSchedule:
        s = self.cfg.scaling
        if s.regime == "critical":
            return ScalingSchedule.critical(N, s.lam, self.gen.l, s.alpha)
        return ScalingSchedule(N, s.eps, s.regime, s.alpha or 0.0, s.lam)

    def initial(self):
        return make_initial(asdict(self.cfg.initial))

    def n_max(self, k: int, table=EVOLVE_RADII) -> int:
        return self.cfg.n_max if self.cfg.n_max is not None else table.get(k, 2)

    def save_json(self, name: str, obj):
        write_json(self.out / name, obj)
        self.artifacts[name] = self.out / name

    def save_csv(self, name: str, header, rows):
        write_csv(self.out / name, header, rows)
        self.artifacts[name] = self.out / name

    def check(self, name: str, ok: bool):
        self.checks[name] = bool(ok)


def _indices(ctx, k, default):
    if ctx.cfg.indices is not None:
        return [tuple(n) for n in ctx.cfg.indices]
    return default


def cmd_stationary(ctx: Context):
    K = ctx.cfg.K
    radii = {k: ctx.n_max(k, OUTPUT_RADII) for k in range(1, K + 1)}
    ctx.resolved.update({"K": K, "m2": ctx.m2, "radii": radii})
    hier = stationary_hierarchy(K, ctx.m2, radii)
    ctx.check("cross_validation", True)
    ok = True
    for k in range(1, K + 1):
        ok &= bool(np.all(hier.nu(k).values.real > 0))
    ctx.check("nu_positive", ok)
    ctx.save_json("stationary.json", hier.to_json())


def _evolve_common(ctx, sol, name):
    times = ctx.cfg.times
    snaps, ok = [], True
    for t in times:
        c = sol.evaluate(t)
        v = check_probability(c, 1e-9)
        ok &= v.passed
        snaps.append({"t": t, "probability_ok": v.passed, "coefficients": c.to_json()})
    ctx.check(f"{name}_probability", ok)
    ctx.save_json(f"{name}.json", {"k": sol.k, "n_max": sol.n_max, "missing": [list(n) for n in sol.missing],
                                   "snapshots": snaps})
    ctx.save_json(f"{name}_terms.json", sol.to_json())


def cmd_evolve(ctx: Context):
    k = ctx.cfg.k
    n_max = ctx.n_max(k)
    lam = ctx.cfg.scaling.lam
    ctx.resolved.update({"k": k, "n_max": n_max, "m2": ctx.m2, "lam": lam})
    if ctx.cfg.scaling.regime == "order":
        sol = evolve_order_regime(ctx.initial(), lam, k, n_max)
    else:
        sol = evolve_limit_marginal(ctx.initial(), ctx.m2, lam, k, n_max)
    _evolve_common(ctx, sol, "evolve")


def cmd_evolve_finite(ctx: Context):
    k = ctx.cfg.k
    n_max = ctx.n_max(k)
    ctx.resolved.update({"k": k, "n_max": n_max})
    for N in ctx.cfg.scaling.N:
        sol = evolve_finite_marginal(ctx.initial(), ctx.schedule(N), ctx.gen, k, n_max)
        _evolve_common(ctx, sol, f"evolve_finite_N{N}")


def _default_mc_indices(k):
    return [(1,), (2,), (3,)] if k == 1 else [(1, -1), (1, 1), (2, -1)][: 3]


def _simulate(ctx, N):
    cfg = ctx.cfg
    T = cfg.mc.T if cfg.mc.T is not None else max(cfg.times)
    ctx.resolved.update({"T": T, "runs": cfg.mc.runs})
    res = simulate(ctx.schedule(N), ctx.gen, ctx.initial(), T, cfg.times, cfg.mc.runs,
                   cfg.seed, ctx.threads)
    res.meta["T"] = T
    idx = _indices(ctx, cfg.k, _default_mc_indices(cfg.k))
    est = empirical_coefficients(res, cfg.k, idx, cfg.mc.estimator, cfg.mc.tuple_samples, cfg.seed)
    return res, est


def cmd_simulate(ctx: Context):
    for N in ctx.cfg.scaling.N:
        res, est = _simulate(ctx, N)
        header = [f"n{r + 1}" for r in range(ctx.cfg.k)] + ["t", "mean_re", "mean_im", "stderr", "n_samples"]
        ctx.save_csv(f"estimates_N{N}.csv", header, estimates_rows(est))
        meta = res.save(ctx.out / f"snapshots_N{N}")
        ctx.artifacts[f"snapshots_N{N}_angles.npy"] = ctx.out / f"snapshots_N{N}_angles.npy"
        ctx.save_json(f"snapshots_N{N}.json", meta)
        mean_ev = float(np.mean(res.events))
        expect = ctx.cfg.scaling.lam * N * N * float(res.meta.get("T", max(ctx.cfg.times)))
        ctx.check(f"event_count_N{N}", abs(mean_ev - expect) <= 4 * math.sqrt(expect))


def cmd_compare(ctx: Context):
    z = ctx.cfg.mc.z
    for N in ctx.cfg.scaling.N:
        res, est = _simulate(ctx, N)
        sol = evolve_finite_marginal(ctx.initial(), ctx.schedule(N), ctx.gen, ctx.cfg.k)
        rep = compare_to_exact(est, sol, z)
        ctx.save_json(f"compare_N{N}.json", rep.to_json())
        ctx.check(f"compare_N{N}", rep.pass_rate >= ctx.cfg.mc.min_pass_rate)


def _load_spectral(path):
    with open(path) as fh:
        return SpectralCoefficients.from_json(json.load(fh))


def _profile(ctx, K):
    spec = ctx.cfg.order.profile
    kind = spec.get("kind")
    if kind == "uniform":
        return uniform_profile(K)
    if kind == "ordered":
        return ordered_profile(make_law(spec.get("law", ctx.cfg.initial.law)), K)
    if kind == "stationary":
        return stationary_profile(stationary_hierarchy(K, spec.get("m2", ctx.m2), validate=False), K)
    eta = {int(k): _load_spectral(p) for k, p in spec.get("eta", {}).items()}
    nu = {int(k): _load_spectral(p) for k, p in spec.get("nu", {}).items()}
    return PartialOrderProfile(eta, nu, "file")


def cmd_check_order(ctx: Context):
    paths = ctx.cfg.order.families
    if paths:
        fam = {}
        for p in paths:
            c = _load_spectral(p)
            fam[c.dimension] = c
    else:
        # default demonstration: the stationary hierarchy itself
        hier = stationary_hierarchy(ctx.cfg.K, ctx.m2, validate=False)
        fam = {k: SpectralCoefficients.from_function(k, ctx.n_max(k, {1: 8, 2: 6, 3: 4, 4: 3}),
                                                     hier.f_infty_hat) for k in range(1, ctx.cfg.K + 1)}
    prof = _profile(ctx, max(fam))
    v = check_partial_order_factorization(fam, prof, ctx.cfg.order.tol)
    ctx.save_json("check_order.json", v.to_json())
    ctx.check("partial_order", v.passed)


def cmd_verify_bounds(ctx: Context):
    k = ctx.cfg.k
    n_max = ctx.n_max(k, {1: 8, 2: 4, 3: 2, 4: 1})
    times = [t for t in ctx.cfg.times if t > 0]
    lam = ctx.cfg.scaling.lam
    hier = stationary_hierarchy(k, ctx.gen.m2, validate=False)
    init = ctx.initial()
    lim = evolve_limit_marginal(init, ctx.gen.m2, lam, k, n_max)
    rep = limit_distance_check(lim, hier, times)
    ctx.save_json("bounds_limit.json", rep.to_json())
    ctx.save_csv("bounds_limit.csv", ["name", "index", "t", "lhs", "rhs", "pass", "slack"], _rows(rep))
    ctx.check("limit_distance", rep.passed)
    for N in ctx.cfg.scaling.N:
        sched = ctx.schedule(N)
        led = constants_ledger(ctx.gen, sched, k)
        fin = evolve_finite_marginal(init, sched, ctx.gen, k, n_max)
        frep = finite_distance_check(fin, lim, hier, led, times)
        ctx.save_json(f"bounds_N{N}.json", frep.to_json())
        ctx.save_csv(f"bounds_N{N}.csv", ["name", "index", "t", "lhs", "rhs", "pass", "slack"], _rows(frep))
        if not frep.informational:
            ctx.check(f"finite_distance_N{N}", frep.passed)


def _rows(rep):
    return [[c.name, " ".join(map(str, c.index)), c.t, c.lhs, c.rhs, c.passed, c.slack] for c in rep.checks]


def cmd_density(ctx: Context):
    d = ctx.cfg.density
    m2 = ctx.m2
    theta = -math.pi + 2 * math.pi * np.arange(d.n_points) / d.n_points
    ctx.save_csv("density_H.csv", ["theta", "H"], zip(theta, h_density(m2, theta)))
    k = d.k
    hier = stationary_hierarchy(k, m2, {j: ctx.n_max(j, OUTPUT_RADII) for j in range(1, k + 1)},
                                validate=False)
    grid = theta.reshape(-1, 1) if k == 1 else grid_points(k, d.n_points)
    res = nu_density(hier, k, grid, d.summation)
    ctx.resolved.update({"m2": m2, "nu_summation": res.summation})
    header = [f"theta{r + 1}" for r in range(k)] + ["density"]
    ctx.save_csv(f"density_nu{k}.csv", header, [list(p) + [v] for p, v in zip(grid, res.values)])
    ctx.check("nu_density_nonnegative", res.min_value >= -1e-8)
    ctx.check("nu_density_max_at_origin", res.max_at_origin)


def cmd_constants(ctx: Context):
    out = {}
    for N in ctx.cfg.scaling.N:
        out[str(N)] = constants_ledger(ctx.gen, ctx.schedule(N), ctx.cfg.k).to_json()
    ctx.save_json("constants.json", out)


HANDLERS = {"stationary": cmd_stationary, "evolve": cmd_evolve, "evolve-finite": cmd_evolve_finite,
            "simulate": cmd_simulate, "compare": cmd_compare, "check-order": cmd_check_order,
            "verify-bounds": cmd_verify_bounds, "density": cmd_density, "constants": cmd_constants}


def versions() -> dict:
    return {"leaderfield": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def execute(command: str, cfg: ExperimentConfig, out, threads: int = 1) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg, out, threads)
    HANDLERS[command](ctx)
    resolved = {"command": command, "config": cfg.to_dict(), "derived": ctx.resolved}
    manifest = {"command": command, "config_hash": canonical_hash(cfg.to_dict()),
                "resolved": resolved, "versions": versions(),
                "checks": ctx.checks,
                "artifacts": {name: sha256_file(p) for name, p in sorted(ctx.artifacts.items())}}
    write_json(out / "manifest.json", manifest)
    # wall-clock time lives apart from the manifest so reruns stay byte-identical
    write_json(out / "timestamp.json",
               {"utc": datetime.datetime.now(datetime.timezone.utc).isoformat()})
    failed = [k for k, v in ctx.checks.items() if not v]
    if failed:
        raise CheckFailed("failed checks: " + ", ".join(failed))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leaderfield", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--K", type=int)
        sp.add_argument("--m2", type=float)
        sp.add_argument("--k", type=int)
        sp.add_argument("--N", type=int, nargs="+")
    return ap


def resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        with_file = load(args.config).to_dict()
    else:
        with_file = {"seed": 0}
    for key in ("seed", "K", "m2", "k"):
        v = getattr(args, key)
        if v is not None:
            with_file[key] = v
    if args.N is not None:
        with_file.setdefault("scaling", {})["N"] = args.N
    return from_dict(with_file)


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = args.out or os.environ.get("LEADERFIELD_OUT") or cfg.out
        threads = args.threads or int(os.environ.get("LEADERFIELD_THREADS", "1") or 1)
        if threads < 1:
            raise ConfigError("threads: must be at least 1")
        return execute(args.command, cfg, out, threads)
    except ConfigError as e:
        print("config error:", file=sys.stderr)
        for p in e.problems:
            print(f"  {p}", file=sys.stderr)
        return 2
    except CheckFailed as e:
        print(str(e), file=sys.stderr)
        return 1
    except Exception as e:  # runtime failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
