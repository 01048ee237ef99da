"""Particle simulation against the exact finite-N marginals.

    python3 scripts/mc_vs_exact.py --N 64 --runs 2000 --k 1
"""

import argparse
import time
from pathlib import Path

from leaderfield.finite_system import evolve_finite_marginal
from leaderfield.interaction import ScalingSchedule, make_generator
from leaderfield.io import write_json
from leaderfield.laws import ChaoticFamily, WrappedGaussianLaw
from leaderfield.particle_sim import compare_to_exact, empirical_coefficients, simulate

DEFAULT_INDICES = {1: [(1,), (2,), (3,)], 2: [(1, -1), (1, 1), (2, -1)], 3: [(1, -1, 0), (1, 1, -2)]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--k", type=int, default=1, choices=[1, 2, 3])
    ap.add_argument("--sigma", type=float, default=0.5, help="initial wrapped gaussian width")
    ap.add_argument("--family", default="uniform")
    ap.add_argument("--times", type=float, nargs="+", default=[0.5, 1.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/mc_vs_exact"))
    args = ap.parse_args()

    gen = make_generator({"family": args.family})
    sched = ScalingSchedule.critical(args.N)
    init = ChaoticFamily(WrappedGaussianLaw(args.sigma))
    t0 = time.perf_counter()
    res = simulate(sched, gen, init, max(args.times), args.times, args.runs, args.seed, args.threads)
    est = empirical_coefficients(res, args.k, DEFAULT_INDICES[args.k])
    rep = compare_to_exact(est, evolve_finite_marginal(init, sched, gen, args.k))
    print(f"N={args.N} runs={args.runs} k={args.k}  {time.perf_counter() - t0:.1f}s")
    print(f"{'index':>12} {'t':>5} {'empirical':>22} {'exact':>22} {'z':>6}")
    for e in rep.entries:
        z = abs(e.empirical - e.exact) / e.stderr if e.stderr else 0.0
        print(f"{str(e.index):>12} {e.t:5.2f} {e.empirical.real:+.5f}{e.empirical.imag:+.5f}j "
              f"{e.exact.real:+.5f}{e.exact.imag:+.5f}j {z:6.2f}")
    print(f"pass rate at 4 standard errors: {rep.pass_rate:.3f}")
    write_json(args.out / f"compare_N{args.N}_k{args.k}.json", rep.to_json())


if __name__ == "__main__":
    main()
