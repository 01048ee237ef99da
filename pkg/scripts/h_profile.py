"""Tabulate the stationary deviation density H for several m2 and the order-2 deviation density.

    python3 scripts/h_profile.py --out results/h_profile
"""

import argparse
import math
from pathlib import Path

import numpy as np

from leaderfield.io import write_csv
from leaderfield.limit_dynamics import h_density, nu_density, stationary_hierarchy
from leaderfield.spectral import grid_points


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results/h_profile"))
    ap.add_argument("--m2", type=float, nargs="+", default=[1 / 12, 0.5, 1.0, 3.0])
    ap.add_argument("--points", type=int, default=512)
    args = ap.parse_args()

    theta = -math.pi + 2 * math.pi * np.arange(args.points) / args.points
    cols = [h_density(m2, theta) for m2 in args.m2]
    write_csv(args.out / "H.csv", ["theta"] + [f"m2={m2:g}" for m2 in args.m2],
              zip(theta, *cols))
    for m2, c in zip(args.m2, cols):
        print(f"m2={m2:<8g} H(0)={h_density(m2, [0.0])[0]:.10f}  min H={c.min():.6f}")

    hier = stationary_hierarchy(2, 1.0, radii={1: 64, 2: 48}, validate=False)
    grid = grid_points(2, 64 * 64)
    d = nu_density(hier, 2, grid)
    write_csv(args.out / "nu2_m2=1.csv", ["theta1", "theta2", "density"],
              [list(p) + [v] for p, v in zip(grid, d.values)])
    print(f"nu_2 density ({d.summation}): min={d.min_value:.3e} origin={d.origin_value:.4f} "
          f"max at origin={d.max_at_origin}")


if __name__ == "__main__":
    main()
