"""Completions for three-component constraint sets of su(3).

For {1,2,4} the pointwise completion exists and has a one-dimensional
commutant freedom.  For {3,4,5} it does not, and the invariant l(t) is
integrated instead; h8 then depends on the free angle theta.

    python3 scripts/k3_constraints.py --theta 0.4 --t-max 5
"""
import argparse

import numpy as np

from qbdrive.algebra import build_gellmann_basis
from qbdrive.errors import NoCompletion
from qbdrive.experiment import time_grid
from qbdrive.qb import solve_completion, solve_trajectory
from qbdrive.verify import h8_closed_form_345, l0_345, protocol_345


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--theta", type=float, default=0.4)
    ap.add_argument("--t-max", type=float, default=5.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    B = build_gellmann_basis(3)
    rng = np.random.default_rng(args.seed)
    h, d = np.zeros(8), np.zeros(8)
    h[[0, 1, 3]], d[[0, 1, 3]] = rng.normal(size=3), rng.normal(size=3)
    comp = solve_completion(h, d, (1, 2, 4), B)
    np.set_printoptions(precision=5, suppress=True)
    print("{1,2,4}: particular h1 =", comp.particular)
    print("         nullspace     =", comp.nullspace)

    P = protocol_345()
    try:
        solve_completion(P.h0(0.0), P.dh0(0.0), (3, 4, 5), B)
    except NoCompletion as exc:
        print("{3,4,5}: pointwise completion refused:", exc)
    grid = time_grid(args.t_max, args.dt)
    tr = solve_trajectory(P, l0_345(P.h0(0.0), args.theta), grid)
    ref = np.array([h8_closed_form_345(P.h0(t), P.dh0(t), args.theta, B) for t in grid])
    for k in np.linspace(0, len(grid) - 1, 6).astype(int):
        print(f"  t={grid[k]:6.3f}  h8={tr.h1_path[k, 7]: .8f}  closed form={ref[k]: .8f}")
    print(f"  max |difference| = {np.max(np.abs(tr.h1_path[:, 7] - ref)):.2e}")


if __name__ == "__main__":
    main()
