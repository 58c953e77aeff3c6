"""Print the independent nonzero structure constants of su(N) in the normalised basis.

    python3 scripts/structure_constants.py --dim 3
"""
import argparse
import itertools

import numpy as np

from qbdrive.algebra import build_gellmann_basis


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    args = ap.parse_args()
    B = build_gellmann_basis(args.dim)
    print(f"{'abc':>9}  {'f_abc':>12}  {'f_abc / sqrt(6)':>16}" if args.dim == 3 else
          f"{'abc':>9}  {'f_abc':>12}")
    for a, b, c in itertools.combinations(range(1, B.size + 1), 3):
        v = B.f(a, b, c)
        if abs(v) > 1e-12:
            extra = f"  {v / np.sqrt(6):16.6f}" if args.dim == 3 else ""
            print(f"{a:>3}{b:>3}{c:>3}  {v:12.6f}{extra}")


if __name__ == "__main__":
    main()
