"""Run the ideal and the four perturbed spin-1 experiments and write CSV/SVG files.

    python3 scripts/spin1_sweep.py --out-dir results --workers 4
"""
import argparse
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from qbdrive.experiment import PERTURBATIONS, ExperimentConfig, run_experiment, write_csv
from qbdrive.plotting import write_svg


def one(label: str, out_dir: str) -> str:
    run = run_experiment(ExperimentConfig(perturbation=label))
    stem = Path(out_dir) / f"spin1_{label}"
    write_csv(run, stem.with_suffix(".csv"))
    write_svg(run, stem.with_suffix(".svg"))
    return (f"{label:>4}  mean F {run.mean_fidelity():.4f}  min F {run.fidelity.min():.4f}  "
            f"I/(dh^2/w^2) in [{run.I_t.min() * run.config.omega ** 2 / run.config.delta_h ** 2:+.3f}, "
            f"{run.I_t.max() * run.config.omega ** 2 / run.config.delta_h ** 2:+.3f}]")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    start = time.perf_counter()
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for line in pool.map(one, PERTURBATIONS, [args.out_dir] * len(PERTURBATIONS)):
            print(line)
    print(f"done in {time.perf_counter() - start:.1f} s; files in {args.out_dir}/")


if __name__ == "__main__":
    main()
