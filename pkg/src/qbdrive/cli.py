"""Command line entry point: ``qbdrive run | verify | sweep``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a
verification check failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigError, QBDriveError
from .experiment import PERTURBATIONS, load_config, run_experiment, with_overrides, write_csv
from .plotting import write_svg
from .verify import SUITES, run_suite

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
log = logging.getLogger("qbdrive")

_PARAMS = (("--omega", "omega"), ("--h0", "h0"), ("--delta-h", "delta_h"),
           ("--t-max", "t_max"), ("--dt", "dt"), ("--record-every", "record_every"))


def _add_params(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; command-line values take precedence")
    for flag, dest in _PARAMS:
        p.add_argument(flag, dest=dest, default=None,
                       help="accepts numbers or expressions such as pi/20")


def _overrides(args) -> dict:
    return {dest: getattr(args, dest) for _, dest in _PARAMS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbdrive", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one spin-1 driving experiment")
    _add_params(run)
    run.add_argument("--perturbation", choices=PERTURBATIONS, default=None)
    run.add_argument("--out-csv", dest="out_csv", default=None)
    run.add_argument("--out-svg", dest="out_svg", default=None)

    ver = sub.add_parser("verify", help="run built-in reference checks")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])

    sweep = sub.add_parser("sweep", help="run every perturbation and write CSV and SVG files")
    _add_params(sweep)
    sweep.add_argument("--perturbations", default="all",
                       help="comma-separated labels or 'all' (the four perturbations)")
    sweep.add_argument("--out-dir", dest="out_dir", default="results")
    sweep.add_argument("--workers", type=int, default=1)
    return parser


def _summary(run) -> str:
    return (f"perturbation={run.config.perturbation} mean_fidelity={run.mean_fidelity():.6f} "
            f"min_fidelity={run.fidelity.min():.6f} norm_drift={run.metadata['norm_drift']:.2e}")


def _write(run, csv_path, svg_path):
    if csv_path:
        write_csv(run, csv_path)
    if svg_path:
        write_svg(run, svg_path)


def cmd_run(args) -> int:
    ov = _overrides(args)
    ov.update(perturbation=args.perturbation, out_csv=args.out_csv, out_svg=args.out_svg)
    cfg = load_config(args.config, ov)
    log.info("config %s", cfg.echo())
    run = run_experiment(cfg)
    _write(run, cfg.out_csv, cfg.out_svg)
    print(_summary(run))
    return EXIT_OK


def _sweep_one(cfg, out_dir: str) -> str:
    run = run_experiment(cfg)
    stem = Path(out_dir) / f"spin1_{cfg.perturbation}"
    _write(run, stem.with_suffix(".csv"), stem.with_suffix(".svg"))
    return _summary(run)


def cmd_sweep(args) -> int:
    base = load_config(args.config, _overrides(args))
    if args.perturbations == "all":
        labels = [p for p in PERTURBATIONS if p != "none"]
    else:
        labels = [s.strip() for s in args.perturbations.split(",") if s.strip()]
    bad = [s for s in labels if s not in PERTURBATIONS]
    if bad or not labels:
        raise ConfigError(f"unknown perturbations {bad}; choose from {PERTURBATIONS}")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfgs = [with_overrides(base, perturbation=p) for p in labels]
    log.info("sweep over %s with %d worker(s)", labels, args.workers)
    if args.workers == 1:
        lines = [_sweep_one(c, args.out_dir) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            lines = list(pool.map(_sweep_one, cfgs, [args.out_dir] * len(cfgs)))
    for line in lines:
        print(line)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return EXIT_OK if run_suite(args.suite) else EXIT_VERIFY
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QBDriveError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
