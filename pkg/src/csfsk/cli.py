"""Command line entry point: ``csfsk run | forge | oracle-check``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .chipforge import DESK_CANDIDATES, ForgeConfig, select_best
from .sensing import write_chip_matrix

log = logging.getLogger("csfsk")


def _run(args) -> int:
    spec = harness.preset(args.preset, include_large=args.include_large)
    spec = spec.with_overrides(
        trials=args.trials, master_seed=args.seed, candidates=args.candidates, cs_noise=args.cs_noise
    )

    def progress(cell):
        e = cell.estimate
        log.info("%s p=%d %s: %d/%d errors", cell.link.key, cell.p, cell.receiver.value, e.errors, e.trials)

    result = harness.run_experiment(spec, workers=args.workers, progress=progress)
    paths = harness.write_outputs(result, args.out)
    for entry in harness.ratio_table(result):
        print(f"{entry.cell_key}: ratio {harness.fmt(entry.ratio) or 'undefined'}")
    for skip in result.skipped:
        print(f"skipped {skip['cell']}: {skip['reason']}", file=sys.stderr)
    print(f"wrote {paths['results']}")
    return 0


def _forge(args) -> int:
    chips, score = select_best(ForgeConfig(args.p, args.m, args.candidates, args.seed), workers=args.workers)
    write_chip_matrix(chips, args.out)
    print(f"coherence {score!r}")
    return 0


def _oracle_check(args) -> int:
    worst = harness.oracle_check(args.m, args.oversample, args.trials, args.seed)
    ok = True
    for name, gap in worst.items():
        passed = gap <= args.tol
        ok &= passed
        print(f"{name}: max relative error {gap:.3e} {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csfsk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment preset and write CSV/JSON outputs")
    run.add_argument("--preset", required=True, choices=harness.PRESETS)
    run.add_argument("--trials", type=int, default=None, help="trials per cell (default 10000)")
    run.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    run.add_argument("--out", default="results")
    run.add_argument("--candidates", type=int, default=None, help=f"chip-matrix candidates (default {DESK_CANDIDATES})")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument(
        "--cs-noise", choices=("averaged", "exact"), default=None,
        help="chipping-receiver noise law (default averaged: white, variance N0*M/B)",
    )
    run.add_argument("--include-large", action="store_true", help="fig6: add the M=500 band")
    run.set_defaults(func=_run)

    forge = sub.add_parser("forge", help="select a low-coherence chip matrix")
    forge.add_argument("--p", type=int, required=True)
    forge.add_argument("--m", type=int, required=True)
    forge.add_argument("--candidates", type=int, default=DESK_CANDIDATES)
    forge.add_argument("--seed", type=int, default=0)
    forge.add_argument("--out", required=True)
    forge.add_argument("--workers", type=int, default=1)
    forge.set_defaults(func=_forge)

    check = sub.add_parser("oracle-check", help="compare closed forms against waveform quadrature")
    check.add_argument("--m", type=int, required=True)
    check.add_argument("--oversample", type=int, default=64)
    check.add_argument("--trials", type=int, default=20)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--tol", type=float, default=1e-6)
    check.set_defaults(func=_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)
