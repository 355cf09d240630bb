"""Run every experiment preset and write CSV/JSON outputs under one directory.

    python scripts/run_presets.py --trials 2000 --out results
"""

import argparse
import time

from csfsk import harness


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--presets", nargs="+", default=list(harness.PRESETS), choices=harness.PRESETS)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--candidates", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for name in args.presets:
        spec = harness.preset(name).with_overrides(
            trials=args.trials, candidates=args.candidates, master_seed=args.seed
        )
        t0 = time.perf_counter()
        result = harness.run_experiment(spec, workers=args.workers)
        paths = harness.write_outputs(result, args.out)
        print(f"{name}: {len(result.cells)} cells in {time.perf_counter() - t0:.0f}s -> {paths['results']}")
        for entry in harness.ratio_table(result):
            if entry.informative:
                print(f"  {entry.cell_key}  ratio {harness.fmt(entry.ratio) or 'undefined'}")


if __name__ == "__main__":
    main()
