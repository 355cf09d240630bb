"""CS/MF error-rate ratio under both chipping-receiver noise laws.

The exact law colours the noise with V V*; the averaged law replaces that by
its mean M I.  This prints the ratio for each law at a few chip counts.

    python scripts/noise_law_gap.py --trials 100000
"""

import argparse

from csfsk.harness import IFSK_BASE, ExperimentSpec, ratio_table, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--snr", type=float, default=17.0)
    ap.add_argument("--p", type=int, nargs="+", default=[50, 75, 100])
    args = ap.parse_args()

    print(f"{'p':>4} {'law':>9} {'ratio':>7}  interval")
    for law in ("averaged", "exact"):
        spec = ExperimentSpec(
            f"gap-{law}", IFSK_BASE, snr_db=(args.snr,), p_values=tuple(args.p),
            trials=args.trials, cs_noise=law,
        )
        for entry in ratio_table(run_experiment(spec)):
            p = int(entry.cell_key.rsplit("p=", 1)[1])
            if entry.ratio is None:
                print(f"{p:>4} {law:>9}   undefined")
                continue
            print(f"{p:>4} {law:>9} {entry.ratio:7.3f}  [{entry.ratio_low:.3f}, {entry.ratio_high:.3f}]")


if __name__ == "__main__":
    main()
