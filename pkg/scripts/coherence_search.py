"""Best coherence found by random search as the candidate budget grows."""

import argparse

from csfsk.chipforge import ForgeConfig, select_best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--p", type=int, nargs="+", default=[25, 50, 100])
    ap.add_argument("--budgets", type=int, nargs="+", default=[1, 10, 100, 1000])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("p".rjust(5) + "".join(f"{n:>10}" for n in args.budgets))
    for p in args.p:
        scores = [select_best(ForgeConfig(p, args.m, n, args.seed))[1] for n in args.budgets]
        print(f"{p:>5}" + "".join(f"{s:10.4f}" for s in scores))


if __name__ == "__main__":
    main()
