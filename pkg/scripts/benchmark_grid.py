"""Stitched vs naive round counts over a grid of walk lengths; prints medians and the fitted exponent."""

import argparse

import numpy as np

from stitchwalk.cli import ExperimentSpec, emit, fit_exponent, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", default="cycle:64")
    ap.add_argument("--ell", default="256,1024,4096")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="optional CSV of every trial row")
    args = ap.parse_args()
    ells = [int(x) for x in args.ell.split(",")]
    spec = ExperimentSpec(args.graph, "single", ells, lam="sqrt", trials=args.trials, seed=args.seed,
                          workers=args.workers)
    rows = run_experiment(spec)
    trials = [r for r in rows if isinstance(r["trial"], int)]
    print(f"{'ell':>6} {'lam':>5} {'median':>8} {'naive':>6} {'beats naive':>12}")
    med = []
    for ell in ells:
        sel = [r for r in trials if r["ell"] == ell]
        rounds = [r["rounds_total"] for r in sel]
        med.append(float(np.median(rounds)))
        beat = sum(x < ell for x in rounds)
        print(f"{ell:>6} {sel[0]['lam']:>5} {med[-1]:>8.1f} {ell:>6} {beat:>6}/{len(sel)}")
    print(f"fitted exponent of median rounds vs ell: {fit_exponent(ells, med):.3f}")
    if args.out:
        emit(rows, "csv", args.out)


if __name__ == "__main__":
    main()
