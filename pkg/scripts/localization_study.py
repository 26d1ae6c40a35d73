#!/usr/bin/env python3
"""Static phase disorder versus the clean walk: does the spread saturate?

Each disorder realization fixes one random phase per site for the whole
run. Averaging over realizations, the standard deviation stops growing
with T (localization), while the clean walk keeps expanding linearly.
The inverse participation ratio tells the same story from the other
side: disordered runs stay concentrated.
"""

import argparse
import math
import sys
from pathlib import Path

from qwalklab.analysis import (
    displacement_labels,
    inverse_participation_ratio,
    moments,
    position_distribution,
    relabel,
)
from qwalklab.coined import InitialCoinSpec, evolve, initial_state
from qwalklab.coins import hadamard_coin
from qwalklab.decoherence import NoiseKind, NoiseModel, ensemble_average
from qwalklab.substrate import make_line


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--horizons", type=int, nargs="+", default=[50, 100, 200], help="walk lengths to compare"
    )
    ap.add_argument("--runs", type=int, default=120, help="disorder realizations per horizon")
    ap.add_argument("--strength", type=float, default=math.pi, help="phase window half-width")
    ap.add_argument("--noise-seed", type=int, default=7)
    ap.add_argument("--master-seed", type=int, default=11)
    ap.add_argument("--out", type=Path, default=None, help="optional CSV of the table below")
    args = ap.parse_args(argv)

    coin = hadamard_coin()
    noise = NoiseModel(kind=NoiseKind.STATIC_PHASE, strength=args.strength, seed=args.noise_seed)

    print(f"{'T':>5}  {'sigma clean':>12}  {'sigma disordered':>17}  {'IPR clean':>10}  {'IPR disordered':>15}")
    rows = []
    for t in args.horizons:
        n = 2 * t + 1
        sub = make_line(n)
        start = InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=t)
        labels = displacement_labels(n, t)

        clean = evolve(initial_state(sub, start), coin, sub, t)
        clean_dist = relabel(position_distribution(clean), labels)
        sc = moments(clean_dist).sigma
        ic = inverse_participation_ratio(clean_dist)

        res = ensemble_average(
            initial_state(sub, start), coin, sub, noise,
            n_steps=t, n_runs=args.runs, master_seed=args.master_seed,
        )
        sd = res.mean_sigma
        idis = float(res.per_run_ipr.mean())

        print(f"{t:>5}  {sc:>12.3f}  {sd:>17.3f}  {ic:>10.4f}  {idis:>15.4f}")
        rows.append((t, sc, sd, ic, idis))

    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "sigma_clean", "sigma_disordered", "ipr_clean", "ipr_disordered"])
            w.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
