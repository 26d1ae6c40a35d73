#!/usr/bin/env python3
"""Run the symmetric coined walk on a line and look at the spread.

Prints the quantum vs classical standard deviation at the chosen horizon
and writes the position law as CSV. With --plot a PNG of the familiar
double-peaked profile (quantum) against the binomial bell (classical)
is saved next to the CSV.
"""

import argparse
import math
import sys
from pathlib import Path

from qwalklab.analysis import (
    classical_binomial,
    displacement_labels,
    moments,
    position_distribution,
    relabel,
    total_variation,
    write_distribution,
)
from qwalklab.coined import InitialCoinSpec, evolve, initial_state
from qwalklab.coins import hadamard_coin
from qwalklab.substrate import make_line


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=100, help="walk length T")
    ap.add_argument("--b", type=float, default=0.5, help="coin weight of the first component")
    ap.add_argument("--beta", type=float, default=math.pi / 2, help="relative coin phase")
    ap.add_argument("--out", type=Path, default=Path("line_walk.csv"))
    ap.add_argument("--plot", action="store_true", help="also save a PNG next to the CSV")
    args = ap.parse_args(argv)

    t = args.steps
    n = 2 * t + 1
    sub = make_line(n)
    coin = hadamard_coin()
    state = evolve(
        initial_state(sub, InitialCoinSpec(b=args.b, beta=args.beta, start_vertex=t)),
        coin,
        sub,
        t,
    )
    quantum = relabel(position_distribution(state), displacement_labels(n, t))
    classical = classical_binomial(t)

    mq, mc = moments(quantum), moments(classical)
    print(f"T = {t}")
    print(f"quantum   sigma = {mq.sigma:.4f}   (mean {mq.mean:+.4f})")
    print(f"classical sigma = {mc.sigma:.4f}")
    print(f"sigma ratio     = {mq.sigma / mc.sigma:.3f}")
    print(f"total variation = {total_variation(quantum, classical):.4f}")

    write_distribution(quantum, args.out)
    print(f"wrote {args.out}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 4))
        keep = quantum.probabilities > 0  # plot only the occupied parity
        ax.plot(quantum.labels[keep], quantum.probabilities[keep], label="quantum")
        keepc = classical.probabilities > 0
        ax.plot(classical.labels[keepc], classical.probabilities[keepc], "--", label="classical")
        ax.set_xlabel("displacement")
        ax.set_ylabel("probability")
        ax.set_title(f"coined walk on a line, T={t}")
        ax.legend()
        png = args.out.with_suffix(".png")
        fig.savefig(png, dpi=150, bbox_inches="tight")
        print(f"wrote {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
