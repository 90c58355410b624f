#!/usr/bin/env python3
"""Plot convergence-history CSV files produced by the boostconv CLI.

Usage:
    python scripts/plot_history.py out/burgers-*.history.csv --column resinf --log
    python scripts/plot_history.py out/linear-jacobi-{none,robust}.history.csv

Each file becomes one curve, labeled by its experiment name.
"""

import argparse
import csv
from pathlib import Path

import matplotlib.pyplot as plt


def load_column(path, column):
    ks, vals = [], []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            value = row.get(column, "")
            if value == "":
                continue
            ks.append(int(row["k"]))
            vals.append(float(value))
    return ks, vals


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("files", nargs="+", help="history CSV files")
    ap.add_argument("--column", default="relres2",
                    help="CSV column to plot (relres2, res2, resinf, energy_l2, kappa_f)")
    ap.add_argument("--log", action="store_true", help="logarithmic y axis")
    ap.add_argument("--out", default=None, help="write PNG instead of showing")
    args = ap.parse_args()

    for path in args.files:
        ks, vals = load_column(path, args.column)
        label = Path(path).name.replace(".history.csv", "")
        plt.plot(ks, vals, label=label)
    if args.log:
        plt.yscale("log")
    plt.xlabel("iteration k")
    plt.ylabel(args.column)
    plt.legend()
    plt.grid(True, which="both", alpha=0.3)
    if args.out:
        plt.savefig(args.out, dpi=150, bbox_inches="tight")
        print(f"wrote {args.out}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
