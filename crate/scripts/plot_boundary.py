#!/usr/bin/env python3
"""Plot the free boundary from one or more `parsearch solve` output directories.

Usage: plot_boundary.py OUT_DIR [OUT_DIR ...] [--save FILE]

Reads boundary.csv (two-alternative runs) and draws the boundary nodes
together with the obstacle kinks x1 = x2, x1 = 0 and x2 = 0.
"""
import argparse
import csv
from pathlib import Path

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [float(r["x1"]) for r in rows], [float(r["x2"]) for r in rows]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dirs", nargs="+", type=Path)
    parser.add_argument("--save", type=Path)
    args = parser.parse_args()

    fig, ax = plt.subplots(figsize=(6, 6))
    lo, hi = float("inf"), float("-inf")
    for d in args.dirs:
        x1, x2 = load(d / "boundary.csv")
        ax.scatter(x1, x2, s=1, label=d.name)
        lo, hi = min(lo, *x1, *x2), max(hi, *x1, *x2)
    ax.plot([lo, hi], [lo, hi], "k:", lw=0.7)
    ax.axhline(0, color="k", lw=0.5)
    ax.axvline(0, color="k", lw=0.5)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    ax.legend(markerscale=8)
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
