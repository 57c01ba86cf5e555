#!/usr/bin/env python3
"""Excitation spectra for Ohmic and super-Ohmic baths (data for Fig. 2-style
plots). Writes fig2_s1.csv / fig2_s2.csv plus manifests into --out."""

import argparse
import sys
from pathlib import Path

import numpy as np

from bosonboson.cli import main as cli_main

PLANS = Path(__file__).resolve().parent.parent / "plans"


def summarize(csv_path):
    table = np.genfromtxt(csv_path, delimiter=",", names=True)
    for alpha in np.unique(table["alpha"]):
        rows = table[table["alpha"] == alpha]
        i = int(np.argmax(rows["spectrum"]))
        print(f"  alpha={alpha:g}: peak S={rows['spectrum'][i]:.4f} at "
              f"delta_c={rows['delta_c_over_omega_c'][i]:+.3f} "
              f"(polaron shift {rows['polaron_shift_over_omega_c'][i]:.3f})")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig2")
    args = parser.parse_args()
    for name in ("fig2_s1", "fig2_s2"):
        code = cli_main(["spectrum", "--plan", str(PLANS / f"{name}.plan"),
                         "--out", args.out])
        if code:
            sys.exit(code)
        print(f"{name}:")
        summarize(Path(args.out) / f"{name}.csv")
