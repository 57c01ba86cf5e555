#!/usr/bin/env python3
"""Rabi-like oscillations of the strongly driven cavity (Fig. 4-style data).

Runs the super-Ohmic alpha=0.05 demo (about 40 minutes) and the Ohmic
alpha=0.15 Wigner-snapshot run (a few minutes); both write time series,
photon distribution and Wigner grid at the first p1 maximum. Interrupted
runs continue with `bosonboson resume <out>/fig4_rabi.ckpt --plan ...`.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from bosonboson.cli import main as cli_main

PLANS = Path(__file__).resolve().parent.parent / "plans"


def summarize(out_dir, stem):
    table = np.genfromtxt(out_dir / f"{stem}.csv", delimiter=",", names=True)
    doc = json.loads((out_dir / f"{stem}_manifest.json").read_text())
    n = table["n_mean"]
    interior = (n[1:-1] > n[:-2]) & (n[1:-1] > n[2:])
    print(f"{stem}: max <n>={n.max():.3f}, {int(interior.sum())} maxima, "
          f"t_star={doc['diagnostics']['t_star']:g}, "
          f"p1(t_star)={doc['diagnostics']['p1_at_t_star']:.3f}")
    wig = np.genfromtxt(out_dir / f"{stem}_wigner.csv",
                        delimiter=",", names=True)
    print(f"  Wigner minimum {wig['wigner'].min():.4f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig4")
    parser.add_argument("--skip-slow", action="store_true",
                        help="run only the short Ohmic Wigner case")
    args = parser.parse_args()
    stems = ["fig4_wigner"] if args.skip_slow else ["fig4_rabi", "fig4_wigner"]
    for stem in stems:
        code = cli_main(["dynamics", "--plan", str(PLANS / f"{stem}.plan"),
                         "--out", args.out])
        if code:
            sys.exit(code)
        summarize(Path(args.out), stem)
