#!/usr/bin/env python3
"""Tabulate h(p), xi(p), R_c(p) and the K-ary allocation check as one CSV.

    python scripts/tabulate_rates.py [--step 0.05] > rates.csv
"""
import argparse
import csv
import sys

import numpy as np

from subsetcodec import ratefuncs


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.05)
    args = ap.parse_args()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["p", "h", "xi", "Rc_unconstrained", "Rc_minus_h"])
    for p in np.arange(args.step, 1.0 - args.step / 2, args.step):
        p = round(float(p), 10)
        h = ratefuncs.binary_entropy(p)
        x = ratefuncs.xi(p)
        rc = ratefuncs.critical_rate_unconstrained(p)
        writer.writerow([f"{p:g}", f"{h:.10f}", f"{x:.10f}", f"{rc:.10f}", f"{rc - h:.10f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
