#!/usr/bin/env python3
"""Exact <Omega> - 1 against the asymptotic 2^{N(h(p) - R)} for the constrained code.

    python scripts/omega_decay.py --n 12 --p 0.5
"""
import argparse
import math
import sys

from subsetcodec import counting, ratefuncs
from subsetcodec.experiments import level_for_rate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--rates", default="0.25,0.5,0.75,1.0,1.25")
    args = ap.parse_args()
    n_plus = int(round(args.p * args.n))
    h = ratefuncs.binary_entropy(args.p)
    print("R,L,exact_minus_1,asymptotic,log2_ratio")
    for r in (float(x) for x in args.rates.split(",")):
        L = level_for_rate(args.n, r)
        extra = float(counting.expected_omega_constrained(n_plus, args.n - n_plus, L).value) - 1
        asym = 2.0 ** (args.n * (h - r))
        print(f"{r:g},{L},{extra:.6g},{asym:.6g},{math.log2(extra / asym):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
