"""Sweep t for the measure t (delta_1 + delta_0 - delta_-1) / 3 on Z.

The spectral radius is t sqrt(5) / 3, so the operator is uniformly mean
ergodic with powers tending to zero exactly while t < 3 / sqrt(5).  Past that
point the radius exceeds 1 and the powers blow up.
"""
import argparse
import math

import numpy as np

from ergconv.ergodicity import classify
from ergconv.golden import three_atom_measure
from ergconv.measure import power
from ergconv.spectral import radius_estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.9)
    ap.add_argument("--hi", type=float, default=1.5)
    ap.add_argument("--steps", type=int, default=13)
    ap.add_argument("--p", type=float, default=2.0)
    args = ap.parse_args()
    print(f"threshold 3/sqrt(5) = {3 / math.sqrt(5):.6f}")
    print(f"{'t':>8} {'radius':>10} {'UME':>8} {'PB':>8} {'|mu^200|':>12}")
    for t in np.linspace(args.lo, args.hi, args.steps):
        mu = three_atom_measure(float(t))
        r = radius_estimate(mu, args.p)
        v = classify(mu, args.p).verdicts
        n200 = power(mu, 200).norm
        print(f"{t:8.4f} {r.hi:10.6f} {v['uniformly_mean_ergodic']:>8} {v['power_bounded']:>8} {n200:12.4e}")


if __name__ == "__main__":
    main()
