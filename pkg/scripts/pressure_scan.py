"""Pressure estimate as a function of the bump amplitude, as CSV on stdout.

    python scripts/pressure_scan.py --amplitudes -1 -0.5 0 0.5 1
"""
import argparse

from gibbslab.group import ball
from gibbslab.potential import bump_series, estimate_pressure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[-1.0, -0.5, 0.0, 0.5, 1.0])
    ap.add_argument("--radius", type=float, default=0.8)
    ap.add_argument("--window", type=float, nargs=2, default=[8, 11])
    args = ap.parse_args()

    B = ball(args.window[1])
    print("amplitude,pressure,fit_residual")
    for A in args.amplitudes:
        est = estimate_pressure(bump_series(r=args.radius, A=A), B, tuple(args.window))
        print(f"{A:g},{est.slope:.6f},{est.residual:.2e}")


if __name__ == "__main__":
    main()
