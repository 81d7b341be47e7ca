"""Oseledets flag of the two-symbol cocycle and the basin summary.

    python scripts/basin_demo.py --steps 10000 --points 100
"""
import argparse

from gibbslab.cocycle import basin_check, oseledets_flags, top_exponent_by_growth, two_symbol_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--points", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    c = two_symbol_demo()
    flag = oseledets_flags(c, args.steps, seed=args.seed)
    rep = basin_check(c, flag, n_points=args.points, seed=args.seed)
    print(f"exponents        {flag.exponents}")
    print(f"growth oracle    {top_exponent_by_growth(c, 10**6, seed=args.seed + 1):.4f}")
    print(f"generic passes   {rep['generic_pass']}/{args.points}")
    print(f"attraction rate  {rep['decay_rate']:.4f} (gap {flag.gap:.4f})")
    print(f"worst generic W1 {max(rep['generic_w1_fast']):.4f}")
    for p in rep["prepared"]:
        print(f"prepared start {p['start']}: W1 slow {p['w1_slow']:.4f}, fast {p['w1_fast']:.4f}")


if __name__ == "__main__":
    main()
