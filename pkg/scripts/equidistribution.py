"""Print the convergence table of theta_R for a representation and potential.

    python scripts/equidistribution.py --rep fuchsian --potential zero --radii 7 8 9 10 11
"""
import argparse
import json

from gibbslab.config import parse_rep, parse_x
from gibbslab.group import ball
from gibbslab.measures import cauchy_diagnostic, ledrappier_boundary, theta, wasserstein
from gibbslab.potential import estimate_pressure, parse_potential


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rep", default="fuchsian")
    ap.add_argument("--potential", default="zero")
    ap.add_argument("--x", default="0.37")
    ap.add_argument("--radii", type=float, nargs="+", default=[8, 9, 10, 11])
    ap.add_argument("--compare", nargs="*", default=["-2", "5", "inf"], help="other fiber points for the sensitivity check")
    args = ap.parse_args()

    F = parse_potential(args.potential)
    B = ball(max(args.radii))
    ref = None
    if args.rep == "fuchsian":
        P = estimate_pressure(F, B, (max(args.radii) - 3, max(args.radii))).slope
        ref = ledrappier_boundary(F, B, max(args.radii), P)
    rep = parse_rep(args.rep)
    table = cauchy_diagnostic(rep, F, parse_x(args.x), args.radii, B, reference=ref)
    out = table.to_json()
    # dependence on the fiber point at the largest radius
    R = max(args.radii)
    base = theta(rep, F, R, parse_x(args.x), B)
    out["w1_to_other_x"] = {x: wasserstein(base, theta(rep, F, R, parse_x(x), B)) for x in args.compare}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
