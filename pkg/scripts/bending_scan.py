"""Circle-fit residual of the orbit of x0 as the bending angle grows, as CSV.

    python scripts/bending_scan.py --angles 0 0.1 0.2 0.3 0.5
"""
import argparse

from gibbslab.group import ball, bend, fuchsian, injectivity_defect, rep_images
from gibbslab.hypgeom import ProjPoint
from gibbslab.measures import circle_fit_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--angles", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2, 0.3, 0.5])
    ap.add_argument("--R", type=float, default=9.0)
    ap.add_argument("--x", type=float, default=0.37)
    args = ap.parse_args()

    B = ball(args.R)
    x = ProjPoint.from_chart(args.x).u
    print("theta,circle_residual,coincident_pairs")
    for th in args.angles:
        r = bend(fuchsian(), th)
        res = circle_fit_residual(rep_images(r, B) @ x)
        print(f"{th:g},{res:.6g},{injectivity_defect(r, B)}")


if __name__ == "__main__":
    main()
