"""Radial reduction against the brute-force 3D grid sum for a few profiles,
including a grid-refinement column for the brute-force side."""

import argparse

import numpy as np

from polyharm.kernels import RieszPower
from polyharm.profiles import Indicator, Plateau
from polyharm.radial_expr import RadialExpr
from polyharm.riesz import convolve_bruteforce, convolve_radial

PROFILES = {
    "ball": (Indicator(1.0), dict(box_halfwidth=1.05)),
    "shifted": (RadialExpr.shifted_power(1.0, 2.0), dict(box_halfwidth=8.0, outer_halfwidth=80.0)),
    "plateau": (Plateau(1.0), dict(box_halfwidth=2.05)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--cells", type=int, nargs="+", default=[80, 160])
    ap.add_argument("--radii", type=float, nargs="+", default=[0.5, 2.0, 5.0])
    args = ap.parse_args()
    k = RieszPower(args.alpha)
    print("profile,r,radial," + ",".join(f"brute_{n},rel_{n}" for n in args.cells))
    for name, (f, kw) in PROFILES.items():
        for r in args.radii:
            exact = convolve_radial(k, f, 1.0, 3, r)
            cols = []
            for n in args.cells:
                b = convolve_bruteforce(k, f, 1.0, 3, cells_per_axis=n, x=np.array([r, 0.0, 0.0]), **kw)
                cols += [f"{b:.8g}", f"{abs(b - exact) / abs(exact):.2e}"]
            print(f"{name},{r:g},{exact:.10g}," + ",".join(cols))


if __name__ == "__main__":
    main()
