"""Half spheres cut along the axis against the hemisphere, per lambda.

Both are conformal to the round hemisphere, but on the axis-cut model the
fiber-constant fields miss the off-axis bubbles, so its estimate is only an
upper bound for the class.
"""

import argparse

from yamabe_lab import geometry as geo
from yamabe_lab.solver import SolverOptions, cap_family_minimum, minimize_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--mesh-nodes", type=int, default=257)
    args = ap.parse_args()
    opts = SolverOptions(mesh_nodes=args.mesh_nodes)
    print(f"{'lambda':>7} {'hemisphere':>11} {'half_sphere':>12} {'balls':>10}")
    for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
        a, b = lam, 1.0 - lam
        hemi = minimize_energy(geo.hemisphere(args.n), a, b, opts).value
        half = minimize_energy(geo.half_sphere(args.n), a, b, opts).value
        print(f"{lam:7.2f} {hemi:11.5f} {half:12.5f} {cap_family_minimum(args.n, lam)[0]:10.5f}")


if __name__ == "__main__":
    main()
