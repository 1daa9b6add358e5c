"""Y(S^{n-1} x S^1_L) against L, beside the constant-field energy and the sphere."""

import argparse

from yamabe_lab import geometry as geo
from yamabe_lab.harness import constant_regime_length
from yamabe_lab.solver import SolverOptions, closed_form_sphere, constant_field_energy, minimize_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--lengths", default="1,2,4,6,6.5,8,10,15,20,30,40")
    ap.add_argument("--mesh-nodes", type=int, default=257)
    args = ap.parse_args()
    opts = SolverOptions(mesh_nodes=args.mesh_nodes)
    sphere = closed_form_sphere(args.n)
    print(f"sphere {sphere:.5f}; constant field minimizes for L <= {constant_regime_length(args.n):.4f}")
    print(f"{'L':>6} {'Y':>10} {'constant':>10} {'Y/sphere':>9}")
    for L in (float(x) for x in args.lengths.split(",")):
        m = geo.schoen_product(args.n, L)
        est = minimize_energy(m, 1.0, 0.0, opts)
        print(f"{L:6.2f} {est.value:10.5f} {constant_field_energy(m, 1.0, 0.0):10.5f} {est.value / sphere:9.4f}")


if __name__ == "__main__":
    main()
