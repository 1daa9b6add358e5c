"""Hemisphere constants from the solver and from round balls, beside the closed form.

Prints one row per lambda with the ratio of the solver value to the closed
form; a constant ratio would mean the two differ only by normalization.
"""

import argparse

from yamabe_lab import geometry as geo
from yamabe_lab.harness import proportionality_constant
from yamabe_lab.solver import SolverOptions, cap_family_minimum, closed_form_hemisphere, minimize_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--mesh-nodes", type=int, default=513)
    ap.add_argument("--lambdas", default="0,0.25,0.5,0.75,1")
    args = ap.parse_args()
    lams = [float(x) for x in args.lambdas.split(",")]
    opts = SolverOptions(mesh_nodes=args.mesh_nodes)
    m = geo.hemisphere(args.n)
    rows = []
    for lam in lams:
        est = minimize_energy(m, lam, 1.0 - lam, opts)
        ball, rho = cap_family_minimum(args.n, lam)
        cf = closed_form_hemisphere(args.n, lam)
        rows.append((lam, est.value, ball, rho, cf.published, cf.rescaled))
    k = proportionality_constant([r[1] for r in rows], [r[4] for r in rows])
    print(f"{'lambda':>7} {'solver':>10} {'balls':>10} {'rho':>7} {'formula':>9} {'x factor':>9} {'ratio':>7} {'resid':>7}")
    for lam, y, ball, rho, formula, rescaled in rows:
        print(
            f"{lam:7.3f} {y:10.5f} {ball:10.5f} {rho:7.4f} {formula:9.5f} {rescaled:9.4f} "
            f"{y / formula:7.4f} {abs(y - k * formula) / y:7.2%}"
        )
    print(f"best single constant {k:.4f}; energy normalization factor {closed_form_hemisphere(args.n, 0).factor:g}")


if __name__ == "__main__":
    main()
