"""Write a lambda sweep of a builtin model as TSV (columns x, Y, residual)."""

import argparse
import sys

from yamabe_lab import geometry as geo
from yamabe_lab.config import parse_lambda_grid
from yamabe_lab.solver import SolverOptions, YamabeEstimate, lambda_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="hemisphere")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--grid", default="0:1:0.01")
    ap.add_argument("--mesh-nodes", type=int, default=257)
    args = ap.parse_args()
    m = geo.build_model(args.model, args.n)
    out = sys.stdout
    out.write("x\tY\tresidual\n")
    for lam, est in lambda_sweep(m, parse_lambda_grid(args.grid), SolverOptions(mesh_nodes=args.mesh_nodes)):
        if isinstance(est, YamabeEstimate):
            out.write(f"{lam!r}\t{est.value!r}\t{est.euler_lagrange_residual!r}\n")
        else:
            print(f"lambda={lam}: {est}", file=sys.stderr)


if __name__ == "__main__":
    main()
