"""Cut-and-decay overshoot and slice minima against neck length.

Fits both a power law A / l^p and an exponential C exp(-k l) to each series.
"""

import argparse

from yamabe_lab import geometry as geo
from yamabe_lab.constructions import best_slice, fit_decay, kobayashi_test_function
from yamabe_lab.solver import SolverOptions, minimize_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=("capsule", "hemi_capsule"), default="capsule")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--lambda", dest="lam", type=float, default=1.0)
    ap.add_argument("--lengths", default="2,3,5,7.5,10,15,20,30,40")
    ap.add_argument("--mesh-nodes", type=int, default=257)
    args = ap.parse_args()
    builder = getattr(geo, args.kind)
    opts = SolverOptions(mesh_nodes=args.mesh_nodes)
    ls = [float(x) for x in args.lengths.split(",")]
    over, slices = [], []
    print(f"{'l':>6} {'Y':>12} {'t_l':>8} {'slice':>12} {'overshoot':>12} {'constraint':>12}")
    for l in ls:
        m = builder(args.n, l)
        est = minimize_energy(m, args.lam, 1.0 - args.lam, opts)
        bs = best_slice(m, est.minimizer)
        ext = kobayashi_test_function(m, est.minimizer, bs.t_l)
        over.append(ext.overshoot)
        slices.append(bs.slice_integral)
        print(
            f"{l:6.2f} {est.value:12.6f} {bs.t_l:8.3f} {bs.slice_integral:12.4e} "
            f"{ext.overshoot:12.4e} {ext.constraint(args.lam, 1.0 - args.lam):12.9f}"
        )
    for name, ys in (("overshoot", over), ("slice", slices)):
        fit = fit_decay(ls, ys)
        print(f"{name}: power exponent {fit.exponent:.3f}, exponential rate {fit.exp_rate:.4f}")


if __name__ == "__main__":
    main()
