"""Acceptance criteria 1 to 10, one test each, at the stated tolerances.

Each test appends a one-line PASS/FAIL summary that conftest prints at the
end of the run.  Criteria that fail do so on the numbers below; the README
explains why.
"""

import csv
import functools
import io
import math
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE
from yamabe_lab import geometry as geo
from yamabe_lab.constructions import best_slice, combining_values, fit_decay, kobayashi_test_function, reflect_extend
from yamabe_lab.functional import energy
from yamabe_lab.harness import proportionality_constant
from yamabe_lab.solver import (
    SolverOptions,
    closed_form_hemisphere,
    closed_form_sphere,
    lambda_sweep,
    minimize_energy,
    refine_and_extrapolate,
)

OPTS = SolverOptions(mesh_nodes=257)
L_NECK = (5.0, 10.0, 20.0, 40.0)
WINDOW = (0.8, 1.2)


def record(k: int, ok: bool, detail: str):
    ACCEPTANCE.append((k, bool(ok), detail))
    assert ok, f"criterion {k}: {detail}"


@functools.lru_cache(maxsize=None)
def Y(m: geo.ModelManifold, a: float, b: float, nodes: int = 257):
    return minimize_energy(m, a, b, SolverOptions(mesh_nodes=nodes))


def test_criterion_01_sphere_oracle():
    start = time.perf_counter()
    exact = closed_form_sphere(3)
    est = Y(geo.round_sphere(3), 1.0, 0.0, 513)
    ext = refine_and_extrapolate(geo.round_sphere(3), 1.0, 0.0, SolverOptions(mesh_nodes=513))
    elapsed = time.perf_counter() - start
    err = abs(est.value - exact) / exact
    err_x = abs(ext.extrapolated_value - exact) / exact
    ok = est.converged and err < 0.01 and err_x < 0.001 and elapsed < 10.0
    record(1, ok, f"Y={est.value:.6f} (rel err {err:.1e}), extrapolated rel err {err_x:.1e}, {elapsed:.1f} s")


def test_criterion_02_reflection_identity():
    half = Y(geo.hemisphere(3), 1.0, 0.0)
    full = reflect_extend(half.minimizer)
    e_half = energy(half.minimizer.model, half.minimizer).total
    e_full = energy(full.model, full).total
    doubling = abs(e_full - 2.0 * e_half) / e_full
    sphere = Y(geo.round_sphere(3), 1.0, 0.0, 513).value
    target = 2.0 ** (-2.0 / 3.0) * sphere
    rel = abs(half.value - target) / target
    ok = doubling < 1e-10 and rel < 0.01
    record(2, ok, f"doubling defect {doubling:.1e}, Y(S3+)={half.value:.4f} vs {target:.4f} (rel {rel:.1e})")


def test_criterion_03_combining_function():
    rng = np.random.default_rng(20240601)
    alpha = np.linspace(0.0, 1.0, 10_000)
    start = time.perf_counter()
    worst, endpoint_ok = math.inf, True
    for _ in range(1000):
        Y1, Y2 = rng.uniform(0.0, 100.0, 2)
        n = int(rng.integers(3, 7))
        f = combining_values(Y1, Y2, n, alpha)
        lo = min(Y1, Y2)
        worst = min(worst, f.min() - (lo - 1e-12))
        endpoint_ok &= f[0] == Y2 and f[-1] == Y1 and abs(f.min() - lo) <= 1e-12
    elapsed = time.perf_counter() - start
    ok = worst >= 0.0 and endpoint_ok and elapsed < 1.0
    record(3, ok, f"min slack {worst:.2e}, endpoints attained {endpoint_ok}, {elapsed:.2f} s")


def test_criterion_04_covering_bound():
    worst, where = math.inf, None
    for lam in (0.25, 0.5, 0.75, 1.0):
        for L in (5.0, 10.0, 20.0):
            base = Y(geo.quotient_product(3, L), lam, 1.0 - lam)
            cover = Y(geo.schoen_product(3, L), lam, 1.0 - lam)
            rhs = cover.value / 2.0 ** (2.0 / 3.0)
            rel = (base.value - rhs) / rhs
            if rel < worst:
                worst, where = rel, (lam, L)
    ok = worst >= -0.01
    record(4, ok, f"smallest relative margin {worst:+.2e} at (lambda, L) = {where}")


def _decay_study(builder, lam: float):
    """Decay exponents of E(F_l) - Y and of the slice minima, and the smallest constraint of F_l."""
    over, slices, constraints = [], [], []
    for l in L_NECK:
        m = builder(3, l)
        est = Y(m, lam, 1.0 - lam)
        bs = best_slice(m, est.minimizer)
        ext = kobayashi_test_function(m, est.minimizer, bs.t_l)
        # E(F_l) - Y equals the decay-cylinder energy exactly; the closed form
        # avoids cancellation once the difference drops below round-off
        assert abs(ext.energy() - est.value - ext.overshoot) <= 1e-9 * est.value
        over.append(ext.overshoot)
        slices.append(bs.slice_integral)
        constraints.append(ext.constraint(lam, 1.0 - lam))
    return fit_decay(L_NECK, over), fit_decay(L_NECK, slices), min(constraints)


def _in_window(p: float) -> bool:
    return WINDOW[0] <= p <= WINDOW[1]


def test_criterion_05_kobayashi_decay():
    d, s, c = _decay_study(geo.capsule, 1.0)
    ok = _in_window(d.exponent) and _in_window(s.exponent) and c >= 1.0 - 1e-12
    record(
        5,
        ok,
        f"energy exponent {d.exponent:.2f}, slice exponent {s.exponent:.2f}, "
        f"min constraint {c:.12f}; exponential rate {d.exp_rate:.3f}",
    )


def test_criterion_06_boundary_decay():
    parts, ok = [], True
    for lam in (0.0, 0.5, 1.0):
        d, s, c = _decay_study(geo.hemi_capsule, lam)
        ok &= _in_window(d.exponent) and _in_window(s.exponent) and c >= 1.0 - 1e-12
        parts.append(f"lambda={lam:g}: {d.exponent:.2f}/{s.exponent:.2f}/{c:.6f}")
    record(6, ok, "energy/slice exponent/min constraint " + "; ".join(parts))


def test_criterion_07_monotonicity_and_continuity():
    m = geo.hemisphere(3)
    slack = 1e-4
    weights = (0.0, 0.25, 0.5, 1.0, 2.0)
    a_sweep = [Y(m, a, 1.0).value for a in weights]
    b_sweep = [Y(m, 1.0, b).value for b in weights]

    def non_increasing(vals):
        return all(y <= x * (1 + slack) for x, y in zip(vals, vals[1:]))

    grid = [round(0.01 * k, 2) for k in range(101)]
    sweep = lambda_sweep(m, grid, OPTS)
    values = np.array([est.value for _, est in sweep])
    jumps = np.abs(np.diff(values))
    ratio = jumps.max() / np.median(jumps)
    # lambda -> 0 limit from the first positive grid points, linearly extrapolated
    limit = 2.0 * values[1] - values[2]
    rel0 = abs(limit - values[0]) / values[0]
    ok = non_increasing(a_sweep) and non_increasing(b_sweep) and ratio <= 10.0 and rel0 < 0.01
    record(
        7,
        ok,
        f"a-sweep {non_increasing(a_sweep)}, b-sweep {non_increasing(b_sweep)}, "
        f"max/median jump {ratio:.2f}, lambda->0 rel diff {rel0:.1e}",
    )


def test_criterion_08_escobar_proportionality():
    lams = (0.0, 0.25, 0.5, 0.75, 1.0)
    solver_vals = np.array([Y(geo.hemisphere(3), lam, 1.0 - lam).value for lam in lams])
    formula = np.array([closed_form_hemisphere(3, lam).published for lam in lams])
    # the most favourable single constant: it minimizes the worst residual
    kappa = proportionality_constant(solver_vals, formula)
    resid = np.abs(solver_vals - kappa * formula) / solver_vals
    factor = closed_form_hemisphere(3, 0.0).factor
    ok = bool(np.all(resid < 0.02))
    record(
        8,
        ok,
        f"fitted constant {kappa:.4f} (energy normalization factor {factor:g}), "
        f"residuals {', '.join(f'{r:.1%}' for r in resid)}",
    )


def test_criterion_09_schoen_limit():
    Ls = (2.0, 5.0, 10.0, 20.0, 30.0)
    sphere = closed_form_sphere(3)
    vals = [Y(geo.schoen_product(3, L), 1.0, 0.0).value for L in Ls]
    below = all(v <= sphere * 1.01 for v in vals)
    past = [v for L, v in zip(Ls, vals) if L > 2.0 * math.pi]
    monotone = all(y >= x * (1 - 1e-9) for x, y in zip(past, past[1:]))
    reach = vals[-1] >= 0.9 * sphere
    ok = below and monotone and reach
    record(9, ok, f"values {', '.join(f'{v:.3f}' for v in vals)} vs Y(S3)={sphere:.3f}")


def _verify(outdir) -> tuple[float, bytes, str]:
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "yamabe_lab", "verify", "--suite", "all", "--n", "3", "--seed", "0", "-o", str(outdir)],
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - start
    assert proc.returncode in (0, 2), proc.stderr
    rows = list(csv.DictReader(io.StringIO((outdir / "results.csv").read_text())))
    # runtime_ms is wall-clock and excluded from the comparison
    table = "\n".join(",".join(v for k, v in r.items() if k != "runtime_ms") for r in rows)
    return elapsed, (outdir / "report.json").read_bytes(), table


def test_criterion_10_determinism(tmp_path):
    t1, json1, csv1 = _verify(tmp_path / "run1")
    t2, json2, csv2 = _verify(tmp_path / "run2")
    ok = max(t1, t2) < 300.0 and json1 == json2 and csv1 == csv2
    record(10, ok, f"runs {t1:.0f} s and {t2:.0f} s, report.json identical {json1 == json2}, results.csv identical {csv1 == csv2}")
