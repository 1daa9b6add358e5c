"""Command-line front end.

Commands::

    yamabe-lab compute --model schoen_product --n 3 --L 20 --lambda 1
    yamabe-lab sweep   --model hemisphere --n 3 --lambda-grid 0:1:0.05
    yamabe-lab verify  --suite all --n 3
    yamabe-lab all     --n 3

Every run writes ``results.csv`` and ``report.json`` to the output directory;
sweeps also write tab-separated plot data with columns x, Y, residual.

Exit status:

* 0: every verdict passes
* 1: the configuration is invalid or the run cannot be carried out
* 2: some verdict fails or is inconclusive
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from . import geometry as geo
from .config import COMMANDS, ConfigError, RunConfig, build_config, parse_lambda_grid, read_raw
from .harness import (
    INCONCLUSIVE,
    PASS,
    HarnessOptions,
    InequalityReport,
    make_report,
    overall_status,
    run_suite,
)
from .solver import YamabeEstimate, lambda_sweep, minimize_energy, refine_and_extrapolate

log = logging.getLogger("yamabe_lab")

CSV_COLUMNS = ("check", "model", "n", "lambda", "a", "b", "mesh", "lhs", "rhs", "margin", "verdict", "runtime_ms")
DEFAULT_SWEEP_MODEL = "hemisphere"
DEFAULT_SWEEP_GRID = "0:1:0.05"


def thread_count() -> int:
    raw = os.environ.get("YAMABE_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- output -------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else "nan"
    return str(value)


def csv_row(r: InequalityReport) -> dict:
    md = r.metadata
    row = {
        "check": r.name,
        "model": md.get("model", ""),
        "n": md.get("n", ""),
        "lambda": md.get("lambda"),
        "a": md.get("a"),
        "b": md.get("b"),
        "mesh": md.get("mesh", ""),
        "lhs": r.lhs,
        "rhs": r.rhs,
        "margin": r.margin,
        "verdict": r.verdict,
        "runtime_ms": round(r.runtime_ms, 3),
    }
    numeric = [row[k] for k in ("lhs", "rhs", "margin")]
    if any(isinstance(v, float) and not math.isfinite(v) for v in numeric):
        row["verdict"] = INCONCLUSIVE
    return {k: _cell(v) for k, v in row.items()}


def write_csv(path: Path, reports: list[InequalityReport]):
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow(csv_row(r))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def write_json(path: Path, reports: list[InequalityReport]):
    data = [_jsonable(r.to_json()) for r in reports]
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_tsv(path: Path, xs, ys, residuals):
    with path.open("w") as fh:
        fh.write("x\tY\tresidual\n")
        for x, y, res in zip(xs, ys, residuals):
            fh.write(f"{_cell(float(x))}\t{_cell(float(y))}\t{_cell(float(res))}\n")


def write_series(outdir: Path, reports: list[InequalityReport]) -> list[Path]:
    written, seen = [], set()
    for r in reports:
        series = r.metadata.get("series")
        if not series or series["name"] in seen:
            continue
        seen.add(series["name"])
        path = outdir / f"sweep_{series['name']}.tsv"
        write_tsv(path, series["x"], series["Y"], series["residual"])
        written.append(path)
    return written


# -- commands -----------------------------------------------------------------


def estimate_report(m: geo.ModelManifold, est: YamabeEstimate, lam, mesh: int) -> InequalityReport:
    """A single estimate as a report row: lhs is the value, rhs the extrapolation if any."""
    rhs = est.extrapolated_value if est.extrapolated_value is not None else est.value
    meta = {
        "model": m.label,
        "n": m.n,
        "lambda": lam,
        "a": est.a,
        "b": est.b,
        "mesh": mesh,
        "residual": est.euler_lagrange_residual,
        "iterations": est.iterations,
        "start": est.start,
        "converged": est.converged,
        "level_values": est.level_values,
        "observed_order": est.observed_order,
    }
    return make_report("estimate", est.value, rhs, ">=", "discrete estimate bounds the infimum from above", meta, converged=est.converged)


def do_compute(cfg: RunConfig) -> list[InequalityReport]:
    m = cfg.build_model()
    a, b = cfg.weights()
    start = time.perf_counter()
    if cfg.refine:
        est = refine_and_extrapolate(m, a, b, cfg.solver)
    else:
        est = minimize_energy(m, a, b, cfg.solver)
    rep = estimate_report(m, est, cfg.lam, cfg.solver.mesh_nodes)
    rep.runtime_ms = 1000.0 * (time.perf_counter() - start)
    return [rep]


def do_sweep(cfg: RunConfig, model: geo.ModelManifold | None = None, grid=None) -> tuple[list[InequalityReport], dict]:
    m = model or cfg.build_model()
    grid = grid or cfg.lambda_grid
    start = time.perf_counter()
    points = lambda_sweep(m, grid, cfg.solver)
    each = 1000.0 * (time.perf_counter() - start) / max(len(points), 1)
    reports, xs, ys, rs = [], [], [], []
    for lam, est in points:
        if isinstance(est, YamabeEstimate):
            rep = estimate_report(m, est, lam, cfg.solver.mesh_nodes)
            xs.append(lam)
            ys.append(est.value)
            rs.append(est.euler_lagrange_residual)
        else:
            rep = make_report(
                "estimate",
                math.nan,
                math.nan,
                ">=",
                "discrete estimate bounds the infimum from above",
                {"model": m.label, "n": m.n, "lambda": lam, "a": lam, "b": 1.0 - lam, "mesh": cfg.solver.mesh_nodes, "error": str(est)},
                converged=False,
            )
        rep.runtime_ms = each
        reports.append(rep)
    series = {"name": f"lambda_{m.label}", "x": xs, "Y": ys, "residual": rs}
    return reports, series


def do_verify(cfg: RunConfig) -> list[InequalityReport]:
    hopts = HarnessOptions(solver=cfg.solver)
    return run_suite(cfg.suite, cfg.n, hopts, workers=thread_count())


def run(cfg: RunConfig) -> int:
    """Execute a configuration and write its artifacts; returns the exit status."""
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    reports: list[InequalityReport] = []
    series = []
    if cfg.command == "compute":
        reports = do_compute(cfg)
    elif cfg.command == "sweep":
        reports, s = do_sweep(cfg)
        series.append(s)
    elif cfg.command == "verify":
        reports = do_verify(cfg)
    else:  # all
        reports = do_verify(cfg)
        model = cfg.build_model() if (cfg.model or cfg.model_spec) else geo.build_model(DEFAULT_SWEEP_MODEL, cfg.n)
        sweep_reports, s = do_sweep(cfg, model, cfg.lambda_grid or parse_lambda_grid(DEFAULT_SWEEP_GRID))
        reports += sweep_reports
        series.append(s)
    write_csv(out / "results.csv", reports)
    write_json(out / "report.json", reports)
    write_series(out, reports)
    for s in series:
        write_tsv(out / f"sweep_{s['name']}.tsv", s["x"], s["Y"], s["residual"])
    passed = sum(r.verdict == PASS for r in reports)
    log.info("%d/%d checks pass; artifacts in %s", passed, len(reports), out)
    return overall_status(reports)


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yamabe-lab", description="Yamabe constants of warped-product models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML file or one-line shorthand (e.g. 'hemisphere n=3 lambda=0.5')")
        p.add_argument("--model", help=f"builtin model: {', '.join(sorted(geo.BUILDERS))}")
        p.add_argument("--n", type=int)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--lambda-grid", dest="lambda_grid", help="start:stop:step or comma list")
        p.add_argument("--a", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--L", type=float, help="circle length of product models")
        p.add_argument("--l", type=float, help="neck length of glued models")
        p.add_argument("--radius", type=float)
        p.add_argument("--t-cut", dest="t_cut", type=float)
        p.add_argument("--mesh-nodes", dest="mesh_nodes", type=int)
        p.add_argument("--max-iterations", dest="max_iterations", type=int)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--restarts", type=int)
        p.add_argument("--refine", action="store_true", default=None, help="bisect the mesh and extrapolate")
        p.add_argument("--seed", type=int)
        p.add_argument("--suite", help="verification suite (default: all)")
        p.add_argument("-o", "--output", help="output directory (default: results)")
    return parser


ARG_KEYS = {
    "model": "model",
    "n": "n",
    "lam": "lambda",
    "lambda_grid": "lambda_grid",
    "a": "a",
    "b": "b",
    "L": "L",
    "l": "l",
    "radius": "radius",
    "t_cut": "t_cut",
    "mesh_nodes": "mesh_nodes",
    "max_iterations": "max_iterations",
    "tolerance": "tolerance",
    "restarts": "restarts",
    "refine": "refine",
    "seed": "seed",
    "suite": "suite",
    "output": "output",
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge a config file (or shorthand) with flags; explicit flags win."""
    raw, where = {}, {}
    if args.config:
        path = Path(args.config)
        raw, where = read_raw(path.read_text() if path.exists() else args.config)
    raw["command"] = args.command
    for attr, key in ARG_KEYS.items():
        value = getattr(args, attr)
        if value is not None:
            raw[key] = value
            where.pop(key, None)
    return build_config(raw, where)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(cfg)
    except Exception as exc:  # noqa: BLE001 - any failure of the run maps to status 1
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
