"""Run configuration: parsing and validation, plus YAML model specs.

A configuration is either a YAML mapping or a one-line shorthand such as
``hemisphere n=3 lambda=0.5``.  In the shorthand, bare words name the command
and/or the model and every other token is ``key=value``.  A ``model`` entry in
YAML may also be a mapping describing a custom chain of warped segments (the
output of :func:`model_to_dict`).
"""

from __future__ import annotations

import difflib
import shlex
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import geometry as geo
from .solver import SolverOptions

COMMANDS = ("compute", "sweep", "verify", "all")
SOLVER_KEYS = ("mesh_nodes", "max_iterations", "tolerance", "restarts", "refinement_levels")
MODEL_PARAM_KEYS = ("L", "l", "radius", "t_cut")
TOP_KEYS = (
    "command",
    "model",
    "n",
    "lambda",
    "lambda_grid",
    "a",
    "b",
    "seed",
    "output",
    "suite",
    "refine",
    *MODEL_PARAM_KEYS,
    *SOLVER_KEYS,
)
MODEL_KEYS = ("segments", "ends", "covering_multiplicity", "lateral_boundary", "neck", "label")
SEGMENT_KEYS = ("n", "warp", "domain", "fiber_quotient_order", "reversed")
WARP_KEYS = ("kind", "params", "knots")
END_KEYS = ("kind", "partner")
ALL_KEYS = tuple(dict.fromkeys(TOP_KEYS + MODEL_KEYS + SEGMENT_KEYS + WARP_KEYS + END_KEYS))


class ConfigError(ValueError):
    """Invalid configuration; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


def suggest(key: str, candidates=ALL_KEYS) -> str | None:
    """Closest known key, also matching against the words of compound keys."""
    best = difflib.get_close_matches(key, candidates, n=1, cutoff=0.6)
    if best:
        return best[0]
    scored = []
    for cand in candidates:
        for word in cand.split("_"):
            ratio = difflib.SequenceMatcher(None, key.lower(), word.lower()).ratio()
            if ratio >= 0.7:
                scored.append((ratio, cand))
    return max(scored)[1] if scored else None


def _unknown(key: str, allowed, line=None, column=None) -> ConfigError:
    hint = suggest(key)
    msg = f"unknown key {key!r}"
    if hint:
        msg += f"; did you mean {hint!r}?"
    return ConfigError(msg, line, column)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str | None = None
    model_spec: dict | None = None
    model_params: dict = field(default_factory=dict)
    n: int = 3
    lam: float | None = None
    lambda_grid: tuple[float, ...] | None = None
    a: float | None = None
    b: float | None = None
    solver: SolverOptions = SolverOptions()
    output: Path = Path("results")
    seed: int = 0
    suite: str = "all"
    refine: bool = False

    def build_model(self) -> geo.ModelManifold:
        if self.model_spec is not None:
            return model_from_dict(self.model_spec)
        if self.model is None:
            raise ConfigError("no model given")
        return geo.build_model(self.model, self.n, **self.model_params)

    def weights(self, lam: float | None = None) -> tuple[float, float]:
        """(a, b): explicit overrides win over lambda."""
        lam = self.lam if lam is None else lam
        if self.a is not None or self.b is not None:
            a = self.a if self.a is not None else (lam if lam is not None else 1.0)
            b = self.b if self.b is not None else (1.0 - lam if lam is not None else 0.0)
            return float(a), float(b)
        if lam is None:
            raise ConfigError("compute needs lambda or (a, b)")
        return float(lam), 1.0 - float(lam)


# -- model specs --------------------------------------------------------------


def model_to_dict(m: geo.ModelManifold) -> dict:
    return {
        "label": m.label,
        "covering_multiplicity": m.covering_multiplicity,
        "lateral_boundary": m.lateral_boundary,
        "neck": m.neck,
        "ends": [{"kind": e.kind, "partner": e.partner} for e in m.ends],
        "segments": [
            {
                "n": s.n,
                "warp": {"kind": s.warp.kind, "params": list(s.warp.params), "knots": [list(k) for k in s.warp.knots]},
                "domain": list(s.domain),
                "fiber_quotient_order": s.fiber_quotient_order,
                "reversed": s.reversed,
            }
            for s in m.segments
        ],
    }


def _check_keys(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a mapping")
    for k in d:
        if k not in allowed:
            raise _unknown(str(k), allowed)


def model_from_dict(d: dict) -> geo.ModelManifold:
    _check_keys(d, MODEL_KEYS, "model")
    segs = []
    for sd in d.get("segments") or []:
        _check_keys(sd, SEGMENT_KEYS, "segment")
        wd = sd.get("warp") or {}
        _check_keys(wd, WARP_KEYS, "warp")
        warp = geo.Warp(
            wd.get("kind", "constant"),
            tuple(float(x) for x in wd.get("params", ())),
            tuple(tuple(float(x) for x in k) for k in wd.get("knots", ())),
        )
        segs.append(
            geo.WarpedSegment(
                int(sd["n"]),
                warp,
                tuple(float(x) for x in sd["domain"]),
                fiber_quotient_order=int(sd.get("fiber_quotient_order", 1)),
                reversed=bool(sd.get("reversed", False)),
            )
        )
    ends = []
    for ed in d.get("ends") or []:
        _check_keys(ed, END_KEYS, "end")
        ends.append(geo.EndCondition(ed["kind"], ed.get("partner")))
    return geo.ModelManifold(
        tuple(segs),
        tuple(ends),
        covering_multiplicity=int(d.get("covering_multiplicity", 1)),
        lateral_boundary=bool(d.get("lateral_boundary", False)),
        neck=d.get("neck"),
        label=str(d.get("label", "")),
    )


def dump_model(m: geo.ModelManifold) -> str:
    return yaml.safe_dump(model_to_dict(m), sort_keys=False)


# -- parsing ------------------------------------------------------------------


def parse_lambda_grid(spec) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a list of values."""
    if isinstance(spec, (list, tuple)):
        return tuple(float(x) for x in spec)
    text = str(spec)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"lambda grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("lambda grid step must be positive")
        count = int(round((stop - start) / step))
        return tuple(round(start + k * step, 12) for k in range(count + 1))
    return tuple(float(x) for x in text.split(","))


RAW_STRING_KEYS = ("lambda_grid", "output", "model", "suite", "command")


def _locate_yaml(text: str) -> tuple[dict[str, tuple[int, int]], dict[str, str]]:
    """Key positions, plus the literal text of scalars that must stay strings.

    YAML 1.1 would read ``0:1:0.05`` as a base-60 number.
    """
    node = yaml.compose(text)
    where, literal = {}, {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = str(key_node.value)
            where[key] = (key_node.start_mark.line + 1, key_node.start_mark.column + 1)
            if key in RAW_STRING_KEYS and isinstance(value_node, yaml.ScalarNode):
                literal[key] = value_node.value
    return where, literal


def _parse_shorthand(text: str) -> tuple[dict, dict]:
    raw, where = {}, {}
    col = 1
    for token in shlex.split(text):
        col = text.find(token, col - 1) + 1
        if "=" in token:
            key, value = token.split("=", 1)
            raw[key] = value if key in RAW_STRING_KEYS else (yaml.safe_load(value) if value else None)
            where[key] = (1, col)
        elif token in COMMANDS:
            raw["command"] = token
            where["command"] = (1, col)
        elif "model" not in raw:
            raw["model"] = token
            where["model"] = (1, col)
        else:
            raise ConfigError(f"unexpected word {token!r}", 1, col)
        col += len(token)
    return raw, where


def parse_config(text: str, defaults: dict | None = None) -> RunConfig:
    """Parse YAML or shorthand text into a validated :class:`RunConfig`."""
    raw, where = read_raw(text)
    merged = dict(defaults or {})
    merged.update(raw)
    return build_config(merged, where)


def read_raw(text: str) -> tuple[dict, dict]:
    """Unvalidated key/value pairs and their (line, column) positions."""
    stripped = text.strip()
    if not stripped:
        raw, where = {}, {}
    elif "\n" not in stripped and ":" not in stripped.split()[0] and (
        "=" in stripped or len(stripped.split()) <= 2
    ):
        raw, where = _parse_shorthand(stripped)
    else:
        try:
            raw = yaml.safe_load(text)
            where, literal = _locate_yaml(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            problem = getattr(exc, "problem", None) or str(exc)
            if mark is not None:
                raise ConfigError(f"parse error: {problem}", mark.line + 1, mark.column + 1) from None
            raise ConfigError(f"parse error: {problem}") from None
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping or a one-line shorthand", 1, 1)
        raw.update(literal)
    return raw, where


def build_config(raw: dict, where: dict | None = None) -> RunConfig:
    where = where or {}

    def fail(msg, key=None):
        line, col = where.get(key, (None, None)) if key else (None, None)
        return ConfigError(msg, line, col)

    for key in raw:
        if key not in TOP_KEYS:
            line, col = where.get(key, (None, None))
            raise _unknown(str(key), TOP_KEYS, line, col)

    command = raw.get("command") or "compute"
    if command not in COMMANDS:
        raise fail(f"command must be one of {COMMANDS}, got {command!r}", "command")

    try:
        n = int(raw.get("n", 3))
    except (TypeError, ValueError):
        raise fail("n must be an integer", "n") from None
    if n < 3:
        raise fail("n must be >= 3", "n")

    model, spec = raw.get("model"), None
    if isinstance(model, dict):
        spec, model = model, None
        try:
            built = model_from_dict(spec)
        except (geo.GeometryError, KeyError, TypeError, ValueError) as exc:
            raise fail(f"invalid model spec: {exc}", "model") from None
        n = built.n
    elif model is not None:
        model = str(model)
        if model not in geo.BUILDERS:
            hint = difflib.get_close_matches(model, list(geo.BUILDERS), n=1)
            msg = f"unknown model {model!r}" + (f"; did you mean {hint[0]!r}?" if hint else "")
            raise fail(msg, "model")

    params = {k: float(raw[k]) for k in MODEL_PARAM_KEYS if raw.get(k) is not None}

    def unit_interval(key, value):
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise fail(f"{key} must be a number", key) from None
        if not 0.0 <= v <= 1.0:
            raise fail(f"{key} = {v} outside [0, 1]", key)
        return v

    lam = unit_interval("lambda", raw["lambda"]) if raw.get("lambda") is not None else None
    grid = None
    if raw.get("lambda_grid") is not None:
        try:
            grid = parse_lambda_grid(raw["lambda_grid"])
        except ValueError as exc:
            raise fail(str(exc), "lambda_grid") from None
        for v in grid:
            unit_interval("lambda_grid", v)

    a = float(raw["a"]) if raw.get("a") is not None else None
    b = float(raw["b"]) if raw.get("b") is not None else None
    for key, v in (("a", a), ("b", b)):
        if v is not None and v < 0:
            raise fail(f"{key} must be nonnegative", key)
    if a == 0.0 and b == 0.0:
        raise fail("(a, b) = (0, 0) is not admissible", "a")

    seed = int(raw.get("seed", 0))
    solver_kw = {k: raw[k] for k in SOLVER_KEYS if raw.get(k) is not None}
    try:
        solver = SolverOptions(seed=seed, **solver_kw)
    except (TypeError, ValueError) as exc:
        raise fail(f"solver options: {exc}") from None

    cfg = RunConfig(
        command=command,
        model=model,
        model_spec=spec,
        model_params=params,
        n=n,
        lam=lam,
        lambda_grid=grid,
        a=a,
        b=b,
        solver=solver,
        output=Path(str(raw.get("output", "results"))),
        seed=seed,
        suite=str(raw.get("suite", "all")),
        refine=bool(raw.get("refine", False)),
    )
    _semantic_checks(cfg, fail)
    return cfg


def _semantic_checks(cfg: RunConfig, fail):
    from .harness import SUITES

    if cfg.command in ("compute", "sweep") and cfg.model is None and cfg.model_spec is None:
        raise fail(f"{cfg.command} needs a model", "command")
    if cfg.command in ("verify", "all"):
        if cfg.suite != "all" and cfg.suite not in SUITES:
            raise fail(f"unknown suite {cfg.suite!r}; choose from {['all', *SUITES]}", "suite")
        if not 3 <= cfg.n <= 6:
            raise fail("verification runs cover 3 <= n <= 6", "n")
    if cfg.model is None and cfg.model_spec is None:
        return
    try:
        m = cfg.build_model()
    except TypeError as exc:
        raise fail(f"model parameters: {exc}", "model") from None
    except geo.GeometryError as exc:
        raise fail(str(exc), "model") from None
    if m.is_closed:
        lams = list(cfg.lambda_grid or ()) + ([cfg.lam] if cfg.lam is not None else [])
        if cfg.a is None and any(v == 0.0 for v in lams):
            raise fail(f"lambda = 0 needs a boundary, but {m.label} is closed", "lambda")
        if cfg.a == 0.0:
            raise fail(f"a = 0 needs a boundary, but {m.label} is closed", "a")
    if cfg.command == "compute" and cfg.lam is None and cfg.a is None and cfg.b is None:
        raise fail("compute needs lambda or (a, b)", "command")
    if cfg.command == "sweep" and cfg.lambda_grid is None:
        raise fail("sweep needs lambda_grid", "command")


def load_config(path: str | Path, defaults: dict | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), defaults)


__all__ = [
    "COMMANDS",
    "ConfigError",
    "RunConfig",
    "build_config",
    "dump_model",
    "load_config",
    "model_from_dict",
    "model_to_dict",
    "parse_config",
    "parse_lambda_grid",
    "read_raw",
    "suggest",
]
