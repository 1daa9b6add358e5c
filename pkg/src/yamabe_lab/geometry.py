"""Rotationally symmetric model manifolds.

Every model is a chain of warped-product pieces ``dt^2 + f(t)^2 g_fiber``.
The fiber is a round unit sphere S^{n-1} or its antipodal quotient RP^{n-1};
``lateral_boundary`` halves it to S^{n-1}_+.  Curvatures and fiber areas come
from closed formulas in the warp function and its derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import gamma

WARP_KINDS = ("constant", "sin", "linear", "spline")

BOUNDARY = "Boundary"
SMOOTH_CAP = "SmoothCap"
PERIODIC = "PeriodicJoin"
REFLECTION = "ReflectionQuotient"
END_KINDS = (BOUNDARY, SMOOTH_CAP, PERIODIC, REFLECTION)

_JUNCTION_TOL = 1e-8


class GeometryError(ValueError):
    """Invalid model construction or geometric query."""


def sphere_area(k: int) -> float:
    """Area of the unit round sphere S^k."""
    return 2.0 * math.pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


@dataclass(frozen=True)
class Warp:
    """Warp function tag.

    constant: ``params=(r,)``, f = r
    sin:      ``params=(r, t0)``, f = r sin((t - t0)/r)
    linear:   ``params=(slope, intercept)``
    spline:   ``params=(slope_start, slope_end)`` clamped, ``knots=((t, f), ...)``
    """

    kind: str
    params: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in WARP_KINDS:
            raise GeometryError(f"unknown warp kind {self.kind!r}")
        expected = {"constant": 1, "sin": 2, "linear": 2, "spline": 2}[self.kind]
        if len(self.params) != expected:
            raise GeometryError(
                f"warp {self.kind!r} takes {expected} params, got {len(self.params)}"
            )
        if self.kind == "spline" and len(self.knots) < 3:
            raise GeometryError("spline warp needs at least 3 knots")

    @cached_property
    def _spline(self) -> CubicSpline:
        ts, fs = np.array(self.knots, dtype=float).T
        return CubicSpline(ts, fs, bc_type=((1, self.params[0]), (1, self.params[1])))

    def derivative(self, t, order: int = 0):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0] if order == 0 else 0.0)
        if self.kind == "linear":
            slope, icpt = self.params
            if order == 0:
                return slope * t + icpt
            return np.full_like(t, slope if order == 1 else 0.0)
        if self.kind == "sin":
            r, t0 = self.params
            x = (t - t0) / r
            # d^k/dt^k r sin(x) = r^{1-k} sin(x + k pi/2)
            return r ** (1 - order) * np.sin(x + order * math.pi / 2)
        return self._spline(t, order)

    def curvature_ratio(self, t):
        """(1 - f'^2) / f^2, with the exact value where a closed form exists."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, 1.0 / self.params[0] ** 2)
        if self.kind == "sin":
            return np.full_like(t, 1.0 / self.params[0] ** 2)
        f = self.derivative(t, 0)
        df = self.derivative(t, 1)
        return (1.0 - df * df) / (f * f)


@dataclass(frozen=True)
class WarpedSegment:
    """One piece ``[t_a, t_b] x fiber`` with metric ``dt^2 + f(t)^2 g_fiber``.

    ``reversed`` runs the warp backwards over the same local domain, which is
    how a core is attached mirror-wise at the far end of a neck.
    """

    n: int
    warp: Warp
    domain: tuple[float, float]
    fiber_quotient_order: int = 1
    reversed: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise GeometryError(f"dimension must be >= 3, got {self.n}")
        ta, tb = self.domain
        if not ta < tb:
            raise GeometryError(f"empty segment domain {self.domain}")
        if self.fiber_quotient_order not in (1, 2):
            raise GeometryError("fiber_quotient_order must be 1 or 2")
        mid = np.linspace(ta, tb, 33)[1:-1]
        if np.any(self.f(mid) <= 0):
            raise GeometryError(f"warp must be positive inside {self.domain}")

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def _warp_t(self, t):
        t = np.asarray(t, dtype=float)
        if self.reversed:
            return self.domain[0] + self.domain[1] - t
        return t

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        ta, tb = self.domain
        span = tb - ta
        if np.any(t < ta - 1e-12 * span) or np.any(t > tb + 1e-12 * span):
            raise GeometryError(f"t outside segment domain {self.domain}")
        return t

    def f(self, t):
        return self.warp.derivative(self._warp_t(t), 0)

    def df(self, t, order: int = 1):
        sign = -1.0 if (self.reversed and order % 2) else 1.0
        return sign * self.warp.derivative(self._warp_t(t), order)

    def fiber_area(self, t):
        t = self._check(t)
        return sphere_area(self.n - 1) * self.f(t) ** (self.n - 1) / self.fiber_quotient_order

    def rim_length(self, t):
        """(n-2)-area of the equatorial rim of a half fiber at ``t``."""
        t = self._check(t)
        return sphere_area(self.n - 2) * self.f(t) ** (self.n - 2)

    def scalar_curvature(self, t):
        t = self._check(t)
        n = self.n
        wt = self._warp_t(t)
        f = self.warp.derivative(wt, 0)
        d2 = self.warp.derivative(wt, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (n - 1) * (-2.0 * d2 / f + (n - 2) * self.warp.curvature_ratio(wt))
        pole = np.abs(f) < 1e-14
        if np.any(pole):
            # smooth pole: f'' -> 0 and both ratios tend to -f'''/f'
            d1 = self.warp.derivative(wt, 1)
            d3 = self.warp.derivative(wt, 3)
            r = np.where(pole, -n * (n - 1) * d3 / d1, r)
        return r


def scalar_curvature(seg: WarpedSegment, t):
    """R(t) = (n-1)[-2 f''/f + (n-2)(1 - f'^2)/f^2] on a warped segment."""
    return seg.scalar_curvature(t)


def fiber_area(seg: WarpedSegment, t):
    return seg.fiber_area(t)


@dataclass(frozen=True)
class EndCondition:
    kind: str
    partner: int | None = None

    def __post_init__(self):
        if self.kind not in END_KINDS:
            raise GeometryError(f"unknown end kind {self.kind!r}")


@dataclass(frozen=True)
class ModelManifold:
    """Ordered warped segments glued end to end.

    ``covering_multiplicity`` is the number of sheets of the natural cover the
    model is a quotient of (2 for RP^{n-1} x S^1 and RP^n, 1 otherwise).
    ``neck`` marks the index of a cylindrical neck segment, if any.
    """

    segments: tuple[WarpedSegment, ...]
    ends: tuple[EndCondition, EndCondition]
    covering_multiplicity: int = 1
    lateral_boundary: bool = False
    neck: int | None = None
    label: str = ""

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise GeometryError("a model needs at least one segment")
        if len(self.ends) != 2:
            raise GeometryError("a model has exactly two ends")
        if self.covering_multiplicity < 1:
            raise GeometryError("covering_multiplicity must be >= 1")
        n, order = segs[0].n, segs[0].fiber_quotient_order
        for k, s in enumerate(segs):
            if s.n != n or s.fiber_quotient_order != order:
                raise GeometryError(f"segment {k}: dimension/fiber order differ from segment 0")
        for k in range(len(segs) - 1):
            left = float(segs[k].f(segs[k].domain[1]))
            right = float(segs[k + 1].f(segs[k + 1].domain[0]))
            if abs(left - right) > _JUNCTION_TOL * max(1.0, abs(left)):
                raise GeometryError(
                    f"radius mismatch at junction {k}|{k + 1}: {left:.12g} != {right:.12g}"
                )
        if self.lateral_boundary and order != 2:
            raise GeometryError("half-sphere fibers carry fiber_quotient_order 2")
        if self.neck is not None and not 0 <= self.neck < len(segs):
            raise GeometryError(f"neck index {self.neck} out of range")
        for side in (0, 1):
            self._check_end(side)

    def _check_end(self, side: int):
        end = self.ends[side]
        f, df = self.end_radius(side), self.end_slope(side)
        if end.kind == SMOOTH_CAP:
            if abs(f) > 1e-9 or abs(abs(df) - 1.0) > 1e-6:
                raise GeometryError(
                    f"end {side}: SmoothCap needs f -> 0 and |f'| -> 1 (f={f:.3g}, f'={df:.3g})"
                )
        elif end.kind == PERIODIC:
            other = self.ends[1 - side]
            if other.kind != PERIODIC:
                raise GeometryError("PeriodicJoin must be used on both ends")
            f2, df2 = self.end_radius(1 - side), self.end_slope(1 - side)
            if abs(f - f2) > _JUNCTION_TOL or abs(df - df2) > 1e-6:
                raise GeometryError("PeriodicJoin ends must match in warp value and slope")
        elif end.kind == REFLECTION:
            if f <= 0 or abs(df) > 1e-6:
                raise GeometryError(f"end {side}: ReflectionQuotient needs f > 0 and f' = 0")
        elif f <= 0:
            raise GeometryError(f"end {side}: Boundary end needs positive radius")

    @property
    def n(self) -> int:
        return self.segments[0].n

    @property
    def fiber_quotient_order(self) -> int:
        return self.segments[0].fiber_quotient_order

    @property
    def is_closed(self) -> bool:
        return not self.has_boundary

    @property
    def has_boundary(self) -> bool:
        return self.lateral_boundary or any(e.kind == BOUNDARY for e in self.ends)

    @property
    def periodic(self) -> bool:
        return self.ends[0].kind == PERIODIC

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def offsets(self) -> np.ndarray:
        """Global coordinate of each segment's start."""
        return np.concatenate([[0.0], np.cumsum([s.length for s in self.segments])])

    def end_point(self, side: int) -> tuple[WarpedSegment, float]:
        seg = self.segments[0] if side == 0 else self.segments[-1]
        return seg, seg.domain[side]

    def end_radius(self, side: int) -> float:
        seg, t = self.end_point(side)
        return float(seg.f(t))

    def end_slope(self, side: int) -> float:
        """df/dt at an end, with t increasing along the chain."""
        seg, t = self.end_point(side)
        return float(seg.df(t))

    def merged(self) -> ModelManifold:
        """Fuse adjacent constant-warp segments of equal radius."""
        out: list[WarpedSegment] = []
        for s in self.segments:
            prev = out[-1] if out else None
            if (
                prev is not None
                and prev.warp.kind == "constant"
                and s.warp == prev.warp
            ):
                out[-1] = replace(prev, domain=(prev.domain[0], prev.domain[1] + s.length))
            else:
                out.append(s)
        return replace(self, segments=tuple(out), neck=None if len(out) != len(self.segments) else self.neck)


def _end_index(end) -> int:
    if end in (0, "start"):
        return 0
    if end in (1, "end"):
        return 1
    raise GeometryError(f"end must be 0/'start' or 1/'end', got {end!r}")


def boundary_mean_curvature(m: ModelManifold, end) -> float:
    """Mean curvature (average of principal curvatures) of a Boundary end.

    The outward normal is -d/dt at the start and +d/dt at the end.
    """
    side = _end_index(end)
    if m.ends[side].kind != BOUNDARY:
        raise GeometryError(f"end {side} is {m.ends[side].kind}, not a Boundary")
    sign = 1.0 if side == 1 else -1.0
    return sign * m.end_slope(side) / m.end_radius(side)


def volume(m: ModelManifold) -> float:
    total = 0.0
    for s in m.segments:
        val, _ = integrate.quad(s.fiber_area, *s.domain, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


def boundary_area(m: ModelManifold) -> float:
    total = 0.0
    for side in (0, 1):
        if m.ends[side].kind == BOUNDARY:
            seg, t = m.end_point(side)
            total += float(seg.fiber_area(t))
    if m.lateral_boundary:
        for s in m.segments:
            val, _ = integrate.quad(s.rim_length, *s.domain, epsabs=0.0, epsrel=1e-13, limit=200)
            total += val
    return total


# -- constructors ------------------------------------------------------------

_SIN = Warp("sin", (1.0, 0.0))
_UNIT = Warp("constant", (1.0,))


def round_sphere(n: int) -> ModelManifold:
    seg = WarpedSegment(n, _SIN, (0.0, math.pi))
    return ModelManifold((seg,), (EndCondition(SMOOTH_CAP), EndCondition(SMOOTH_CAP)), label="round_sphere")


def hemisphere(n: int) -> ModelManifold:
    """S^n_+ seen from its pole: boundary is the equator at t = pi/2."""
    seg = WarpedSegment(n, _SIN, (0.0, math.pi / 2))
    return ModelManifold((seg,), (EndCondition(SMOOTH_CAP), EndCondition(BOUNDARY)), label="hemisphere")


def half_sphere(n: int) -> ModelManifold:
    """S^n_+ cut along a plane through the axis; the boundary is lateral."""
    seg = WarpedSegment(n, _SIN, (0.0, math.pi), fiber_quotient_order=2)
    return ModelManifold(
        (seg,), (EndCondition(SMOOTH_CAP), EndCondition(SMOOTH_CAP)), lateral_boundary=True, label="half_sphere"
    )


def sphere_minus_cap(n: int, t_cut: float) -> ModelManifold:
    """Geodesic ball of radius ``t_cut`` about the pole of the unit sphere."""
    if not 0 < t_cut < math.pi:
        raise GeometryError("t_cut must lie in (0, pi)")
    seg = WarpedSegment(n, _SIN, (0.0, t_cut))
    return ModelManifold((seg,), (EndCondition(SMOOTH_CAP), EndCondition(BOUNDARY)), label="sphere_minus_cap")


def ball(n: int, radius: float = 1.0) -> ModelManifold:
    seg = WarpedSegment(n, Warp("linear", (1.0, 0.0)), (0.0, radius))
    return ModelManifold((seg,), (EndCondition(SMOOTH_CAP), EndCondition(BOUNDARY)), label="ball")


def projective_space(n: int) -> ModelManifold:
    """Round RP^n: the polar hemisphere with antipodal points of the equator identified."""
    seg = WarpedSegment(n, _SIN, (0.0, math.pi / 2))
    return ModelManifold(
        (seg,), (EndCondition(SMOOTH_CAP), EndCondition(REFLECTION)), covering_multiplicity=2, label="projective_space"
    )


def _positive(name: str, value: float):
    if not value > 0:
        raise GeometryError(f"{name} must be positive, got {value}")


def cylinder(n: int, l: float) -> ModelManifold:
    _positive("l", l)
    seg = WarpedSegment(n, _UNIT, (0.0, l))
    return ModelManifold((seg,), (EndCondition(BOUNDARY), EndCondition(BOUNDARY)), label="cylinder")


def hemi_cylinder(n: int, l: float) -> ModelManifold:
    _positive("l", l)
    seg = WarpedSegment(n, _UNIT, (0.0, l), fiber_quotient_order=2)
    return ModelManifold(
        (seg,), (EndCondition(BOUNDARY), EndCondition(BOUNDARY)), lateral_boundary=True, label="hemi_cylinder"
    )


def schoen_product(n: int, L: float) -> ModelManifold:
    """S^{n-1} x S^1 with circle length L."""
    _positive("L", L)
    seg = WarpedSegment(n, _UNIT, (0.0, L))
    return ModelManifold(
        (seg,), (EndCondition(PERIODIC, 1), EndCondition(PERIODIC, 0)), label="schoen_product"
    )


def quotient_product(n: int, L: float) -> ModelManifold:
    """RP^{n-1} x S^1, doubly covered by ``schoen_product(n, L)``."""
    _positive("L", L)
    seg = WarpedSegment(n, _UNIT, (0.0, L), fiber_quotient_order=2)
    return ModelManifold(
        (seg,),
        (EndCondition(PERIODIC, 1), EndCondition(PERIODIC, 0)),
        covering_multiplicity=2,
        label="quotient_product",
    )


def cap_core(n: int, half: bool = False) -> ModelManifold:
    """Unit hemispherical cap, pole first, flat face of radius 1 last."""
    seg = WarpedSegment(n, _SIN, (0.0, math.pi / 2), fiber_quotient_order=2 if half else 1)
    return ModelManifold(
        (seg,),
        (EndCondition(SMOOTH_CAP), EndCondition(BOUNDARY)),
        lateral_boundary=half,
        label="half_cap_core" if half else "cap_core",
    )


def glued_neck(core_a: ModelManifold, core_b: ModelManifold, l: float) -> ModelManifold:
    """Join two cores through a product neck ``[0, l] x fiber``.

    Each core is glued along its end-side face; ``core_b`` is mirrored so that
    its far end closes the chain.  Radii must agree at both junctions.
    """
    _positive("l", l)
    for name, core in (("core_a", core_a), ("core_b", core_b)):
        if core.ends[1].kind != BOUNDARY:
            raise GeometryError(f"{name} must end in a Boundary face to glue along")
    if core_a.lateral_boundary != core_b.lateral_boundary or core_a.n != core_b.n:
        raise GeometryError("cores differ in dimension or fiber type")
    ra, rb = core_a.end_radius(1), core_b.end_radius(1)
    if abs(ra - rb) > _JUNCTION_TOL * max(1.0, ra):
        raise GeometryError(f"radius mismatch: core_a face {ra:.12g} vs core_b face {rb:.12g}")
    order = core_a.fiber_quotient_order
    neck = WarpedSegment(core_a.n, Warp("constant", (ra,)), (0.0, l), fiber_quotient_order=order)
    mirrored = tuple(replace(s, reversed=not s.reversed) for s in reversed(core_b.segments))
    segs = core_a.segments + (neck,) + mirrored
    return ModelManifold(
        segs,
        (core_a.ends[0], core_b.ends[0]),
        lateral_boundary=core_a.lateral_boundary,
        neck=len(core_a.segments),
        label="hemi_glued_neck" if core_a.lateral_boundary else "glued_neck",
    )


def capsule(n: int, l: float) -> ModelManifold:
    return glued_neck(cap_core(n), cap_core(n), l)


def hemi_capsule(n: int, l: float) -> ModelManifold:
    return glued_neck(cap_core(n, half=True), cap_core(n, half=True), l)


def spline_model(
    n: int,
    knots: Sequence[tuple[float, float]],
    slopes: tuple[float, float],
    ends: tuple[str, str],
    fiber_quotient_order: int = 1,
) -> ModelManifold:
    warp = Warp("spline", tuple(float(s) for s in slopes), tuple((float(a), float(b)) for a, b in knots))
    seg = WarpedSegment(n, warp, (float(knots[0][0]), float(knots[-1][0])), fiber_quotient_order)
    return ModelManifold((seg,), (EndCondition(ends[0]), EndCondition(ends[1])), label="spline")


def covering_unwrap(m: ModelManifold, k: int, mode: str = "auto") -> ModelManifold:
    """The k-sheeted cover of ``m``.

    Modes:

    * ``"fiber"``: RP^{n-1} -> S^{n-1}, k = 2
    * ``"circle"``: unwrap a periodic chain k times
    * ``"reflection"``: RP^n -> S^n, k = 2
    * ``"auto"``: the first of fiber, reflection, circle that applies
    """
    if k < 1:
        raise GeometryError("k must be >= 1")
    if k == 1:
        return m
    if mode == "auto":
        if m.fiber_quotient_order == 2 and not m.lateral_boundary and k == 2:
            mode = "fiber"
        elif m.ends[1].kind == REFLECTION and k == 2:
            mode = "reflection"
        elif m.periodic:
            mode = "circle"
        else:
            raise GeometryError(f"no {k}-fold cover available for {m.label or 'model'}")
    mult = max(1, m.covering_multiplicity // k) if m.covering_multiplicity % k == 0 else 1
    if mode == "fiber":
        if m.fiber_quotient_order != 2 or m.lateral_boundary or k != 2:
            raise GeometryError("fiber unwrap needs RP^{n-1} fibers and k = 2")
        segs = tuple(replace(s, fiber_quotient_order=1) for s in m.segments)
        return replace(m, segments=segs, covering_multiplicity=mult, label=f"{m.label}~fiber")
    if mode == "circle":
        if not m.periodic:
            raise GeometryError("circle unwrap needs PeriodicJoin ends")
        return replace(m, segments=m.segments * k, covering_multiplicity=mult, neck=None, label=f"{m.label}~circle{k}")
    if mode == "reflection":
        if m.ends[1].kind != REFLECTION or k != 2:
            raise GeometryError("reflection unwrap needs a ReflectionQuotient end and k = 2")
        mirrored = tuple(replace(s, reversed=not s.reversed) for s in reversed(m.segments))
        return replace(
            m,
            segments=m.segments + mirrored,
            ends=(m.ends[0], m.ends[0]),
            covering_multiplicity=mult,
            neck=None,
            label=f"{m.label}~reflect",
        )
    raise GeometryError(f"unknown unwrap mode {mode!r}")


BUILDERS = {
    "round_sphere": round_sphere,
    "hemisphere": hemisphere,
    "half_sphere": half_sphere,
    "projective_space": projective_space,
    "ball": ball,
    "cylinder": cylinder,
    "hemi_cylinder": hemi_cylinder,
    "schoen_product": schoen_product,
    "quotient_product": quotient_product,
    "capsule": capsule,
    "hemi_capsule": hemi_capsule,
    "sphere_minus_cap": sphere_minus_cap,
}


def build_model(name: str, n: int, **params) -> ModelManifold:
    """Build a named model; length-type parameters are passed by keyword."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise GeometryError(f"unknown model {name!r}; choose from {sorted(BUILDERS)}") from None
    return builder(n, **params)
