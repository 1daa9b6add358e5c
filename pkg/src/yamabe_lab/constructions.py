"""Test-function constructions used to compare Yamabe constants.

Every construction maps a discrete field to a discrete field on a related
model (a mirror image, a finite cover, or the two halves of a cut neck) so
that the relevant integrals stay exactly computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import geometry as geo
from .functional import (
    DiscretizedField,
    EnergyBreakdown,
    boundary_mass,
    discretize,
    energy,
    gradient_coefficient,
    interior_mass,
)

# -- reflection and covers ----------------------------------------------------


def reflect_extend(u: DiscretizedField) -> DiscretizedField:
    """Extend a hemisphere field evenly across the equator to the round sphere."""
    m = u.model
    if m.label != "hemisphere" or len(m.segments) != 1:
        raise geo.GeometryError("reflect_extend needs a field on hemisphere(n)")
    v = u.values
    full = geo.round_sphere(m.n)
    mesh = discretize(full, 2 * len(v) - 1)
    return DiscretizedField(mesh, np.concatenate([v, v[-2::-1]]))


def lift_to_cover(u: DiscretizedField, k: int, mode: str = "auto") -> DiscretizedField:
    """Pull a field back to the k-sheeted cover built by ``covering_unwrap``."""
    m = u.model
    cover = geo.covering_unwrap(m, k, mode)
    if cover is m:
        return u
    counts = u.mesh.segment_counts
    v = u.values
    if len(cover.segments) == len(m.segments):  # fiber unwrap: same chain
        return DiscretizedField(discretize(cover, counts), v)
    if cover.periodic:
        return DiscretizedField(discretize(cover, counts * k), np.tile(v, k))
    # reflection unwrap: chain followed by its mirror image
    mirrored = counts + counts[::-1]
    return DiscretizedField(discretize(cover, mirrored), np.concatenate([v, v[-2::-1]]))


# -- combining function -------------------------------------------------------


@dataclass(frozen=True)
class CombiningInputs:
    Y1: float
    Y2: float
    n: int
    alpha: float

    def __post_init__(self):
        if self.Y1 < 0 or self.Y2 < 0:
            raise ValueError("Y1 and Y2 must be nonnegative")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def combining_exponent(n: int) -> float:
    """2/q = (n-2)/(n-1): the power of the mass share that scales a Yamabe bound."""
    return (n - 2) / (n - 1)


def combining_function(ci: CombiningInputs) -> float:
    """Lower bound Y1 a^s + Y2 (1-a)^s for a field splitting its mass a : 1-a."""
    return float(combining_values(ci.Y1, ci.Y2, ci.n, ci.alpha))


def combining_values(Y1: float, Y2: float, n: int, alpha):
    """Vectorized ``combining_function`` over an array of alpha."""
    s = combining_exponent(n)
    a = np.asarray(alpha, dtype=float)
    return Y1 * a**s + Y2 * (1.0 - a) ** s


# -- slice search -------------------------------------------------------------


@dataclass(frozen=True)
class SliceSearchResult:
    """Neck slice with the smallest slice integral of |f'|^2 + f^2.

    ``t_l`` is measured from the start of the neck; ``neck_average`` is the
    mean of the slice integrand over the neck, which ``slice_integral`` never
    exceeds.  ``fitted_A`` is filled in by :func:`fit_decay`.
    """

    t_l: float
    slice_integral: float
    neck_average: float
    node: int
    neck_length: float
    fitted_A: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.t_l <= self.neck_length:
            raise ValueError("t_l outside the neck")
        if self.slice_integral < 0:
            raise ValueError("slice integral must be nonnegative")


def _nodal_slopes(u: DiscretizedField) -> np.ndarray:
    """Average of the one-sided cell slopes at each node."""
    mesh, v = u.mesh, u.values
    i, j = mesh.cells[:, 0], mesh.cells[:, 1]
    slope = (v[j] - v[i]) / mesh.h
    total = np.bincount(i, weights=slope, minlength=mesh.size) + np.bincount(j, weights=slope, minlength=mesh.size)
    count = np.bincount(i, minlength=mesh.size) + np.bincount(j, minlength=mesh.size)
    return total / np.maximum(count, 1)


def slice_profile(m: geo.ModelManifold, u: DiscretizedField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Neck-local coordinates, global node indices and slice integrands."""
    if m.neck is None:
        raise geo.GeometryError(f"{m.label or 'model'} has no neck")
    if u.model != m:
        raise geo.GeometryError("field is defined on a different model")
    k = m.neck
    seg = m.segments[k]
    idx = u.mesh.segment_nodes(k)
    local = np.linspace(seg.domain[0], seg.domain[1], len(idx)) - seg.domain[0]
    f = u.values[idx]
    df = _nodal_slopes(u)[idx]
    return local, idx, (df * df + f * f) * seg.fiber_area(seg.domain[0])


def best_slice(m: geo.ModelManifold, u: DiscretizedField) -> SliceSearchResult:
    local, idx, dens = slice_profile(m, u)
    j = int(np.argmin(dens))  # first occurrence: smallest t on ties
    avg = float(np.trapezoid(dens, local) / local[-1])
    return SliceSearchResult(
        t_l=float(local[j]),
        slice_integral=float(dens[j]),
        neck_average=avg,
        node=int(idx[j]),
        neck_length=float(local[-1]),
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit y = A / l^p, done in log-log coordinates."""

    A: float
    exponent: float
    # y = C exp(-k l), for comparison
    exp_rate: float
    exp_prefactor: float


def fit_decay(ls, ys) -> DecayFit:
    ls = np.asarray(ls, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(ls) < 2 or np.any(ys <= 0) or np.any(ls <= 0):
        raise ValueError("need >= 2 points with positive l and y")
    slope, icpt = np.polyfit(np.log(ls), np.log(ys), 1)
    k, c = np.polyfit(ls, np.log(ys), 1)
    return DecayFit(A=float(math.exp(icpt)), exponent=float(-slope), exp_rate=float(-k), exp_prefactor=float(math.exp(c)))


# -- cut-and-decay test function ----------------------------------------------


@dataclass(frozen=True)
class CutExtension:
    """The two halves of a model cut through its neck, each capped by a decay cylinder.

    ``models[0]`` keeps the first core and ends in a cylinder of length 1 on
    which the field falls linearly to zero; ``models[1]`` starts with such a
    cylinder and keeps the second core.
    """

    models: tuple[geo.ModelManifold, geo.ModelManifold]
    fields: tuple[DiscretizedField, DiscretizedField]
    trace: float
    decay_coefficient: float

    def energy(self) -> float:
        return sum(energy(m, f).total for m, f in zip(self.models, self.fields))

    def breakdowns(self) -> tuple[EnergyBreakdown, EnergyBreakdown]:
        return tuple(energy(m, f) for m, f in zip(self.models, self.fields))

    def interior_mass(self) -> float:
        return sum(interior_mass(f) for f in self.fields)

    def boundary_mass(self) -> float:
        return sum(boundary_mass(f) for f in self.fields)

    def constraint(self, a: float, b: float) -> float:
        out = a * self.interior_mass()
        if b:
            out += b * self.boundary_mass()
        return out

    @property
    def overshoot(self) -> float:
        """Energy carried by the two decay cylinders, from its closed form."""
        return self.decay_coefficient * self.trace**2


DECAY_LENGTH = 1.0
DECAY_NODES = 9


def _decay_cylinder(neck: geo.WarpedSegment) -> geo.WarpedSegment:
    return replace(neck, domain=(0.0, DECAY_LENGTH), reversed=False)


def kobayashi_test_function(m_bar: geo.ModelManifold, f_l: DiscretizedField, t_l: float) -> CutExtension:
    """Cut ``m_bar`` at neck position ``t_l`` and let the field decay on attached cylinders.

    ``t_l`` must be a mesh node of the neck (as returned by :func:`best_slice`).
    Off the cut the field is copied node for node, so the kept cells carry
    exactly the energy and masses they had on ``m_bar``.
    """
    if m_bar.neck is None:
        raise geo.GeometryError(f"{m_bar.label or 'model'} has no neck")
    if f_l.model != m_bar:
        raise geo.GeometryError("field is defined on a different model")
    k = m_bar.neck
    neck = m_bar.segments[k]
    counts = f_l.mesh.segment_counts
    cells = counts[k] - 1
    l = neck.length
    if not -1e-12 <= t_l <= l + 1e-12:
        raise ValueError(f"t_l = {t_l} outside the neck [0, {l}]")
    j = int(round(t_l / l * cells))
    if abs(j * l / cells - t_l) > 1e-9 * max(l, 1.0):
        raise ValueError("t_l must be a node of the neck mesh")

    lo, _ = f_l.mesh.segment_node_ranges[k]
    cut = lo + j
    v = f_l.values
    trace = float(v[cut])
    ramp = np.linspace(1.0, 0.0, DECAY_NODES) * trace
    decay = _decay_cylinder(neck)
    free_end = geo.EndCondition(geo.BOUNDARY)
    lateral = m_bar.lateral_boundary

    segs_a, counts_a = list(m_bar.segments[:k]), list(counts[:k])
    if j > 0:
        segs_a.append(replace(neck, domain=(neck.domain[0], neck.domain[0] + j * l / cells)))
        counts_a.append(j + 1)
    segs_a.append(decay)
    counts_a.append(DECAY_NODES)
    left = geo.ModelManifold(tuple(segs_a), (m_bar.ends[0], free_end), lateral_boundary=lateral, label=f"{m_bar.label}|cut0")
    vals_a = np.concatenate([v[: cut + 1], ramp[1:]])

    segs_b, counts_b = [replace(decay, reversed=True)], [DECAY_NODES]
    if j < cells:
        segs_b.append(replace(neck, domain=(neck.domain[0] + j * l / cells, neck.domain[1])))
        counts_b.append(cells - j + 1)
    segs_b += list(m_bar.segments[k + 1 :])
    counts_b += list(counts[k + 1 :])
    right = geo.ModelManifold(tuple(segs_b), (free_end, m_bar.ends[1]), lateral_boundary=lateral, label=f"{m_bar.label}|cut1")
    vals_b = np.concatenate([ramp[::-1][:-1], v[cut:]])

    fa = DiscretizedField(discretize(left, tuple(counts_a)), vals_a)
    fb = DiscretizedField(discretize(right, tuple(counts_b)), vals_b)
    area = float(neck.fiber_area(neck.domain[0]))
    curv = float(neck.scalar_curvature(neck.domain[0]))
    # per cylinder: c_n f~^2 A / L + R A f~^2 L / 3
    coeff = 2.0 * area * (gradient_coefficient(m_bar.n) / DECAY_LENGTH + curv * DECAY_LENGTH / 3.0)
    return CutExtension((left, right), (fa, fb), trace, coeff)


def hemi_kobayashi_test_function(m_bar: geo.ModelManifold, f_l: DiscretizedField, t_l: float) -> CutExtension:
    """Cut-and-decay on a hemi-cylinder neck joining two half cores."""
    if not m_bar.lateral_boundary:
        raise geo.GeometryError("hemi variant needs a model with half-sphere fibers")
    return kobayashi_test_function(m_bar, f_l, t_l)


__all__ = [
    "CombiningInputs",
    "CutExtension",
    "DecayFit",
    "SliceSearchResult",
    "best_slice",
    "combining_exponent",
    "combining_function",
    "combining_values",
    "fit_decay",
    "hemi_kobayashi_test_function",
    "kobayashi_test_function",
    "lift_to_cover",
    "reflect_extend",
    "slice_profile",
]
