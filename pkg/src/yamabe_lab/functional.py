"""Energy and constraint functionals on piecewise-linear fields.

Fields are continuous piecewise-linear in the axial coordinate t and constant
on fibers.  Every integral is evaluated with Gauss-Legendre quadrature inside
each cell, so the discrete energy is the energy of the interpolant itself and
refining a mesh by bisection only enlarges the trial space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .geometry import BOUNDARY, GeometryError, ModelManifold, boundary_area, boundary_mean_curvature, volume

QUAD_POINTS = 6
_XQ, _WQ = np.polynomial.legendre.leggauss(QUAD_POINTS)
_XQ = 0.5 * (_XQ + 1.0)
_WQ = 0.5 * _WQ
# P1 basis on the reference cell at the quadrature points, shape (Q, 2)
_PHI = np.stack([1.0 - _XQ, _XQ], axis=1)


def exponents(n: int) -> tuple[float, float]:
    """Critical interior and boundary exponents p = 2n/(n-2), q = 2(n-1)/(n-2)."""
    return 2.0 * n / (n - 2), 2.0 * (n - 1) / (n - 2)


def gradient_coefficient(n: int) -> float:
    return 4.0 * (n - 1) / (n - 2)


class Mesh:
    """Nodes and per-cell quadrature data for one model at one resolution.

    ``nodes_per_segment`` counts the nodes of each segment including both
    endpoints; junction nodes are shared, and a periodic chain identifies its
    last node with its first.
    """

    def __init__(self, model: ModelManifold, nodes_per_segment: int | tuple[int, ...]):
        counts = _segment_counts(model, nodes_per_segment)
        self.model = model
        self.nodes_per_segment = nodes_per_segment
        self.segment_counts = counts
        n = model.n
        offsets = model.offsets

        t_parts, local_parts, seg_of_cell, ranges = [], [], [], []
        first = 0
        for k, seg in enumerate(model.segments):
            m = counts[k] - 1
            local = np.linspace(seg.domain[0], seg.domain[1], m + 1)
            glob = offsets[k] + (local - seg.domain[0])
            start = 0 if k == 0 else 1
            t_parts.append(glob[start:])
            local_parts.append(local)
            seg_of_cell.extend([k] * m)
            ranges.append((first, first + m))
            first += m
        t = np.concatenate(t_parts)
        ncell = len(seg_of_cell)
        left = np.arange(ncell)
        right = left + 1
        if model.periodic:
            t = t[:-1]
            right[-1] = 0
        self.t = t
        self.size = len(t)
        self.cells = np.stack([left, right], axis=1)
        self.cell_segment = np.array(seg_of_cell)
        self.segment_node_ranges = ranges

        h = np.empty(ncell)
        area_q = np.empty((ncell, QUAD_POINTS))
        curv_q = np.empty((ncell, QUAD_POINTS))
        rim_q = np.zeros((ncell, QUAD_POINTS))
        for k, seg in enumerate(model.segments):
            loc = local_parts[k]
            a, b = loc[:-1], loc[1:]
            tq = a[:, None] + (b - a)[:, None] * _XQ[None, :]
            sl = slice(*ranges[k])
            h[sl] = b - a
            area_q[sl] = seg.fiber_area(tq)
            curv_q[sl] = seg.scalar_curvature(tq)
            if model.lateral_boundary:
                rim_q[sl] = seg.rim_length(tq)
        self.h = h
        self.weights = h[:, None] * _WQ[None, :]
        self.area_q = area_q
        self.curv_q = curv_q
        self.rim_q = rim_q

        # boundary faces: (node, face area, mean curvature)
        faces = []
        for side in (0, 1):
            if model.ends[side].kind == BOUNDARY:
                node = 0 if side == 0 else self.size - 1
                seg, tt = model.end_point(side)
                faces.append((node, float(seg.fiber_area(tt)), boundary_mean_curvature(model, side)))
        self.faces = faces

        cn = gradient_coefficient(n)
        cell_area = (self.weights * area_q).sum(axis=1)
        stiff = cn * cell_area / h**2
        self.stiffness = self._assemble(np.stack([stiff, -stiff, -stiff, stiff], axis=1))
        self.potential = self._assemble_weighted(curv_q * area_q)
        self.mass = self._assemble_weighted(area_q)
        bdiag = np.zeros(self.size)
        for node, area, hm in faces:
            bdiag[node] += 2.0 * (n - 1) * hm * area
        self.boundary = sp.diags(bdiag).tocsr()
        self.quadratic = (self.stiffness + self.potential + self.boundary).tocsr()

    def _assemble(self, local: np.ndarray) -> sp.csr_matrix:
        """Scatter per-cell 2x2 blocks given as rows (00, 01, 10, 11)."""
        i, j = self.cells[:, 0], self.cells[:, 1]
        rows = np.concatenate([i, i, j, j])
        cols = np.concatenate([i, j, i, j])
        vals = np.concatenate([local[:, 0], local[:, 1], local[:, 2], local[:, 3]])
        return sp.coo_matrix((vals, (rows, cols)), shape=(self.size, self.size)).tocsr()

    def _assemble_weighted(self, density: np.ndarray) -> sp.csr_matrix:
        w = self.weights * density
        blocks = np.stack(
            [
                w @ (_PHI[:, 0] * _PHI[:, 0]),
                w @ (_PHI[:, 0] * _PHI[:, 1]),
                w @ (_PHI[:, 1] * _PHI[:, 0]),
                w @ (_PHI[:, 1] * _PHI[:, 1]),
            ],
            axis=1,
        )
        return self._assemble(blocks)

    def at_quadrature(self, u: np.ndarray) -> np.ndarray:
        return u[self.cells] @ _PHI.T

    def scatter(self, cell_vals: np.ndarray) -> np.ndarray:
        """Sum per-cell, per-quadrature-point values against the basis into nodes."""
        local = cell_vals @ _PHI  # (C, 2)
        out = np.bincount(self.cells[:, 0], weights=local[:, 0], minlength=self.size)
        out += np.bincount(self.cells[:, 1], weights=local[:, 1], minlength=self.size)
        return out

    def segment_nodes(self, k: int) -> np.ndarray:
        lo, hi = self.segment_node_ranges[k]
        idx = np.arange(lo, hi + 1)
        return idx % self.size


def _segment_counts(model: ModelManifold, nodes) -> tuple[int, ...]:
    if isinstance(nodes, (int, np.integer)):
        counts = (int(nodes),) * len(model.segments)
    else:
        counts = tuple(int(c) for c in nodes)
    if len(counts) != len(model.segments):
        raise ValueError(f"{len(counts)} node counts for {len(model.segments)} segments")
    if min(counts) < 2:
        raise ValueError("need at least 2 nodes per segment")
    return counts


@lru_cache(maxsize=128)
def discretize(model: ModelManifold, nodes_per_segment: int | tuple[int, ...]) -> Mesh:
    return Mesh(model, nodes_per_segment)


@dataclass(frozen=True, eq=False)
class DiscretizedField:
    """Nodal values of a nonnegative, fiber-constant test function."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.size,):
            raise ValueError(f"field has {v.shape} values, mesh has {self.mesh.size} nodes")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite and nonnegative")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def model(self) -> ModelManifold:
        return self.mesh.model

    @property
    def t(self) -> np.ndarray:
        return self.mesh.t

    def segment(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Local coordinates and values on segment ``k``."""
        idx = self.mesh.segment_nodes(k)
        seg = self.model.segments[k]
        local = np.linspace(seg.domain[0], seg.domain[1], len(idx))
        return local, self.values[idx]

    def scaled(self, c: float) -> DiscretizedField:
        return DiscretizedField(self.mesh, c * self.values)


def field_from_function(model: ModelManifold, nodes_per_segment: int, func) -> DiscretizedField:
    """Sample ``func`` of the global axial coordinate on a fresh mesh."""
    mesh = discretize(model, nodes_per_segment)
    return DiscretizedField(mesh, np.asarray(func(mesh.t), dtype=float) * np.ones(mesh.size))


@dataclass(frozen=True)
class EnergyBreakdown:
    gradient_term: float
    curvature_term: float
    boundary_term: float
    total: float
    interior_mass: float
    boundary_mass: float


def _check(m: ModelManifold, u: DiscretizedField):
    if u.mesh.model != m:
        raise GeometryError("field is defined on a different model")


def interior_mass(u: DiscretizedField) -> float:
    mesh = u.mesh
    p, _ = exponents(mesh.model.n)
    uq = mesh.at_quadrature(u.values)
    return float(np.sum(mesh.weights * mesh.area_q * np.abs(uq) ** p))


def boundary_mass(u: DiscretizedField) -> float:
    mesh = u.mesh
    _, q = exponents(mesh.model.n)
    total = sum(area * u.values[node] ** q for node, area, _ in mesh.faces)
    if mesh.model.lateral_boundary:
        uq = mesh.at_quadrature(u.values)
        total += float(np.sum(mesh.weights * mesh.rim_q * np.abs(uq) ** q))
    return float(total)


def l2_mass(u: DiscretizedField) -> float:
    """Integral of u^2 over the interior."""
    uq = u.mesh.at_quadrature(u.values)
    return float(np.sum(u.mesh.weights * u.mesh.area_q * uq * uq))


def boundary_l2_mass(u: DiscretizedField) -> float:
    """Integral of u^2 over the boundary (end faces and lateral rim)."""
    mesh = u.mesh
    total = sum(area * u.values[node] ** 2 for node, area, _ in mesh.faces)
    if mesh.model.lateral_boundary:
        uq = mesh.at_quadrature(u.values)
        total += float(np.sum(mesh.weights * mesh.rim_q * uq * uq))
    return float(total)


def energy(m: ModelManifold, u: DiscretizedField) -> EnergyBreakdown:
    _check(m, u)
    mesh, v = u.mesh, u.values
    grad = float(v @ (mesh.stiffness @ v))
    curv = float(v @ (mesh.potential @ v))
    bnd = float(v @ (mesh.boundary @ v))
    return EnergyBreakdown(grad, curv, bnd, grad + curv + bnd, interior_mass(u), boundary_mass(u))


def _check_weights(m: ModelManifold, a: float, b: float):
    if a < 0 or b < 0:
        raise ValueError("constraint weights must be nonnegative")
    if a == 0 and b == 0:
        raise ValueError("constraint weights (0, 0) are not admissible")
    if a == 0 and not m.has_boundary:
        raise ValueError("a = 0 on a closed model: the boundary constraint is unreachable")


def constraint(m: ModelManifold, u: DiscretizedField, a: float, b: float) -> float:
    _check(m, u)
    _check_weights(m, a, b)
    return a * interior_mass(u) + b * (boundary_mass(u) if b else 0.0)


def scale_to_constraint(n: int, a: float, b: float, I: float, B: float, rtol: float = 1e-12) -> float:
    """Positive root c of a c^p I + b c^q B = 1."""
    p, q = exponents(n)
    ai, bb = a * I, b * B
    if ai <= 0 and bb <= 0:
        raise ValueError("cannot normalize a field with zero constraint mass")
    if bb <= 0:
        return ai ** (-1.0 / p)
    if ai <= 0:
        return bb ** (-1.0 / q)

    def g(logc):
        return ai * math.exp(p * logc) + bb * math.exp(q * logc) - 1.0

    # root lies where neither term exceeds 1 and at least one reaches 1/2
    # (padded so rounding cannot put the root outside when one term is negligible)
    hi = min(-math.log(ai) / p, -math.log(bb) / q) + 1e-9
    lo = min(-math.log(2 * ai) / p, -math.log(2 * bb) / q) - 1e-9
    return math.exp(brentq(g, lo, hi, xtol=1e-300, rtol=rtol * 1e-2, maxiter=200))


def normalize(m: ModelManifold, u: DiscretizedField, a: float, b: float) -> DiscretizedField:
    _check(m, u)
    _check_weights(m, a, b)
    I = interior_mass(u) if a else 0.0
    B = boundary_mass(u) if b else 0.0
    return u.scaled(scale_to_constraint(m.n, a, b, I, B))


def holder_mass_bound(m: ModelManifold, lam: float) -> float:
    """Bound on the L^2 mass of any u with lam * int u^p <= 1."""
    if not lam > 0:
        raise ValueError("the L^2 bound needs lambda > 0")
    n = m.n
    return lam ** (-(1.0 - 2.0 / n)) * volume(m) ** (2.0 / n)


def boundary_holder_bound(m: ModelManifold, lam: float) -> float:
    """Bound on the boundary L^2 mass of any u with (1 - lam) * int_{bdry} u^q <= 1."""
    if not lam < 1:
        raise ValueError("the boundary L^2 bound needs lambda < 1")
    if not m.has_boundary:
        raise ValueError("model has no boundary")
    _, q = exponents(m.n)
    return (1.0 - lam) ** (-2.0 / q) * boundary_area(m) ** (1.0 / (m.n - 1))


def constraint_gradient(u: np.ndarray, mesh: Mesh, a: float, b: float) -> np.ndarray:
    """Gradient of a*I + b*B with respect to nodal values."""
    p, q = exponents(mesh.model.n)
    uq = np.maximum(mesh.at_quadrature(u), 0.0)
    dens = a * p * mesh.area_q * uq ** (p - 1)
    if b and mesh.model.lateral_boundary:
        dens = dens + b * q * mesh.rim_q * uq ** (q - 1)
    g = mesh.scatter(mesh.weights * dens)
    if b:
        for node, area, _ in mesh.faces:
            g[node] += b * q * area * max(u[node], 0.0) ** (q - 1)
    return g


def constraint_hessian(u: np.ndarray, mesh: Mesh, a: float, b: float) -> sp.csr_matrix:
    p, q = exponents(mesh.model.n)
    uq = np.maximum(mesh.at_quadrature(u), 0.0)
    dens = a * p * (p - 1) * mesh.area_q * uq ** (p - 2)
    if b and mesh.model.lateral_boundary:
        dens = dens + b * q * (q - 1) * mesh.rim_q * uq ** (q - 2)
    hess = mesh._assemble_weighted(dens)
    if b and mesh.faces:
        diag = np.zeros(mesh.size)
        for node, area, _ in mesh.faces:
            diag[node] += b * q * (q - 1) * area * max(u[node], 0.0) ** (q - 2)
        hess = hess + sp.diags(diag)
    return hess.tocsr()


def constraint_value(u: np.ndarray, mesh: Mesh, a: float, b: float) -> tuple[float, float]:
    """Interior and boundary masses of raw nodal values (used inside the solver)."""
    field = DiscretizedField.__new__(DiscretizedField)
    object.__setattr__(field, "mesh", mesh)
    object.__setattr__(field, "values", u)
    I = interior_mass(field) if a else 0.0
    B = boundary_mass(field) if b else 0.0
    return I, B
