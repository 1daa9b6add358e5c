"""Constrained minimization of the energy over piecewise-linear fields.

The minimizer is found by gradient descent on the constraint surface
``a I(u) + b B(u) = 1`` using the H^1-type Riesz map of the mesh as the metric
(a Sobolev gradient), so the iteration count does not grow with the mesh.  Each
accepted step is clamped at zero and rescaled back onto the constraint.  A
short Newton pass on the Lagrange system polishes the best descent result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import integrate
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import splu

from . import geometry as geo
from .functional import (
    DiscretizedField,
    Mesh,
    _check_weights,
    constraint_gradient,
    constraint_hessian,
    constraint_value,
    discretize,
    exponents,
    gradient_coefficient,
    scale_to_constraint,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    mesh_nodes: int = 257
    max_iterations: int = 3000
    armijo: float = 1e-4
    shrink: float = 0.5
    restarts: int = 4
    seed: int = 0
    tolerance: float = 1e-8
    refinement_levels: int = 3
    newton_polish: bool = True

    def __post_init__(self):
        if self.mesh_nodes < 16:
            raise ValueError("mesh_nodes must be >= 16")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")


@dataclass
class YamabeEstimate:
    value: float
    minimizer: DiscretizedField
    a: float
    b: float
    mesh_level: int
    euler_lagrange_residual: float
    converged: bool
    iterations: int = 0
    start: str = ""
    extrapolated_value: float | None = None
    observed_order: float | None = None
    monotone: bool | None = None
    level_values: list[float] = field(default_factory=list)
    is_upper_bound: bool = True  # symmetric reduction bounds the true infimum from above

    @property
    def mesh_nodes(self) -> int:
        return self.minimizer.mesh.nodes_per_segment


class _Problem:
    """Energy and constraint of one (model, mesh, a, b) in raw-array form."""

    def __init__(self, mesh: Mesh, a: float, b: float):
        self.mesh, self.a, self.b = mesh, a, b
        self.n = mesh.model.n
        self.Q = mesh.quadratic
        precond = (mesh.stiffness + mesh.mass).tocsc()
        # lift the zero mode of a pure Neumann stiffness if the mass vanishes
        self._lu = splu(precond + sp.identity(mesh.size, format="csc") * 1e-14)

    def solve(self, v):
        return self._lu.solve(v)

    def energy(self, u) -> float:
        return float(u @ (self.Q @ u))

    def normalize(self, u):
        u = np.maximum(u, 0.0)
        I, B = constraint_value(u, self.mesh, self.a, self.b)
        if (self.a * I + self.b * B) <= 0:
            return None
        return u * scale_to_constraint(self.n, self.a, self.b, I, B)

    def stationarity(self, u):
        g = 2.0 * (self.Q @ u)
        h = constraint_gradient(u, self.mesh, self.a, self.b)
        Pg, Ph = self.solve(g), self.solve(h)
        mu = float(h @ Pg) / float(h @ Ph)
        r = g - mu * h
        # Riesz representative of the residual; half of it is the Newton-scaled step
        d = 0.5 * (Pg - mu * Ph)
        rPr = max(float(r @ self.solve(r)), 0.0)
        gPg = max(float(g @ Pg), 1e-300)
        return g, h, d, mu, math.sqrt(rPr / gPg), 0.5 * rPr


STALL_WINDOW = 100
CG_RESTART = 50


def _descend(prob: _Problem, u, opts: SolverOptions):
    """Preconditioned nonlinear conjugate gradients (PR+) on the constraint surface."""
    u = prob.normalize(u)
    E = prob.energy(u)
    alpha = 1.0
    res = math.inf
    it = 0
    history = []
    direction = prev_d = prev_rd = None
    for it in range(1, opts.max_iterations + 1):
        g, h, d, mu, res, rd = prob.stationarity(u)
        if res < opts.tolerance:
            return u, E, res, it, True
        history.append(E)
        if len(history) > STALL_WINDOW and history[-STALL_WINDOW - 1] - E <= 1e-13 * abs(E):
            # flat valley: the energy no longer moves at roundoff level
            return u, E, res, it, res < math.sqrt(opts.tolerance)
        r = g - mu * h
        if direction is None or it % CG_RESTART == 0:
            direction = d
        else:
            beta = max(0.0, float(r @ (d - prev_d)) / prev_rd)
            direction = d + beta * direction
            if float(r @ direction) <= 0:
                direction = d
        slope = float(r @ direction)
        prev_d, prev_rd = d, rd
        accepted = False
        while alpha > 1e-14:
            trial = prob.normalize(u - alpha * direction)
            if trial is not None:
                Et = prob.energy(trial)
                if Et <= E - opts.armijo * alpha * slope:
                    accepted = True
                    break
            alpha *= opts.shrink
        if not accepted:
            if direction is not d:
                direction, alpha = None, 1.0
                continue
            # no descent left at machine precision
            return u, E, res, it, res < math.sqrt(opts.tolerance)
        u, E = trial, Et
        alpha = min(alpha / opts.shrink, 4.0)
        if opts.newton_polish and res < 1e-3 and it % 5 == 0:
            u2, E2, res2, ok = _newton(prob, u, E, opts)
            if ok and res2 < opts.tolerance:
                return u2, E2, res2, it, True
            if ok and E2 <= E + 1e-13 * abs(E) and E2 < E:
                u, E, direction = u2, E2, None
    return u, E, res, it, False


def _newton(prob: _Problem, u, E, opts: SolverOptions, steps: int = 30):
    """Damped Newton on grad E = mu grad G, restricted to the constraint.

    Each step is halved until the energy does not increase; a step that cannot
    be made to decrease the residual ends the pass.
    """
    mesh = prob.mesh
    res = prob.stationarity(u)[4]
    for _ in range(steps):
        g, h, _, mu, res, _ = prob.stationarity(u)
        if res < opts.tolerance:
            break
        H = (2.0 * prob.Q - mu * constraint_hessian(u, mesh, prob.a, prob.b)).tocsc()
        K = sp.bmat([[H, sp.csc_matrix(h[:, None])], [sp.csc_matrix(h[None, :]), None]], format="csc")
        rhs = np.concatenate([-(g - mu * h), [0.0]])
        try:
            step = splu(K).solve(rhs)[:-1]
        except RuntimeError:
            return u, E, res, False
        if not np.all(np.isfinite(step)):
            return u, E, res, False
        tau, moved = 1.0, False
        while tau > 1e-6:
            trial = prob.normalize(u + tau * step)
            if trial is not None:
                Et = prob.energy(trial)
                if Et <= E + 4e-15 * abs(E):
                    new_res = prob.stationarity(trial)[4]
                    if new_res < res or Et < E - 4e-15 * abs(E):
                        u, E, res, moved = trial, Et, new_res, True
                        break
            tau *= 0.5
        if not moved:
            break
    return u, E, res, True


def initial_profiles(mesh: Mesh, seed: int) -> list[tuple[str, np.ndarray]]:
    """Named starting fields: the constant and a seeded random field, plus two bubbles (mid-domain, boundary)."""
    model = mesh.model
    s = mesh.t
    total = model.length
    width = min(1.0, total / 8.0)
    expo = (model.n - 2) / 2.0

    def bubble(center):
        dist = np.abs(s - center)
        if model.periodic:
            dist = np.minimum(dist, total - dist)
        return np.cosh(dist / width) ** (-expo)

    bnd_center = 0.0
    if model.ends[1].kind == geo.BOUNDARY:
        bnd_center = total
    elif model.ends[0].kind == geo.BOUNDARY:
        bnd_center = 0.0
    elif model.lateral_boundary:
        bnd_center = total / 2.0
    rng = np.random.default_rng(seed)
    coef = rng.uniform(-1.0, 1.0, size=6) / np.arange(1, 7)
    phase = 2.0 * math.pi if model.periodic else math.pi
    smooth = sum(c * np.cos(k * phase * s / total) for k, c in enumerate(coef, start=1))
    smooth = smooth / max(np.abs(smooth).max(), 1e-12)
    return [
        ("constant", np.ones(mesh.size)),
        ("bubble", bubble(total / 2.0) + 1e-3),
        ("boundary", bubble(bnd_center) + 1e-3),
        ("random", 1.0 + 0.8 * smooth),
    ]


def _check_reachable(m: geo.ModelManifold, a: float, b: float):
    try:
        _check_weights(m, a, b)
    except ValueError as exc:
        raise ValueError(f"constraint unreachable on {m.label or 'model'}: {exc}") from None


def _better(key, incumbent, rel: float = 1e-11) -> bool:
    # energies equal to roundoff are ranked by residual
    E, res = key
    E0, res0 = incumbent
    if abs(E - E0) <= rel * max(abs(E), abs(E0)):
        return res < res0
    return E < E0


def minimize_energy(
    m: geo.ModelManifold,
    a: float,
    b: float,
    opts: SolverOptions = SolverOptions(),
    initial: list[np.ndarray] | None = None,
    nodes: int | None = None,
    mesh_level: int = 0,
) -> YamabeEstimate:
    """Discrete infimum of E over fields with a*I + b*B = 1.

    Starts from any ``initial`` arrays (warm starts) and then from the standard
    profiles, up to ``opts.restarts`` standard starts.  The best result wins:
    smallest energy, then smallest residual.
    """
    _check_reachable(m, a, b)
    mesh = discretize(m, nodes or opts.mesh_nodes)
    prob = _Problem(mesh, a, b)
    starts = [("warm", np.asarray(v, dtype=float)) for v in (initial or [])]
    starts += initial_profiles(mesh, opts.seed)[: opts.restarts]
    best = None
    for name, u0 in starts:
        if prob.normalize(u0) is None:
            continue
        u, E, res, its, ok = _descend(prob, u0, opts)
        key = (E, res)
        if best is None or _better(key, best[0]):
            best = (key, u, res, its, ok, name)
    if best is None:
        raise ValueError("no admissible starting field")
    (E, _), u, res, its, ok, name = best
    if not ok:
        log.warning("minimizer on %s did not converge (residual %.2e)", m.label, res)
    return YamabeEstimate(
        value=E,
        minimizer=DiscretizedField(mesh, u),
        a=a,
        b=b,
        mesh_level=mesh_level,
        euler_lagrange_residual=res,
        converged=ok,
        iterations=its,
        start=name,
    )


def prolong(u: DiscretizedField, nodes: int) -> np.ndarray:
    """Interpolate a field onto the mesh of the same model with ``nodes`` per segment."""
    fine = discretize(u.model, nodes)
    coarse_t = u.mesh.t
    vals = u.values
    if u.model.periodic:
        coarse_t = np.append(coarse_t, u.model.length)
        vals = np.append(vals, vals[0])
    return np.interp(fine.t, coarse_t, vals)


def refine_and_extrapolate(m: geo.ModelManifold, a: float, b: float, opts: SolverOptions = SolverOptions()) -> YamabeEstimate:
    """Minimize on bisected meshes and Richardson-extrapolate assuming O(h^2)."""
    if opts.refinement_levels < 2:
        raise ValueError("refinement needs at least 2 levels")
    values, est = [], None
    for level in range(opts.refinement_levels):
        nodes = (opts.mesh_nodes - 1) * 2**level + 1
        warm = [prolong(est.minimizer, nodes)] if est is not None else None
        est = minimize_energy(m, a, b, opts, initial=warm, nodes=nodes, mesh_level=level)
        values.append(est.value)
    est.level_values = values
    diffs = np.diff(values)
    scale = max(abs(values[-1]), 1.0)
    est.monotone = bool(np.all(diffs <= 1e-9 * scale))
    if not est.monotone:
        log.warning("non-monotone refinement on %s: %s", m.label, values)
    est.extrapolated_value = values[-1] + (values[-1] - values[-2]) / 3.0
    order = None
    if len(values) >= 3:
        d1, d2 = values[-3] - values[-2], values[-2] - values[-1]
        if abs(d2) > 1e-13 * scale and d1 / d2 > 0:
            order = math.log2(d1 / d2)
    est.observed_order = order
    return est


def lambda_sweep(m: geo.ModelManifold, grid, opts: SolverOptions = SolverOptions(), warm: bool = True):
    """Estimates of Y_lambda along ``grid``, warm-started from the previous point.

    A failing point is recorded as ``(lam, exc)`` instead of aborting the sweep.
    """
    out = []
    prev = None
    for lam in sorted(float(x) for x in grid):
        if not 0.0 <= lam <= 1.0:
            out.append((lam, ValueError(f"lambda {lam} outside [0, 1]")))
            continue
        try:
            init = [prev.minimizer.values] if (warm and prev is not None) else None
            est = minimize_energy(m, lam, 1.0 - lam, opts, initial=init)
        except ValueError as exc:
            out.append((lam, exc))
            continue
        out.append((lam, est))
        prev = est
    return out


# -- closed forms ------------------------------------------------------------


def sphere_volume(n: int) -> float:
    return geo.sphere_area(n)


def closed_form_sphere(n: int) -> float:
    """n(n-1) Vol(S^n)^{2/n}: Y_{1,0} of the round sphere in the energy's normalization."""
    if n < 3:
        raise ValueError("n must be >= 3")
    return n * (n - 1) * sphere_volume(n) ** (2.0 / n)


@dataclass(frozen=True)
class EscobarValue:
    """The published closed form and the same number rescaled by 4(n-1)/(n-2)."""

    published: float
    rescaled: float
    factor: float


def closed_form_hemisphere(n: int, lam: float) -> EscobarValue:
    if n < 3 or not 0.0 <= lam <= 1.0:
        raise ValueError("need n >= 3 and lambda in [0, 1]")
    vol = sphere_volume(n) / 2.0
    area = geo.sphere_area(n - 1)
    denom = 4.0 * (lam * vol ** ((n - 2) / n) + (1.0 - lam) * area ** ((n - 2) / (n - 1)))
    published = n * (n - 2) * vol / denom
    factor = gradient_coefficient(n)
    return EscobarValue(published, factor * published, factor)


def _cap_energy(n: int, lam: float, vol: float, area: float, hmean: float, rcurv: float) -> float:
    """Energy of the normalized constant field on a region with constant R and H."""
    c = scale_to_constraint(n, lam, 1.0 - lam, vol, area)
    return c * c * (rcurv * vol + 2.0 * (n - 1) * hmean * area)


def cap_family_energy(n: int, lam: float, rho: float) -> float:
    """Normalized energy of the constant field on the geodesic ball of radius rho in S^n.

    Every such ball is conformal to S^n_+; ``rho -> 0`` is the flat unit ball.
    """
    omega = geo.sphere_area(n - 1)
    if rho <= 0.0:
        return _cap_energy(n, lam, omega / n, omega, 1.0, 0.0)
    vol = omega * integrate.quad(lambda t: math.sin(t) ** (n - 1), 0.0, rho, epsabs=0, epsrel=1e-13)[0]
    area = omega * math.sin(rho) ** (n - 1)
    return _cap_energy(n, lam, vol, area, math.cos(rho) / math.sin(rho), n * (n - 1.0))


def cap_family_minimum(n: int, lam: float) -> tuple[float, float]:
    """Smallest constant-field energy over the conformal family of balls in S^n.

    Returns ``(value, rho)``; an independent reference for Y_lambda(S^n_+).
    """
    grid = np.linspace(0.0, math.pi - 1e-3, 400)
    vals = [cap_family_energy(n, lam, r) for r in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    best_rho, best = grid[k], vals[k]
    if hi > lo:
        res = minimize_scalar(
            lambda r: cap_family_energy(n, lam, r), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
        )
        if res.fun < best:
            best_rho, best = float(res.x), float(res.fun)
    return best, best_rho


def constant_field_energy(m: geo.ModelManifold, a: float, b: float) -> float:
    """Exact energy of the normalized constant field on a model without boundary faces."""
    _check_reachable(m, a, b)
    vol = geo.volume(m)
    area = geo.boundary_area(m) if b else 0.0
    c = scale_to_constraint(m.n, a, b, vol, area)
    curv = 0.0
    for s in m.segments:
        curv += integrate.quad(lambda t: float(s.scalar_curvature(t) * s.fiber_area(t)), *s.domain, epsrel=1e-13)[0]
    bterm = 0.0
    for side in (0, 1):
        if m.ends[side].kind == geo.BOUNDARY:
            seg, t = m.end_point(side)
            bterm += 2 * (m.n - 1) * geo.boundary_mean_curvature(m, side) * float(seg.fiber_area(t))
    return c * c * (curv + bterm)


__all__ = [
    "SolverOptions",
    "YamabeEstimate",
    "minimize_energy",
    "refine_and_extrapolate",
    "lambda_sweep",
    "closed_form_sphere",
    "closed_form_hemisphere",
    "cap_family_energy",
    "cap_family_minimum",
    "constant_field_energy",
    "prolong",
]
