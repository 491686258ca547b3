"""Geodesic shooting, the exponential map, parallel transport and the normal volume element.

Geodesics are integrated as the first-order system on (x, y, x', y') with
fixed-step RK4.  Vectors transported along a geodesic ride in the same state
vector, so they see exactly the Christoffel evaluations of the curve.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import metric as mc
from .errors import DomainError, DomainEscapeError, ConvergenceError, StepError
from .metric import ChartPoint, MetricField, TangentTuple
from .rk4 import hermite_eval, rk4_step

STEPS_PER_UNIT = 2000
BLOWUP_VOLUME = 1e8
LOG_MAX_ITER = 200


@dataclass(frozen=True)
class NormalFrame:
    """A g-orthonormal basis at ``origin``; ``basis[:, k]`` is the k-th vector in chart components."""

    origin: ChartPoint
    basis: np.ndarray

    def to_chart(self, v):
        """Chart components of vectors given in frame (normal-coordinate) components."""
        return np.asarray(v, dtype=float) @ self.basis.T

    def from_chart(self, v):
        return np.linalg.solve(self.basis, np.asarray(v, dtype=float).T).T


def normal_frame(m: MetricField, origin) -> NormalFrame:
    """Gram-Schmidt of the chart axes with respect to g at ``origin``."""
    origin = ChartPoint(*map(float, origin))
    g = mc.metric_at(m, origin)
    e1 = np.array([1.0, 0.0]) / np.sqrt(g[0, 0])
    e2 = np.array([0.0, 1.0]) - (e1 @ g @ np.array([0.0, 1.0])) * e1
    e2 = e2 / np.sqrt(e2 @ g @ e2)
    return NormalFrame(origin, np.column_stack([e1, e2]))


@dataclass(frozen=True)
class GeodesicCurve:
    """Sampled arc-length parametrised curve with chart tangents."""

    points: np.ndarray
    tangents: np.ndarray
    param: np.ndarray
    metric: MetricField

    @property
    def g_speed(self):
        g = mc.metric_batch(self.metric, self.points, check=False)
        return np.sqrt(np.einsum("ni,nij,nj->n", self.tangents, g, self.tangents))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x", "y", "vx", "vy", "g_speed"])
        for t, p, v, s in zip(self.param, self.points, self.tangents, self.g_speed):
            writer.writerow([f"{val:.10g}" for val in (t, p[0], p[1], v[0], v[1], s)])
        return buf.getvalue()


def _geodesic_rhs(m: MetricField):
    def rhs(_t, state):
        pos, vel = state[:, :2], state[:, 2:4]
        gamma = mc.christoffel_batch(m, pos)
        out = np.empty_like(state)
        out[:, :2] = vel
        out[:, 2:4] = -np.einsum("nkij,ni,nj->nk", gamma, vel, vel)
        if state.shape[1] > 4:
            w = state[:, 4:].reshape(len(state), -1, 2)
            out[:, 4:] = -np.einsum("nkij,ni,nmj->nmk", gamma, vel, w).reshape(len(state), -1)
        return out

    return rhs


def integrate_batch(m: MetricField, x0, u0, h, n_steps, transported=None, truncate=False):
    """RK4 integration of N geodesics (and optionally vectors transported along them).

    ``x0``, ``u0``: (N, 2) start points and chart velocities; ``h``: step per
    trajectory, shape (N,); ``transported``: (N, K, 2).  Returns the state
    history of shape (n+1, N, 4 + 2K).  If a stage leaves the domain or the
    volume element exceeds the blow-up threshold, :class:`DomainEscapeError`
    is raised, unless ``truncate`` is set, in which case the safe prefix is
    returned.
    """
    if n_steps < 2:
        raise StepError(f"n_steps must be at least 2, got {n_steps}")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    u0 = np.atleast_2d(np.asarray(u0, dtype=float))
    n = len(x0)
    parts = [x0, u0]
    if transported is not None:
        parts.append(np.asarray(transported, dtype=float).reshape(n, -1))
    state = np.hstack(parts)
    h = np.broadcast_to(np.asarray(h, dtype=float), (n,))[:, None]
    rhs = _geodesic_rhs(m)
    history = np.empty((n_steps + 1,) + state.shape)
    history[0] = state
    for i in range(n_steps):
        try:
            new = rk4_step(rhs, 0.0, state, h)
            ok = np.all(np.isfinite(new))
            if ok:
                vol = mc.volume_batch(m, new[:, :2])
                ok = bool(np.all(vol < BLOWUP_VOLUME))
        except DomainError:
            ok = False
        if not ok:
            if truncate:
                return history[: i + 1]
            last_t = float(np.min(h) * i)
            raise DomainEscapeError(
                f"geodesic left the chart of {m.name!r} after length {last_t:.6g}", last_t
            )
        state = new
        history[i + 1] = state
    return history


def _n_steps_for(length, steps_per_unit):
    return max(2, int(np.ceil(steps_per_unit * length)))


def geodesic_shoot(m: MetricField, frame: NormalFrame, v, t_max, n_steps=None) -> GeodesicCurve:
    """Unit-speed geodesic from ``frame.origin`` in frame direction ``v`` up to length ``t_max``."""
    v = np.asarray(v, dtype=float)
    if abs(np.hypot(*v) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector in frame components")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if n_steps is None:
        n_steps = _n_steps_for(t_max, STEPS_PER_UNIT)
    if n_steps < 2:
        raise StepError(f"n_steps must be at least 2, got {n_steps}")
    h = t_max / n_steps
    hist = integrate_batch(m, [frame.origin], [frame.to_chart(v)], h, n_steps)[:, 0, :]
    return GeodesicCurve(hist[:, :2], hist[:, 2:4], h * np.arange(n_steps + 1), m)


def exp_map_batch(m: MetricField, frame: NormalFrame, vs, steps_per_unit=STEPS_PER_UNIT):
    """exp at many normal-coordinate vectors ``vs`` (N, 2) at once."""
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    lengths = np.hypot(vs[:, 0], vs[:, 1])
    out = np.tile(np.asarray(frame.origin, dtype=float), (len(vs), 1))
    moving = lengths > 0
    if not np.any(moving):
        return out
    dirs = vs[moving] / lengths[moving, None]
    n = _n_steps_for(lengths.max(), steps_per_unit)
    hist = integrate_batch(
        m, out[moving], frame.to_chart(dirs), lengths[moving] / n, n
    )
    out[moving] = hist[-1, :, :2]
    return out


def exp_map(m: MetricField, frame: NormalFrame, v, steps_per_unit=STEPS_PER_UNIT) -> ChartPoint:
    return ChartPoint(*exp_map_batch(m, frame, [v], steps_per_unit)[0])


def radial_trace(m: MetricField, frame: NormalFrame, direction, t_max, steps_per_unit=STEPS_PER_UNIT):
    """Shoot along ``direction`` until ``t_max`` or the last safe radius, whichever comes first."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.hypot(*direction)
    n = _n_steps_for(t_max, steps_per_unit)
    h = t_max / n
    hist = integrate_batch(m, [frame.origin], [frame.to_chart(direction)], h, n, truncate=True)
    hist = hist[:, 0, :]
    return GeodesicCurve(hist[:, :2], hist[:, 2:4], h * np.arange(len(hist)), m)


def log_map_radial(m: MetricField, frame: NormalFrame, q, tol=1e-10, steps_per_unit=STEPS_PER_UNIT):
    """Inverse of :func:`exp_map` for a metric radially symmetric about ``frame.origin``.

    Radial geodesics run along chart rays, so the arc length reaching ``q`` is
    found by bisection on the chart distance of the traced geodesic.
    """
    if m.radial_symmetry is None:
        raise ValueError(f"metric {m.name!r} is not radially symmetric")
    mc.check_domain(m, np.asarray(q, dtype=float))
    offset = np.asarray(q, dtype=float) - np.asarray(frame.origin, dtype=float)
    target = np.hypot(*offset)
    if target == 0.0:
        return np.zeros(2)
    direction = frame.from_chart(offset / target)
    direction = direction / np.hypot(*direction)
    trace = radial_trace(m, frame, direction, m.radial_symmetry.rprime_end, steps_per_unit)
    origin = np.asarray(frame.origin, dtype=float)

    def distance(t):
        p = hermite_eval(trace.param, trace.points, trace.tangents, np.atleast_1d(t))
        return np.hypot(*(p[0] - origin))

    lo, hi = 0.0, float(trace.param[-1])
    if distance(hi) < target:
        raise DomainError(f"{tuple(q)} lies beyond the last safe radius {hi:.6g}")
    for _ in range(LOG_MAX_ITER):
        mid = 0.5 * (lo + hi)
        d = distance(mid)
        if abs(d - target) <= tol:
            return mid * direction
        if d < target:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"radial bisection did not reach tol={tol:g} in {LOG_MAX_ITER} iterations")


def transport_along(m: MetricField, curve: GeodesicCurve, vectors):
    """Parallel transport of chart vectors (K, 2) along ``curve``; returns (n, K, 2)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = len(curve.param) - 1
    h = curve.param[1] - curve.param[0]
    hist = integrate_batch(
        m, curve.points[:1], curve.tangents[:1], h, n, transported=vectors[None]
    )[:, 0, :]
    if not np.allclose(hist[:, :2], curve.points, rtol=0, atol=1e-12):
        raise ValueError("curve was not produced by this metric's geodesic integrator")
    return hist[:, 4:].reshape(n + 1, -1, 2)


def parallel_transport(m: MetricField, curve: GeodesicCurve, v0: TangentTuple) -> list[TangentTuple]:
    if v0.variance != mc.CONTRAVARIANT:
        raise ValueError("parallel transport acts on contravariant tuples")
    if not np.allclose(v0.base, curve.points[0], atol=1e-12):
        raise ValueError("vector must be based at the start of the curve")
    comps = transport_along(m, curve, [v0.components])[:, 0, :]
    return [TangentTuple(ChartPoint(*p), tuple(c)) for p, c in zip(curve.points, comps)]


def _jacobi_rhs(m: MetricField, fd_step=1e-5):
    """Geodesic flow together with its linearisation (Jacobi field J, J')."""
    shifts = np.array([[fd_step, 0.0], [-fd_step, 0.0], [0.0, fd_step], [0.0, -fd_step]])

    def rhs(_t, state):
        pos, vel = state[:, :2], state[:, 2:4]
        jac, djac = state[:, 4:6], state[:, 6:8]
        pts = np.concatenate([pos[None], pos[None] + shifts[:, None, :]]).reshape(-1, 2)
        gam = mc.christoffel_batch(m, pts).reshape(5, len(pos), 2, 2, 2)
        dgam = np.stack([gam[1] - gam[2], gam[3] - gam[4]], axis=1) / (2.0 * fd_step)
        out = np.empty_like(state)
        out[:, :2] = vel
        out[:, 2:4] = -np.einsum("nkij,ni,nj->nk", gam[0], vel, vel)
        out[:, 4:6] = djac
        out[:, 6:8] = (-np.einsum("nmkij,nm,ni,nj->nk", dgam, jac, vel, vel)
                       - 2.0 * np.einsum("nkij,ni,nj->nk", gam[0], vel, djac))
        return out

    return rhs


def normal_volume_profile(m: MetricField, frame: NormalFrame, direction, rprime_grid,
                          steps_per_unit=STEPS_PER_UNIT):
    """sqrt(det g) pulled back to normal coordinates along one radial geodesic.

    The angular Jacobi field (J(0) = 0, J'(0) the unit normal) is integrated
    with the geodesic; by the Gauss lemma it is normal to the geodesic, so its
    g-length divided by r' is the normal-coordinate volume element.
    """
    grid = np.asarray(rprime_grid, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.hypot(*direction)
    t_max = grid.max()
    n = _n_steps_for(t_max, steps_per_unit)
    h = t_max / n
    normal = np.array([-direction[1], direction[0]])
    state = np.concatenate([frame.origin, frame.to_chart(direction), [0.0, 0.0], frame.to_chart(normal)])
    rhs = _jacobi_rhs(m)
    hist = np.empty((n + 1, 8))
    hist[0] = state
    cur = state[None]
    for i in range(n):
        cur = rk4_step(rhs, 0.0, cur, h)
        if not np.all(np.isfinite(cur)):
            raise DomainEscapeError(f"geodesic left the chart of {m.name!r}", h * i)
        hist[i + 1] = cur[0]
    ts = h * np.arange(n + 1)
    y = hermite_eval(ts, hist[:, [0, 1, 4, 5]], hist[:, [2, 3, 6, 7]], grid)
    g = mc.metric_batch(m, y[:, :2], check=False)
    jac = y[:, 2:]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(np.einsum("ni,nij,nj->n", jac, g, jac)) / grid
    return np.where(grid > 0, out, 1.0)
