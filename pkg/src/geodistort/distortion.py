"""Radial solvers for the length-preserving and the volume-preserving radial maps.

The exponential map of a radially symmetric chart is fixed by the unit-speed
condition  d rhat / d r' = 1 / sqrt(g_rr(rhat)).  The volume-preserving
distortion Theta sends a synthetic radius r to the Riemannian radius r'(r)
solving  d r' / d r = r / (r' g(r')),  where g is the normal-coordinate volume
element; that derivative is the differential slip.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, quad

from . import metric as mc
from .errors import RangeError, SingularityError, StepError
from .geodesic import GeodesicCurve, NormalFrame, exp_map_batch
from .interp import MonotoneCubic
from .metric import ChartPoint, MetricField
from .rk4 import rk4_step

DEFAULT_STEPS = 2000
SLIP_LIMIT = 1e8
# above this slip the solve continues with r' as the independent variable
SWITCH_SLIP = 4.0


class _Halt(Exception):
    pass


# --- length-preserving (exponential map) -------------------------------------

@dataclass(frozen=True)
class LengthProfile:
    """Tabulated solution rhat(r') of the unit-speed radial ODE."""

    rprime: np.ndarray
    rhat: np.ndarray
    slope: np.ndarray
    boundary: float
    singular: bool
    _interp: MonotoneCubic = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_interp", MonotoneCubic(self.rprime, self.rhat, self.slope))

    def __call__(self, rprime):
        rprime = np.asarray(rprime, dtype=float)
        if np.any(rprime > self.boundary):
            if self.singular:
                raise SingularityError(
                    f"radial metric component blows up at r' = {self.boundary:.10g}", self.boundary
                )
            raise RangeError(f"r' beyond the solved span {self.boundary:.10g}")
        return self._interp(rprime)

    def inverse(self, rhat):
        return self._interp.inverse(rhat)

    @property
    def rhat_end(self):
        return float(self.rhat[-1])


def solve_length_preserving(g_rr, rhat_max=np.inf, rprime_span=None, n_steps=DEFAULT_STEPS):
    """Solve d rhat/d r' = 1/sqrt(g_rr(rhat)), rhat(0) = 0, by fixed-step RK4.

    Integration stops early when rhat reaches ``rhat_max`` or g_rr stops
    being finite and positive; the profile then records that radius as a
    singular ``boundary``.  Without ``rprime_span`` the span is the radial
    length of ``[0, rhat_max)``.
    """
    if n_steps < 2:
        raise StepError(f"n_steps must be at least 2, got {n_steps}")
    if rprime_span is None:
        if not np.isfinite(rhat_max):
            raise ValueError("rprime_span is required when rhat_max is infinite")
        rprime_span = quad(lambda s: np.sqrt(g_rr(s)), 0.0, rhat_max, limit=200)[0]

    def rhs(_rp, rh):
        # stages may probe just past rhat_max; only an invalid metric stops the flow
        with np.errstate(divide="ignore", invalid="ignore"):
            val = float(g_rr(rh))
        if not np.isfinite(val) or val <= 0.0:
            return 0.0
        return 1.0 / np.sqrt(val)

    h = rprime_span / n_steps
    rps, rhs_nodes, slopes = [0.0], [0.0], [rhs(0.0, 0.0)]
    rh = 0.0
    for i in range(n_steps):
        rp = i * h
        rh = min(float(rk4_step(rhs, rp, rh, h)), rhat_max)
        rps.append((i + 1) * h)
        rhs_nodes.append(rh)
        slopes.append(rhs(rp + h, rh))
        if rh >= rhat_max or slopes[-1] == 0.0:
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        edge = float(g_rr(rhat_max)) if np.isfinite(rhat_max) else 1.0
    singular = len(rps) <= n_steps or not (np.isfinite(edge) and 0 < edge < 1e16)
    singular = singular and (rh >= rhat_max or slopes[-1] == 0.0)
    return LengthProfile(np.array(rps), np.array(rhs_nodes), np.array(slopes), rps[-1], singular)


def projection_component(m: MetricField):
    """Radial metric component as a function of the projection radius rhat.

    Warped metrics live in normal coordinates, so their projection radius is
    the circumferential radius f(r'); every other chart uses its own radial
    component.
    """
    if m.meta.get("kind") == "warped":
        return m.radial_symmetry.projection_rr, m.radial_symmetry.projection_end
    return m.radial_component, m.domain_radius


def exponential_profile(m: MetricField, n_steps=DEFAULT_STEPS, rprime_span=None) -> LengthProfile:
    if m.radial_symmetry is None:
        raise ValueError(f"metric {m.name!r} is not radially symmetric")
    g_rr, end = projection_component(m)
    if rprime_span is None and not np.isfinite(end):
        rprime_span = m.radial_symmetry.rprime_end
    return solve_length_preserving(g_rr, end, rprime_span, n_steps)


def chart_length_profile(m: MetricField, n_steps=DEFAULT_STEPS) -> LengthProfile:
    """Chart radius as a function of radial length, in the metric's own chart."""
    end = m.domain_radius
    span = None if np.isfinite(end) else m.radial_symmetry.rprime_end
    return solve_length_preserving(m.radial_component, end, span, n_steps)


# --- volume-preserving (metrical distortion) ---------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """r -> r'(r) for the volume-preserving radial map, plus derived columns."""

    origin: ChartPoint
    grid_r: np.ndarray
    r_prime: np.ndarray
    r_hat: np.ndarray
    slip: np.ndarray
    g_of_rprime: np.ndarray
    r_max: float
    g: object = field(repr=False, compare=False)
    metric: MetricField | None = field(default=None, repr=False, compare=False)
    length: LengthProfile | None = field(default=None, repr=False, compare=False)
    _rprime: MonotoneCubic = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_rprime", MonotoneCubic(self.grid_r, self.r_prime, self.slip))

    def _check_r(self, r, inclusive=True):
        r = np.asarray(r, dtype=float)
        over = r > self.r_max if inclusive else r >= self.r_max
        if np.any(r < 0) or np.any(over):
            raise RangeError(f"synthetic radius outside [0, {self.r_max:.10g})")
        return r

    def rprime(self, r):
        return self._rprime(self._check_r(r))

    def r_of_rprime(self, rprime):
        return self._rprime.inverse(rprime)

    def rhat(self, r):
        if self.length is None:
            raise ValueError("profile carries no chart-radius map")
        rp = self.rprime(r)
        # r' at r_max may overshoot the chart boundary by rounding
        edge = self.length.boundary
        return self.length(np.where((rp > edge) & (rp <= edge * (1 + 1e-12)), edge, rp))

    @property
    def rhat_limit(self):
        """Largest synthetic radius whose chart radius is tabulated."""
        if self.length is None:
            return 0.0
        return float(min(self.r_max, self.r_of_rprime(min(self.length.boundary, self.r_prime[-1]))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "r_prime", "r_hat", "slip", "g"])
        for row in zip(self.grid_r, self.r_prime, self.r_hat, self.slip, self.g_of_rprime):
            writer.writerow([f"{v:.10g}" for v in row])
        return buf.getvalue()


def _default_span(g, rprime_end):
    s = np.linspace(0.0, rprime_end, 4001)
    area = np.trapezoid(s * np.maximum(g(s), 0.0), s)
    return np.sqrt(2.0 * area) * (1.0 + 1e-3)


def solve_volume_preserving(g, r_span=None, n_steps=DEFAULT_STEPS, rprime_end=np.inf, *,
                            rhat_of=None, origin=(0.0, 0.0), metric=None):
    """Integrate d r'/d r = r / (r' g(r')), r'(0) = 0, on a uniform r grid with RK4.

    The solve halts when r' reaches ``rprime_end`` (the chart's end or the cut
    radius): once the slip exceeds ``SWITCH_SLIP``, or a step would overshoot
    ``rprime_end``, the remaining piece is integrated in the inverse form
    d r/d r' = r' g(r') / r, which stays regular at the cut radius.  The
    radius reached there is ``r_max``.
    """
    if n_steps < 2:
        raise StepError(f"n_steps must be at least 2, got {n_steps}")
    if r_span is None:
        if not np.isfinite(rprime_end):
            raise ValueError("r_span is required when rprime_end is infinite")
        r_span = _default_span(g, rprime_end)
    h = r_span / n_steps

    def gval(rp):
        return float(g(rp))

    def slip_of(r, rp):
        if rp <= 0.0:
            return 1.0
        gv = gval(rp)
        return r / (rp * gv) if gv > 0 else np.inf

    def rhs_r(r, rp):
        if rp >= rprime_end:
            raise _Halt
        if rp <= 0.0:
            return 1.0
        gv = gval(rp)
        if not gv > 0:
            raise _Halt
        return r / (rp * gv)

    rs, rps = [0.0], [0.0]
    r, rp = 0.0, 0.0
    switched = False
    for i in range(n_steps):
        try:
            rp_new = float(rk4_step(rhs_r, r, rp, h))
        except _Halt:
            switched = True
            break
        r_new = (i + 1) * h
        # the inverse form needs a finite end radius to integrate towards
        limit = SWITCH_SLIP if np.isfinite(rprime_end) else SLIP_LIMIT
        if not np.isfinite(rp_new) or rp_new >= rprime_end or slip_of(r_new, rp_new) > limit:
            switched = True
            break
        r, rp = r_new, rp_new
        rs.append(r)
        rps.append(rp)

    if switched:
        if not np.isfinite(rprime_end):
            raise SingularityError(f"slip blew up at r = {r:.10g} with no declared end radius", r)

        def rhs_rp(x, y):
            if y <= 0.0:
                return 1.0
            return x * gval(x) / y

        remaining = rprime_end - rp
        k = max(1, int(np.ceil(remaining / h)))
        dx = remaining / k
        for j in range(k):
            x0 = rp + j * dx
            r = float(rk4_step(rhs_rp, x0, r, dx))
            x1 = rprime_end if j == k - 1 else rp + (j + 1) * dx
            if not np.isfinite(r):
                raise SingularityError(f"inverse radial solve failed at r' = {x0:.10g}", x0)
            rs.append(r)
            rps.append(x1)
            if slip_of(r, x1) > SLIP_LIMIT and j < k - 1:
                break

    rs = np.array(rs)
    rps = np.array(rps)
    gs = np.where(rps > 0, np.asarray(g(rps), dtype=float), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        slip = np.where(rps > 0, rs / (rps * gs), 1.0)
    slip = np.where(np.isfinite(slip) & (slip > 0), slip, np.inf)
    if rhat_of is not None:
        ok = rps <= rhat_of.boundary
        rhat = np.full_like(rps, np.nan)
        rhat[ok] = rhat_of(rps[ok])
    else:
        rhat = np.full_like(rps, np.nan)
    return RadialProfile(
        origin=ChartPoint(*map(float, origin)),
        grid_r=rs,
        r_prime=rps,
        r_hat=rhat,
        slip=slip,
        g_of_rprime=gs,
        r_max=float(rs[-1]),
        g=g,
        metric=metric,
        length=rhat_of,
    )


def distortion_profile(m: MetricField, n_steps=DEFAULT_STEPS, exp_steps=DEFAULT_STEPS) -> RadialProfile:
    """Volume-preserving profile of a radially symmetric metric about its chart origin."""
    rs = m.radial_symmetry
    if rs is None:
        raise ValueError(f"metric {m.name!r} is not radially symmetric")
    length = exponential_profile(m, exp_steps)
    return solve_volume_preserving(
        rs.volume_element, None, n_steps, rs.rprime_end, rhat_of=length, metric=m
    )


def inverse_profile(p: RadialProfile, rhat):
    """Synthetic radius r whose chart radius is ``rhat``."""
    rhat = np.asarray(rhat, dtype=float)
    if p.length is None:
        raise ValueError("profile carries no chart-radius map")
    limit = p.rhat_limit
    top = float(p.rhat(limit))
    # the chart radius is flat at a blow-up end; snap values within rounding of it
    tiny = 4.0 * np.finfo(float).eps * top
    at_top = np.abs(rhat - top) <= tiny
    if np.any(rhat < 0) or np.any((rhat > top) & ~at_top):
        raise RangeError(f"chart radius outside [0, {top:.10g}]")
    lo = np.zeros_like(rhat)
    hi = np.full_like(rhat, limit)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = p.rhat(mid) < rhat
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return np.where(at_top, limit, out)


def differential_slip(p: RadialProfile, r):
    """dt/ds = dr'/dr evaluated from the ODE right-hand side at r'(r)."""
    r = p._check_r(r, inclusive=False)
    rp = p.rprime(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(rp > 0, r / (rp * np.asarray(p.g(np.where(rp > 0, rp, 1.0)))), 1.0)
    return out


# --- Theta, kappa and renormalised transport ---------------------------------

def theta_map_batch(p: RadialProfile, frame: NormalFrame, s, steps_per_unit=DEFAULT_STEPS):
    """Theta at synthetic points ``s`` (N, 2): exp(r'(|s|) s/|s|)."""
    if p.metric is None:
        raise ValueError("profile is not attached to a metric")
    s = np.atleast_2d(np.asarray(s, dtype=float))
    radius = np.hypot(s[:, 0], s[:, 1])
    p._check_r(radius, inclusive=False)
    rp = p.rprime(radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(radius > 0, rp / np.where(radius > 0, radius, 1.0), 0.0)
    return exp_map_batch(p.metric, frame, s * scale[:, None], steps_per_unit)


def theta_map(p: RadialProfile, frame: NormalFrame, s) -> ChartPoint:
    return ChartPoint(*theta_map_batch(p, frame, [s])[0])


def theta_inverse_batch(p: RadialProfile, frame: NormalFrame, chart_length: LengthProfile, points):
    """Synthetic preimages of chart points for a radially symmetric Cartesian chart."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    offset = pts - np.asarray(frame.origin, dtype=float)
    rho = np.hypot(offset[:, 0], offset[:, 1])
    rp = chart_length.inverse(rho)
    r = p.r_of_rprime(rp)
    dirs = frame.from_chart(offset)
    norm = np.hypot(dirs[:, 0], dirs[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norm > 0, r / np.where(norm > 0, norm, 1.0), 0.0)
    return dirs * scale[:, None]


@dataclass(frozen=True)
class KappaField:
    """kappa with kappa kappa^T = g^-1 in the radially symmetric gauge about ``origin``."""

    metric: MetricField
    origin: ChartPoint


def kappa_matrix(k: KappaField, q) -> np.ndarray:
    """Chart-component matrix of kappa at ``q``.

    kappa scales the Euclidean radial direction by g_rr^(-1/2) and the
    angular direction by g_phiphi^(-1/2); at the origin it is the identity.
    """
    if k.metric.polar:
        raise ValueError("kappa is defined for Cartesian charts")
    q = np.asarray(q, dtype=float)
    g = mc.metric_at(k.metric, q)
    offset = q - np.asarray(k.origin, dtype=float)
    rho = np.hypot(*offset)
    if rho == 0.0:
        return np.eye(2)
    e_r = offset / rho
    e_r = e_r / np.hypot(*e_r)  # subnormal offsets
    e_phi = np.array([-e_r[1], e_r[0]])
    a = e_r @ g @ e_r
    b = e_phi @ g @ e_phi
    return np.outer(e_r, e_r) / np.sqrt(a) + np.outer(e_phi, e_phi) / np.sqrt(b)


def kappa_apply(k: KappaField, q, v) -> np.ndarray:
    return kappa_matrix(k, q) @ np.asarray(v, dtype=float)


def kappa_polar(k: KappaField, q) -> np.ndarray:
    """kappa expressed in the coordinate basis (d_rho, d_phi) of chart polar coordinates."""
    q = np.asarray(q, dtype=float)
    offset = q - np.asarray(k.origin, dtype=float)
    rho = np.hypot(*offset)
    c, s = offset / rho
    to_cart = np.array([[c, -rho * s], [s, rho * c]])
    return np.linalg.solve(to_cart, kappa_matrix(k, q) @ to_cart)


def renormalized_transport(p: RadialProfile, frame: NormalFrame, c, s_max, n_samples=200,
                           ds=1e-3, steps_per_unit=DEFAULT_STEPS) -> GeodesicCurve:
    """Image of a Euclidean unit-speed synthetic curve under Theta, reparametrised to g-unit speed.

    ``c`` maps an array of curve parameters to synthetic points of shape (N, 2).
    The g-speed of Theta(c(s)) comes from Richardson-extrapolated central
    differences of width ``ds``; its cumulative integral is the new parameter t.
    """
    if n_samples < 3:
        raise StepError("need at least three samples")
    s = np.linspace(0.0, s_max, n_samples)
    stacked = np.concatenate([s, s + ds, s - ds, s + 0.5 * ds, s - 0.5 * ds])
    images = theta_map_batch(p, frame, c(stacked), steps_per_unit)
    pts, plus, minus, plus_h, minus_h = np.split(images, 5)
    # Richardson-extrapolated central difference, error O(ds^4)
    velocity = (4.0 * (plus_h - minus_h) / ds - (plus - minus) / (2.0 * ds)) / 3.0
    g = mc.metric_batch(p.metric, pts, check=False)
    speed = np.sqrt(np.einsum("ni,nij,nj->n", velocity, g, velocity))
    t = cumulative_simpson(speed, x=s, initial=0.0)
    return GeodesicCurve(pts, velocity / speed[:, None], t, p.metric)
