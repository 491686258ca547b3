"""Numerical checks of the radial identities, collected into a report.

Each check returns a :class:`CheckRecord` whose ``passed`` flag is exactly
``residual <= tolerance``.  :func:`run_suite` runs every check that applies to
a manifold and never aborts on a failing or erroring check.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad, simpson
from scipy.optimize import brentq

from . import distortion as dd
from . import geodesic as gd
from . import metric as mc
from .errors import DomainEscapeError, GeometryError, RangeError, SupportEscapeError
from .metric import MetricField

TOL_ODE = 1e-8
TOL_GEODESIC = 1e-6
TOL_MOLLIFIER = 1e-2
TOL_VOLUME = 1e-6
TOL_NORMAL_VOLUME = 1e-5
TOL_SLIP_ORIGIN = 1e-6
# |I(eps) - 1| may rise by at most this much as eps shrinks (quadrature noise)
TREND_NOISE = 1e-9
MIN_SEPARATION = 1e-6


@dataclass
class CheckRecord:
    name: str
    paper_ref: str
    residual: float
    tolerance: float
    passed: bool = field(init=False)
    runtime_ms: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        self.passed = bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class Resolution:
    steps: int = 2000
    grid: int = 100
    quad_n: int = 512
    seed: int = 0


def _num(x):
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.10g}")


@dataclass
class VerificationReport:
    manifold: str
    checks: list
    parameters: dict

    @property
    def passed_all(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "manifold": self.manifold,
            "parameters": self.parameters,
            "checks": [
                {
                    "name": c.name,
                    "paper_ref": c.paper_ref,
                    "residual": _num(c.residual),
                    "tolerance": _num(c.tolerance),
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "passed_all": self.passed_all,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        rows = [(c.name, f"{c.residual:.10g}", f"{c.tolerance:.10g}", "PASS" if c.passed else "FAIL",
                 c.paper_ref) for c in self.checks]
        head = ("check", "residual", "tolerance", "status", "identity")
        widths = [max(len(r[i]) for r in rows + [head]) for i in range(4)]
        lines = [f"manifold: {self.manifold}"]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths) + "  {}"
        lines.append(fmt.format(*head))
        lines.extend(fmt.format(*r) for r in rows)
        lines.append(f"passed_all: {str(self.passed_all).lower()}")
        return "\n".join(lines) + "\n"


# --- quadrature helpers ------------------------------------------------------

def simpson_weights(a, b, n):
    if n < 2 or n % 2:
        raise ValueError("Simpson quadrature needs an even panel count >= 2")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (b - a) / (3.0 * n)


def _fill_trailing(values):
    """Replace non-finite values in the last node along axis 0 by cubic extrapolation."""
    out = np.array(values, dtype=float)
    bad = ~np.isfinite(out)
    if not np.any(bad):
        return out
    if np.any(bad[:-1]):
        raise RangeError("integrand is singular inside the integration range")
    out[-1] = 4 * out[-2] - 6 * out[-3] + 4 * out[-4] - out[-5]
    return out


def _chart_radial_integrand(m, origin, chart_length, rprime, phi):
    """rho sqrt(det g) / sqrt(g_rr) at chart radius rho(r'): the area density in (r', phi).

    Nodes where the chart metric cannot be evaluated (the chart edge) come
    back as NaN.
    """
    rho = chart_length(np.minimum(rprime, chart_length.boundary))
    rr, pp = np.meshgrid(rho, phi, indexing="ij")
    e_r = np.stack([np.cos(pp), np.sin(pp)], axis=-1)
    pts = np.asarray(origin, dtype=float) + rr[..., None] * e_r
    inside = np.asarray(m.domain(pts[..., 0], pts[..., 1]))
    out = np.full(rr.shape, np.nan)
    if np.any(inside):
        g = mc.metric_batch(m, pts[inside], check=False)
        det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
        grr = np.einsum("ni,nij,nj->n", e_r[inside], g, e_r[inside])
        # det rounds to slightly negative at a cut radius, where it vanishes
        out[inside] = rr[inside] * np.sqrt(np.maximum(det / grr, 0.0))
    return out


def _chart_area(m, origin, chart_length, rp1, rp2, phi1, phi2, quad_n):
    rprime = np.linspace(rp1, rp2, quad_n + 1)
    phi = np.linspace(phi1, phi2, quad_n + 1)
    dens = _fill_trailing(_chart_radial_integrand(m, origin, chart_length, rprime, phi))
    return simpson_weights(rp1, rp2, quad_n) @ dens @ simpson_weights(phi1, phi2, quad_n)


def _synthetic_area(r1, r2, phi1, phi2, quad_n):
    r = np.linspace(r1, r2, quad_n + 1)
    dens = np.outer(r, np.ones(quad_n + 1))
    return simpson_weights(r1, r2, quad_n) @ dens @ simpson_weights(phi1, phi2, quad_n)


# --- checks ------------------------------------------------------------------

def check_gauss_classical(m: MetricField, frame, direction, rprime_grid, steps_per_unit=2000):
    """Unit g-speed of the radial exp image t -> exp(t v).

    The integrated tangent at t is D exp at t v applied to v, so its g-length
    covers both the curve speed and the image of the radial unit vector.
    """
    grid = np.asarray(rprime_grid, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.hypot(*direction)
    t_max = grid.max()
    curve = gd.geodesic_shoot(m, frame, direction, t_max, gd._n_steps_for(t_max, steps_per_unit))
    tangents = gd.hermite_eval(curve.param, curve.tangents, _accelerations(m, curve), grid)
    pts = gd.hermite_eval(curve.param, curve.points, curve.tangents, grid)
    g = mc.metric_batch(m, pts, check=False)
    speed = np.sqrt(np.einsum("ni,nij,nj->n", tangents, g, tangents))
    residual = max(np.abs(speed - 1.0).max(), np.abs(curve.g_speed - 1.0).max())
    return CheckRecord(
        "gauss_classical", "radial exp images have unit g-speed (classical Gauss lemma)",
        residual, TOL_GEODESIC,
    )


def _accelerations(m, curve):
    gam = mc.christoffel_batch(m, curve.points, check=False)
    return -np.einsum("nkij,ni,nj->nk", gam, curve.tangents, curve.tangents)


def check_segment_volume(p: dd.RadialProfile, m: MetricField, r_interval, phi_interval,
                         quad_n=512, chart_length=None):
    """Euclidean area of a synthetic annular segment vs Riemannian area of its image."""
    r1, r2 = map(float, r_interval)
    phi1, phi2 = map(float, phi_interval)
    if r1 < 0 or r2 > p.r_max or r1 > r2:
        raise RangeError(f"radial interval [{r1}, {r2}] not inside [0, {p.r_max}]")
    if chart_length is None:
        chart_length = dd.chart_length_profile(m)
    lhs = _synthetic_area(r1, r2, phi1, phi2, quad_n)
    rp1, rp2 = (float(v) for v in p.rprime([r1, r2]))
    rhs = _chart_area(m, p.origin, chart_length, rp1, rp2, phi1, phi2, quad_n)
    residual = 0.0 if lhs == rhs == 0.0 else abs(lhs - rhs) / abs(rhs)
    return CheckRecord(
        "segment_volume", "synthetic segment area equals Riemannian area of its image",
        residual, TOL_VOLUME,
        details={"lhs": lhs, "rhs": rhs, "r": [r1, r2], "phi": [phi1, phi2]},
    )


def check_total_volume(p: dd.RadialProfile, m: MetricField, quad_n=512, chart_length=None):
    if chart_length is None:
        chart_length = dd.chart_length_profile(m)
    lhs = np.pi * p.r_max ** 2
    rhs = _chart_area(m, p.origin, chart_length, 0.0, float(p.r_prime[-1]), 0.0, 2 * np.pi, quad_n)
    return CheckRecord(
        "total_volume", "pi r_max^2 equals the Riemannian area of the chart image",
        abs(lhs - rhs) / rhs, TOL_VOLUME,
        details={"lhs": lhs, "rhs": rhs, "r_max": p.r_max},
    )


def standard_bump(rho):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inside = rho < 1.0
    out[inside] = np.exp(1.0 / (rho[inside] ** 2 - 1.0))
    return out


def mollifier_integral(p: dd.RadialProfile, m: MetricField, q, eps, chart_length, bump=standard_bump,
                       n_r=16, n_phi=32, steps_per_unit=2000):
    """Integral of the eps-scaled bump (normal coordinates at q) against the image of
    Lebesgue measure under Theta.

    Pulled back to normal coordinates z at q, the image measure has density
    |det D(Theta^-1 o exp_q)(z)|; the Jacobian comes from central differences.
    The bump is normalised with the same quadrature rule, so a flat metric
    gives exactly 1.
    """
    rho = np.linspace(0.0, 1.0, n_r + 1)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    w = np.outer(simpson_weights(0.0, 1.0, n_r) * rho, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    bump_vals = np.repeat(bump(rho), n_phi)
    norm = w @ bump_vals
    rr, pp = np.meshgrid(rho, phi, indexing="ij")
    z = eps * np.column_stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel()])
    keep = (w * bump_vals) > 0
    z, weight = z[keep], (w * bump_vals)[keep] / norm
    delta = 1e-4 * eps
    shifts = [np.zeros(2), [delta, 0.0], [-delta, 0.0], [0.0, delta], [0.0, -delta]]
    zz = np.concatenate([z + s for s in shifts])
    frame_q = gd.normal_frame(m, q)
    frame_0 = gd.normal_frame(m, p.origin)
    try:
        x = gd.exp_map_batch(m, frame_q, zz, steps_per_unit)
        s = dd.theta_inverse_batch(p, frame_0, chart_length, x)
    except (DomainEscapeError, RangeError, mc.DomainError) as exc:
        raise SupportEscapeError(f"bump support of radius {eps} at {tuple(q)} leaves the chart: {exc}") from None
    parts = np.split(s, 5)
    d1 = (parts[1] - parts[2]) / (2 * delta)
    d2 = (parts[3] - parts[4]) / (2 * delta)
    jac = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    return float(weight @ jac)


def check_mollifier_delta(p: dd.RadialProfile, m: MetricField, q, bump=standard_bump,
                          eps_list=(0.2, 0.1, 0.05), chart_length=None, steps_per_unit=2000):
    """Returns the threshold record and the monotone-trend record."""
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if chart_length is None:
        chart_length = dd.chart_length_profile(m)
    values = [mollifier_integral(p, m, q, e, chart_length, bump, steps_per_unit=steps_per_unit)
              for e in eps_list]
    errs = [abs(v - 1.0) for v in values]
    rise = max([b - a for a, b in zip(errs, errs[1:])] + [0.0])
    label = f"({q[0]:g}, {q[1]:g})"
    details = {"eps": eps_list, "I": values, "abs_error": errs}
    return (
        CheckRecord(f"mollifier_delta{label}", "normalised bump mass tends to 1 under the exterior volume",
                    errs[-1], TOL_MOLLIFIER, details=details),
        CheckRecord(f"mollifier_trend{label}", "|I(eps) - 1| does not grow as eps shrinks",
                    rise, TREND_NOISE, details=details),
    )


def check_kappa_gauge(m: MetricField, k: dd.KappaField, sample_n=500, seed=0, radius=None):
    """max ||kappa kappa^T - g^-1|| over random chart points."""
    if radius is None:
        radius = 0.95 * min(m.domain_radius, 3.0)
    rng = np.random.default_rng(seed)
    rho = radius * np.sqrt(rng.uniform(0.0, 1.0, sample_n))
    ang = rng.uniform(0.0, 2 * np.pi, sample_n)
    pts = np.asarray(k.origin) + np.column_stack([rho * np.cos(ang), rho * np.sin(ang)])
    residual = 0.0
    for q in pts:
        kap = dd.kappa_matrix(k, q)
        residual = max(residual, np.abs(kap @ kap.T - mc.inverse_metric_at(m, q)).max())
    return CheckRecord(
        "kappa_gauge", "kappa kappa^T equals the inverse metric",
        residual, TOL_ODE, details={"samples": sample_n},
    )


def check_kappa_not_diagonal(m: MetricField, k: dd.KappaField, q=(0.4, 0.3)):
    """In polar coordinates kappa is not the componentwise root of the inverse metric.

    The residual is how far the separation falls short of ``MIN_SEPARATION``,
    so the record passes exactly when the two matrices differ.
    """
    q = np.asarray(q, dtype=float)
    kap_polar = dd.kappa_polar(k, q)
    offset = q - np.asarray(k.origin)
    rho = np.hypot(*offset)
    c, s = offset / rho
    # contravariant change to polar components: v_polar = J v_cart
    jac = np.array([[c, s], [-s / rho, c / rho]])
    ginv_polar = jac @ mc.inverse_metric_at(m, q) @ jac.T
    diagonal_root = np.diag(np.sqrt(np.diag(ginv_polar)))
    separation = float(np.abs(kap_polar - diagonal_root).max())
    kap = dd.kappa_matrix(k, q)
    w, v = np.linalg.eigh(mc.inverse_metric_at(m, q))
    sym_root = v @ np.diag(np.sqrt(w)) @ v.T
    return CheckRecord(
        "kappa_polar_not_diagonal", "kappa in polar coordinates is not the diagonal solution",
        max(0.0, MIN_SEPARATION - separation), 0.0,
        details={
            "point": q.tolist(),
            "separation": separation,
            "kappa_polar": kap_polar.tolist(),
            "diagonal_root": diagonal_root.tolist(),
            "cartesian_distance_to_symmetric_root": float(np.abs(kap - sym_root).max()),
        },
    )


def check_transport(m: MetricField, frame, t_max, directions=(0.0, 2.1, 4.2), steps_per_unit=2000):
    """A g-orthonormal frame transported along several radial geodesics stays orthonormal."""
    ang = np.asarray(directions, dtype=float)
    k = len(ang)
    n = gd._n_steps_for(t_max, steps_per_unit)
    u0 = frame.to_chart(np.column_stack([np.cos(ang), np.sin(ang)]))
    hist = gd.integrate_batch(m, np.tile(frame.origin, (k, 1)), u0, t_max / n, n,
                              transported=np.tile(frame.basis.T, (k, 1, 1)))
    pts = hist[:, :, :2].reshape(-1, 2)
    w = hist[:, :, 4:].reshape(-1, 2, 2)
    g = mc.metric_batch(m, pts, check=False)
    gram = np.einsum("nai,nij,nbj->nab", w, g, w)
    return CheckRecord(
        "parallel_transport", "parallel transport preserves g-inner products of a frame",
        np.abs(gram - np.eye(2)).max(), TOL_ODE,
    )


def check_normal_volume(m: MetricField, frame, p_g, rprime_grid, steps_per_unit=2000):
    grid = np.asarray(rprime_grid, dtype=float)
    measured = gd.normal_volume_profile(m, frame, (1.0, 0.0), grid, steps_per_unit=steps_per_unit)
    residual = np.abs(measured - p_g(grid)).max()
    return CheckRecord(
        "normal_volume_element", "Jacobi-field volume element matches the radial profile g(r')",
        residual, TOL_NORMAL_VOLUME,
    )


def check_radial_isometry(p: dd.RadialProfile, frame, r_grid, direction=(0.6, 0.8), steps_per_unit=2000):
    """Theta maps rays onto geodesics, and its radial g-speed equals the slip.

    The g-speed of r -> Theta(r v) = exp(r'(r) v) is the unit geodesic speed
    times dr'/dr of the tabulated profile; the slip comes from the ODE
    right-hand side, so the two are computed independently.
    """
    m = p.metric
    v = np.asarray(direction, dtype=float)
    v = v / np.hypot(*v)
    r = np.asarray(r_grid, dtype=float)
    rps = p.rprime(r)
    t_max = rps.max() * (1 + 1e-9)
    trace = gd.geodesic_shoot(m, frame, v, t_max, gd._n_steps_for(t_max, steps_per_unit))
    tangents = gd.hermite_eval(trace.param, trace.tangents, _accelerations(m, trace), rps)
    on_trace = gd.hermite_eval(trace.param, trace.points, trace.tangents, rps)
    g = mc.metric_batch(m, on_trace, check=False)
    unit = np.sqrt(np.einsum("ni,nij,nj->n", tangents, g, tangents))
    speed = unit * p._rprime.derivative(r)
    ratio_err = np.abs(speed / dd.differential_slip(p, r) - 1.0).max()
    img = dd.theta_map_batch(p, frame, r[:, None] * v, steps_per_unit)
    trace_err = np.abs(on_trace - img).max()
    return CheckRecord(
        "radial_isometry", "Theta maps rays to geodesics with radial g-speed equal to the slip",
        max(ratio_err, trace_err), TOL_GEODESIC,
        details={"speed_over_slip_error": ratio_err, "trace_distance": trace_err},
    )


def check_angular_isometry(p: dd.RadialProfile, frame, chart_length, r, n_samples=33,
                           steps_per_unit=2000):
    """Renormalised transport of a Euclidean unit-speed circle of radius r is a
    g-unit-speed circle of chart radius rho(r'(r)), traversed with dt/ds = f(r')/r."""
    rp = float(p.rprime(r))
    circumferential = rp * float(p.g(rp))

    def circle(s):
        return r * np.column_stack([np.cos(s / r), np.sin(s / r)])

    s_max = np.pi * r
    curve = dd.renormalized_transport(p, frame, circle, s_max, n_samples, steps_per_unit=steps_per_unit)
    offset = curve.points - np.asarray(p.origin)
    rho_err = np.abs(np.hypot(offset[:, 0], offset[:, 1]) - chart_length(rp)).max()
    s = np.linspace(0.0, s_max, n_samples)
    rate_err = np.abs(curve.param - s * circumferential / r).max() / curve.param[-1]
    speed_err = np.abs(curve.g_speed - 1.0).max()
    return CheckRecord(
        "angular_isometry", "renormalised transport sends unit-speed circles to g-unit-speed circles",
        max(rho_err, rate_err, speed_err), TOL_GEODESIC,
        details={"radius_error": rho_err, "rate_error": rate_err, "speed_error": speed_err},
    )


# closed forms per warping profile: projection radius of exp, and r'(r), rhat(r) of Theta
CLOSED_FORMS = {
    "flat": {"exp": lambda t: t, "rprime": lambda r: r, "rhat": lambda r: r},
    "sin": {
        "exp": np.sin,
        "rprime": lambda r: np.arccos(1.0 - 0.5 * r * r),
        "rhat": lambda r: r * np.sqrt(1.0 - 0.25 * r * r),
    },
    "sinh": {
        "exp": np.sinh,
        "rprime": lambda r: np.arccosh(1.0 + 0.5 * r * r),
        "rhat": lambda r: r * np.sqrt(1.0 + 0.25 * r * r),
    },
}


def check_exp_closed_form(length: dd.LengthProfile, profile, t_grid):
    exact = CLOSED_FORMS[profile]["exp"]
    err = np.abs(length(t_grid) - exact(t_grid)).max()
    return CheckRecord("exp_closed_form", "length-preserving radial solve reproduces the closed form",
                       err, TOL_ODE)


def check_exp_quadrature(length: dd.LengthProfile, g_rr, rhat_grid):
    """Independent route: r'(rhat) as the quadrature of sqrt(g_rr)."""
    rprime = np.array([quad(lambda s: np.sqrt(g_rr(s)), 0.0, rh, epsabs=1e-13, epsrel=1e-13)[0]
                       for rh in rhat_grid])
    err = np.abs(length(rprime) - rhat_grid).max()
    return CheckRecord("exp_quadrature", "radial solve agrees with the arc-length quadrature",
                       err, TOL_ODE)


def check_distortion_closed_form(p: dd.RadialProfile, profile, r_grid):
    forms = CLOSED_FORMS[profile]
    err_rp = np.abs(p.rprime(r_grid) - forms["rprime"](r_grid)).max()
    err_rh = np.abs(p.rhat(r_grid) - forms["rhat"](r_grid)).max()
    return CheckRecord("distortion_closed_form", "volume-preserving radial solve reproduces the closed form",
                       max(err_rp, err_rh), TOL_ODE, details={"rprime": err_rp, "rhat": err_rh})


def separable_rprime(g, r, rprime_hi):
    """r'(r) from the separable form: integral_0^r' s g(s) ds = r^2 / 2."""
    def area(x):
        return quad(lambda s: s * g(s), 0.0, x, epsabs=1e-14, epsrel=1e-13)[0] - 0.5 * r * r

    if r == 0.0:
        return 0.0
    return brentq(area, 0.0, rprime_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def check_distortion_separable(p: dd.RadialProfile, r_grid):
    hi = float(p.r_prime[-1])
    oracle = np.array([separable_rprime(p.g, r, hi) for r in r_grid])
    err = np.abs(p.rprime(r_grid) - oracle).max()
    r1 = float(r_grid[len(r_grid) // 2])
    rp1 = separable_rprime(p.g, r1, hi)
    slip_err = abs(float(dd.differential_slip(p, r1)) - r1 / (rp1 * float(p.g(rp1))))
    return CheckRecord("distortion_separable", "RK4 radial solve agrees with the separable-ODE quadrature",
                       max(err, slip_err), TOL_ODE, details={"rprime": err, "slip": slip_err})


def check_slip_origin(p: dd.RadialProfile):
    err = abs(float(dd.differential_slip(p, 1e-6)) - 1.0)
    return CheckRecord("slip_origin", "differential slip tends to 1 at the origin", err, TOL_SLIP_ORIGIN)


def check_inverse_profile(p: dd.RadialProfile, n=100):
    r = np.linspace(0.0, 0.99 * p.rhat_limit, n)
    err = np.abs(dd.inverse_profile(p, p.rhat(r)) - r).max()
    return CheckRecord("inverse_profile", "inverse profile composed with the forward map is the identity",
                       err, TOL_ODE)


def check_polar_pullback(polar: MetricField, cartesian: MetricField, n=50, seed=0):
    rng = np.random.default_rng(seed)
    err = 0.0
    for rh, ph in zip(rng.uniform(0.05, 0.95, n), rng.uniform(0.0, 2 * np.pi, n)):
        err = max(err, np.abs(mc.polar_pullback(cartesian, rh, ph) - mc.metric_at(polar, (rh, ph))).max())
    return CheckRecord("polar_pullback", "polar metric is the pullback of the Cartesian chart metric",
                       err, TOL_ODE)


def _error_record(name, exc):
    rec = CheckRecord(name, "engine error", np.inf, 0.0)
    rec.details["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def run_suite(spec, resolution: Resolution = Resolution()) -> VerificationReport:
    """Run every applicable check for a manifold spec (mapping or MetricField)."""
    m = spec if isinstance(spec, MetricField) else mc.metric_from_spec(spec)
    res = resolution
    checks: list[CheckRecord] = []
    params = asdict(res)

    def run(name, fn, *args, **kwargs):
        try:
            start = time.perf_counter()
            out = fn(*args, **kwargs)
            elapsed = (time.perf_counter() - start) * 1e3
        except (GeometryError, ValueError, ArithmeticError) as exc:
            checks.append(_error_record(name, exc))
            return
        for rec in out if isinstance(out, tuple) else (out,):
            rec.runtime_ms = elapsed
            checks.append(rec)

    rs = m.radial_symmetry
    if rs is None:
        return VerificationReport(m.name, [], params)
    steps = res.steps
    try:
        length = dd.exponential_profile(m, steps)
        profile = dd.distortion_profile(m, steps, steps)
    except (GeometryError, ValueError) as exc:
        return VerificationReport(m.name, [_error_record("radial_profiles", exc)], params)

    t_hi = min(1.5, float(length.boundary))
    t_grid = np.linspace(0.0, t_hi, res.grid)
    run("exp_closed_form", check_exp_closed_form, length, rs.profile, t_grid)
    g_rr, _ = dd.projection_component(m)
    rh_top = float(length(t_hi))
    run("exp_quadrature", check_exp_quadrature, length, g_rr, np.linspace(0.0, 0.95 * rh_top, 20))
    r_hi = min(1.4, 0.99 * profile.rhat_limit)
    r_grid = np.linspace(0.0, r_hi, res.grid)
    run("distortion_closed_form", check_distortion_closed_form, profile, rs.profile, r_grid)
    run("distortion_separable", check_distortion_separable, profile, np.linspace(0.0, r_hi, 15))
    run("slip_origin", check_slip_origin, profile)
    run("inverse_profile", check_inverse_profile, profile, res.grid)

    if m.polar:
        run("polar_pullback", check_polar_pullback, m, mc.sphere_projection())
        return VerificationReport(m.name, checks, params)

    frame = gd.normal_frame(m, profile.origin)
    chart_length = dd.chart_length_profile(m, steps)
    rp_hi = min(1.4, 0.9 * rs.rprime_end)
    run("gauss_classical", check_gauss_classical, m, frame, (0.6, 0.8),
        np.linspace(0.0, rp_hi, res.grid), steps)
    run("parallel_transport", check_transport, m, frame, rp_hi, steps_per_unit=steps)
    run("normal_volume_element", check_normal_volume, m, frame, rs.volume_element,
        np.linspace(0.05, rp_hi, 20), steps)
    run("radial_isometry", check_radial_isometry, profile, frame,
        np.linspace(0.05, 0.9 * r_hi, 10), steps_per_unit=steps)
    run("angular_isometry", check_angular_isometry, profile, frame, chart_length, 0.6 * r_hi,
        steps_per_unit=steps)
    run("total_volume", check_total_volume, profile, m, res.quad_n, chart_length)
    rng = np.random.default_rng(res.seed)
    for i in range(3):
        r1, r2 = np.sort(rng.uniform(0.0, 0.99 * profile.r_max, 2))
        a1, a2 = np.sort(rng.uniform(0.0, 2 * np.pi, 2))
        run(f"segment_volume[{i}]", check_segment_volume, profile, m, (r1, r2), (a1, a2),
            res.quad_n, chart_length)
    kappa = dd.KappaField(m, profile.origin)
    run("kappa_gauge", check_kappa_gauge, m, kappa, 500, res.seed)
    run("kappa_polar_not_diagonal", check_kappa_not_diagonal, m, kappa)
    q_off = (min(0.5, 0.5 * m.domain_radius), 0.0)
    for q in ((0.0, 0.0), q_off):
        run(f"mollifier{q}", check_mollifier_delta, profile, m, q,
            chart_length=chart_length, steps_per_unit=steps)
    return VerificationReport(m.name, checks, params)
