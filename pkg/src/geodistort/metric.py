"""2D Riemannian metrics in a chart and pointwise tensor algebra.

Every metric is evaluated in vectorised form: ``g(x, y)`` takes broadcastable
coordinate arrays and returns an array of shape ``x.shape + (2, 2)``.  The
public single-point operations (:func:`metric_at`, :func:`christoffel_at`, ...)
are thin wrappers around the batched helpers, which the integrators use
directly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, SingularMetricError, SpecError

FD_REL_STEP = 1e-5


class ChartPoint(NamedTuple):
    x: float
    y: float


CONTRAVARIANT = "contravariant"
COVARIANT = "covariant"


@dataclass(frozen=True)
class TangentTuple:
    """Component tuple of a vector (contravariant) or covector (covariant)."""

    base: ChartPoint
    components: tuple[float, float]
    variance: str = CONTRAVARIANT

    def __post_init__(self):
        if self.variance not in (CONTRAVARIANT, COVARIANT):
            raise ValueError(f"unknown variance {self.variance!r}")
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 2 or not all(np.isfinite(comps)):
            raise ValueError("tangent components must be two finite reals")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "base", ChartPoint(*map(float, self.base)))


# --- warped-product profiles ------------------------------------------------
#
# A warped metric ds^2 = dr^2 + f(r)^2 dphi^2 is stored in normal (Cartesian)
# coordinates, where g = q I + (1 - q) x x^T / r^2 with q = (f(r)/r)^2.  The
# coefficient (1 - q)/r^2 cancels catastrophically near r = 0, so below
# _SERIES_RADIUS it comes from its Taylor series.

_SERIES_RADIUS = 0.5
_SERIES_TERMS = 14


# Horner coefficients in r^2, highest power first
_SIN_DEFECT = np.array(
    [(-1) ** k * 2.0 ** (2 * k - 1) / factorial(2 * k) for k in range(_SERIES_TERMS, 1, -1)]
)
_SINH_DEFECT = np.array(
    [-(2.0 ** (2 * k - 1)) / factorial(2 * k) for k in range(_SERIES_TERMS, 1, -1)]
)


_DEFECT_COEFFS = {"sin": _SIN_DEFECT, "sinh": _SINH_DEFECT}
_FPRIME = {"flat": np.ones_like, "sin": np.cos, "sinh": np.cosh}


def _sin_defect(r):
    return np.polyval(_SIN_DEFECT, r * r)


def _sinh_defect(r):
    return np.polyval(_SINH_DEFECT, r * r)


@dataclass(frozen=True)
class _Profile:
    f: Callable
    # radial metric component of the "projection" chart whose radius is f(r')
    projection_rr: Callable
    projection_end: float
    defect_series: Callable | None


PROFILES = {
    "flat": _Profile(
        f=lambda r: np.asarray(r, dtype=float),
        projection_rr=lambda rh: np.ones_like(np.asarray(rh, dtype=float)),
        projection_end=np.inf,
        defect_series=None,
    ),
    "sin": _Profile(
        f=np.sin,
        projection_rr=lambda rh: 1.0 / (1.0 - np.asarray(rh, dtype=float) ** 2),
        projection_end=1.0,
        defect_series=_sin_defect,
    ),
    "sinh": _Profile(
        f=np.sinh,
        projection_rr=lambda rh: 1.0 / (1.0 + np.asarray(rh, dtype=float) ** 2),
        projection_end=np.inf,
        defect_series=_sinh_defect,
    ),
}

# cut radius of each profile (first zero of f after the origin)
PROFILE_CUT = {"flat": np.inf, "sin": np.pi, "sinh": np.inf}


@dataclass(frozen=True)
class RadialSymmetry:
    """Radial structure of a metric that is rotationally symmetric about the chart origin.

    ``profile`` names the warping function f with ds^2 = dr'^2 + f(r')^2 dphi^2
    and ``rprime_end`` is the radial length at which the chart (or the
    manifold) ends.
    """

    profile: str
    rprime_end: float

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown radial profile {self.profile!r}")

    def f(self, rprime):
        return PROFILES[self.profile].f(np.asarray(rprime, dtype=float))

    def volume_element(self, rprime):
        """sqrt(det g) in normal coordinates, f(r')/r', with value 1 at r' = 0."""
        r = np.asarray(rprime, dtype=float)
        prof = PROFILES[self.profile]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, prof.f(r) / np.where(r > 0, r, 1.0), 1.0)
        return out

    def projection_rr(self, rhat):
        return PROFILES[self.profile].projection_rr(rhat)

    @property
    def projection_end(self):
        return PROFILES[self.profile].projection_end


@dataclass(frozen=True)
class MetricField:
    """A Riemannian metric on a 2D chart.

    ``g`` and ``domain`` are vectorised over coordinate arrays.  ``christoffel``
    optionally supplies analytic symbols ``G[..., k, i, j]``; otherwise they
    come from central finite differences of ``g``.
    """

    name: str
    g: Callable
    domain: Callable
    radial_symmetry: RadialSymmetry | None = None
    christoffel: Callable | None = None
    polar: bool = False
    domain_radius: float = np.inf
    meta: dict = field(default_factory=dict, compare=False)

    def radial_component(self, rho):
        """g_rr along the first chart axis, as a function of the chart radius."""
        rho = np.asarray(rho, dtype=float)
        return self.g(rho, np.zeros_like(rho))[..., 0, 0]


@dataclass(frozen=True)
class ChristoffelTensor:
    base: ChartPoint
    gamma: np.ndarray  # gamma[k, i, j] = Gamma^k_ij


# --- batched evaluation ------------------------------------------------------

def _split(points):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError("chart points need two coordinates")
    return pts[..., 0], pts[..., 1]


def check_domain(m: MetricField, points):
    x, y = _split(points)
    if not np.all(np.isfinite(x) & np.isfinite(y)):
        raise DomainError(f"non-finite chart point for metric {m.name!r}")
    inside = np.asarray(m.domain(x, y))
    if not np.all(inside):
        bad = np.asarray(points, dtype=float).reshape(-1, 2)[~inside.reshape(-1)][0]
        raise DomainError(f"point {tuple(bad)} outside the domain of {m.name!r}")


def metric_batch(m: MetricField, points, check=True):
    if check:
        check_domain(m, points)
    x, y = _split(points)
    return np.asarray(m.g(x, y), dtype=float)


def inverse_batch(g):
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if np.any(~(det > 0)):
        raise SingularMetricError("metric determinant is not positive")
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1] / det
    inv[..., 1, 1] = g[..., 0, 0] / det
    inv[..., 0, 1] = -g[..., 0, 1] / det
    inv[..., 1, 0] = -g[..., 1, 0] / det
    return inv


def volume_batch(m: MetricField, points, check=True):
    g = metric_batch(m, points, check)
    return np.sqrt(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0])


def fd_steps(points):
    return FD_REL_STEP * np.maximum(1.0, np.abs(np.asarray(points, dtype=float)))


def christoffel_batch(m: MetricField, points, fd_step=None, check=True):
    """Gamma^k_ij at every point, shape ``(..., 2, 2, 2)`` indexed [k, i, j]."""
    pts = np.asarray(points, dtype=float)
    if m.christoffel is not None and fd_step is None:
        if check:
            check_domain(m, pts)
        x, y = _split(pts)
        return np.asarray(m.christoffel(x, y), dtype=float)
    h = fd_steps(pts) if fd_step is None else np.broadcast_to(float(fd_step), pts.shape)
    # stencil[a] = pts + h e_0, pts - h e_0, pts + h e_1, pts - h e_1, pts
    stencil = np.broadcast_to(pts, (5,) + pts.shape).copy()
    stencil[0, ..., 0] += h[..., 0]
    stencil[1, ..., 0] -= h[..., 0]
    stencil[2, ..., 1] += h[..., 1]
    stencil[3, ..., 1] -= h[..., 1]
    gs = metric_batch(m, stencil, check)
    dg = np.stack(
        [(gs[0] - gs[1]) / (2.0 * h[..., 0, None, None]),
         (gs[2] - gs[3]) / (2.0 * h[..., 1, None, None])],
        axis=-3,
    )  # dg[..., l, i, j] = d_l g_ij
    ginv = inverse_batch(gs[4])
    # lowered[..., l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = (
        np.einsum("...ijl->...lij", dg)
        + np.einsum("...jli->...lij", dg)
        - dg
    )
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, lowered)


# --- single-point public operations -----------------------------------------

def metric_at(m: MetricField, p) -> np.ndarray:
    return metric_batch(m, np.asarray(p, dtype=float))


def inverse_metric_at(m: MetricField, p) -> np.ndarray:
    return inverse_batch(metric_at(m, p))


def volume_element_at(m: MetricField, p) -> float:
    return float(volume_batch(m, np.asarray(p, dtype=float)))


def christoffel_at(m: MetricField, p, fd_step=None) -> ChristoffelTensor:
    """Christoffel symbols at ``p``.

    Analytic symbols are used when the metric carries them and no explicit
    ``fd_step`` is requested; passing ``fd_step`` forces finite differences.
    """
    p = ChartPoint(*map(float, p))
    return ChristoffelTensor(p, christoffel_batch(m, np.asarray(p), fd_step))


def flat(m: MetricField, v: TangentTuple) -> TangentTuple:
    if v.variance != CONTRAVARIANT:
        raise ValueError("flat expects a contravariant tuple")
    comps = metric_at(m, v.base) @ np.asarray(v.components)
    return TangentTuple(v.base, tuple(comps), COVARIANT)


def sharp(m: MetricField, v: TangentTuple) -> TangentTuple:
    if v.variance != COVARIANT:
        raise ValueError("sharp expects a covariant tuple")
    comps = inverse_metric_at(m, v.base) @ np.asarray(v.components)
    return TangentTuple(v.base, tuple(comps), CONTRAVARIANT)


def inner(m: MetricField, p, u, v) -> float:
    return float(np.asarray(u) @ metric_at(m, p) @ np.asarray(v))


# --- built-in metrics --------------------------------------------------------

def euclidean(domain_radius=np.inf) -> MetricField:
    R = float(domain_radius)

    def g(x, y):
        shape = np.broadcast(x, y).shape
        return np.broadcast_to(np.eye(2), shape + (2, 2)).copy()

    def christoffel(x, y):
        return np.zeros(np.broadcast(x, y).shape + (2, 2, 2))

    return MetricField(
        name="euclidean",
        g=g,
        domain=lambda x, y: np.asarray(x) ** 2 + np.asarray(y) ** 2 < R * R,
        radial_symmetry=RadialSymmetry("flat", R),
        christoffel=christoffel,
        domain_radius=R,
    )


def _sphere_projection_g(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    w = 1.0 / (1.0 - x * x - y * y)
    g = np.empty(x.shape + (2, 2))
    g[..., 0, 0] = 1.0 + x * x * w
    g[..., 1, 1] = 1.0 + y * y * w
    g[..., 0, 1] = g[..., 1, 0] = x * y * w
    return g


def _sphere_projection_christoffel(x, y):
    # graph of z = sqrt(1 - x^2 - y^2): Gamma^k_ij = x^k g_ij
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    g = _sphere_projection_g(x, y)
    return np.stack([x[..., None, None] * g, y[..., None, None] * g], axis=-3)


def sphere_projection() -> MetricField:
    """Unit upper hemisphere in orthogonal projection onto the equatorial plane."""
    return MetricField(
        name="sphere_projection",
        g=_sphere_projection_g,
        domain=lambda x, y: np.asarray(x) ** 2 + np.asarray(y) ** 2 < 1.0,
        radial_symmetry=RadialSymmetry("sin", np.pi / 2),
        christoffel=_sphere_projection_christoffel,
        domain_radius=1.0,
    )


def sphere_polar() -> MetricField:
    """The projection chart in polar coordinates (rhat, phi)."""

    def g(rh, phi):
        rh, phi = np.broadcast_arrays(np.asarray(rh, dtype=float), np.asarray(phi, dtype=float))
        out = np.zeros(rh.shape + (2, 2))
        out[..., 0, 0] = 1.0 / (1.0 - rh * rh)
        out[..., 1, 1] = rh * rh
        return out

    return MetricField(
        name="sphere_polar",
        g=g,
        domain=lambda rh, phi: (np.asarray(rh) > 0) & (np.asarray(rh) < 1.0) & np.isfinite(phi),
        radial_symmetry=RadialSymmetry("sin", np.pi / 2),
        polar=True,
        domain_radius=1.0,
    )


def warped(profile: str, domain_radius=np.inf) -> MetricField:
    """ds^2 = dr^2 + f(r)^2 dphi^2 written in normal (Cartesian) coordinates."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    prof = PROFILES[profile]
    R = min(float(domain_radius), PROFILE_CUT[profile])

    def g(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        r2 = x * x + y * y
        r = np.sqrt(r2)
        if prof.defect_series is None:
            defect = np.zeros_like(r)
        else:
            small = r < _SERIES_RADIUS
            safe = np.where(small, 1.0, r)
            direct = (1.0 - (prof.f(safe) / safe) ** 2) / (safe * safe)
            defect = np.where(small, prof.defect_series(np.where(small, r, 0.0)), direct)
        q = 1.0 - defect * r2
        out = np.empty(x.shape + (2, 2))
        out[..., 0, 0] = q + defect * x * x
        out[..., 1, 1] = q + defect * y * y
        out[..., 0, 1] = out[..., 1, 0] = defect * x * y
        return out

    fprime = _FPRIME[profile]
    dseries = np.polyder(_DEFECT_COEFFS[profile]) if profile in _DEFECT_COEFFS else None

    def christoffel(x, y):
        # g = A I + D x x^T with A = 1 - D r^2; d = D'(r)/r
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        r2 = x * x + y * y
        D = np.zeros_like(r2)
        d = np.zeros_like(r2)
        if dseries is not None:
            r = np.sqrt(r2)
            small = r < _SERIES_RADIUS
            if np.any(small):
                rs = r2[small]
                D[small] = np.polyval(_DEFECT_COEFFS[profile], rs)
                d[small] = 2.0 * np.polyval(dseries, rs)
            big = ~small
            if np.any(big):
                rb = r[big]
                fb = prof.f(rb)
                ratio = fb / rb
                Db = (1.0 - ratio * ratio) / (rb * rb)
                D[big] = Db
                d[big] = (-2.0 * ratio * (fprime(rb) * rb - fb) / (rb * rb) - 2.0 * rb * Db) / rb ** 3
        A = 1.0 - D * r2
        a = -d * r2 - 2.0 * D
        X = np.stack([x, y], axis=-1)
        eye = np.eye(2)
        Xl = X[..., :, None, None]
        Xi = X[..., None, :, None]
        Xj = X[..., None, None, :]
        e = lambda v: v[..., None, None, None]
        low = (0.5 * e(a) * (Xi * eye[:, None, :] + Xj * eye[:, :, None] - Xl * eye)
               + e(0.5 * d) * Xl * Xi * Xj + e(D) * Xl * eye)
        # g^-1 = (I - D x x^T) / A
        proj = (Xl * low).sum(axis=-3)
        gam = low - e(D) * Xl * proj[..., None, :, :]
        return gam / e(A)

    names = {"flat": "flat", "sin": "sphere", "sinh": "hyperbolic"}
    return MetricField(
        name=f"warped_{names[profile]}",
        g=g,
        christoffel=christoffel,
        domain=lambda x, y: np.asarray(x) ** 2 + np.asarray(y) ** 2 < R * R,
        radial_symmetry=RadialSymmetry(profile, R),
        domain_radius=R,
        meta={"kind": "warped"},
    )


def polar_pullback(m: MetricField, rhat, phi) -> np.ndarray:
    """Metric of a Cartesian chart expressed in its polar coordinates (rhat, phi)."""
    c, s = np.cos(phi), np.sin(phi)
    jac = np.array([[c, -rhat * s], [s, rhat * c]])
    return jac.T @ metric_at(m, (rhat * c, rhat * s)) @ jac


# --- manifold spec files -----------------------------------------------------

BUILTINS = {
    "euclidean": euclidean,
    "sphere_projection": sphere_projection,
    "sphere_polar": sphere_polar,
}


def metric_from_spec(spec: dict) -> MetricField:
    """Build a metric from a manifold spec mapping (the JSON file contents)."""
    if not isinstance(spec, dict):
        raise SpecError("manifold spec must be a JSON object")
    kind = spec.get("kind", "builtin")
    radius = spec.get("domain_radius")
    if radius is not None:
        try:
            radius = float(radius)
        except (TypeError, ValueError):
            raise SpecError(f"domain_radius must be a number, got {radius!r}") from None
        if not radius > 0:
            raise SpecError("domain_radius must be positive")
    if kind == "builtin":
        which = spec.get("builtin")
        if which not in BUILTINS:
            raise SpecError(f"unknown builtin {which!r}; expected one of {sorted(BUILTINS)}")
        if which == "euclidean":
            m = euclidean(2.0 if radius is None else radius)
        else:
            m = BUILTINS[which]()
    elif kind == "warped":
        profile = spec.get("profile")
        if profile not in PROFILES:
            raise SpecError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
        default = np.pi if profile == "sin" else 3.0
        m = warped(profile, default if radius is None else radius)
    else:
        raise SpecError(f"unknown kind {kind!r}; expected 'builtin' or 'warped'")
    label = spec.get("name")
    if label:
        m = MetricField(
            name=str(label), g=m.g, domain=m.domain, radial_symmetry=m.radial_symmetry,
            christoffel=m.christoffel, polar=m.polar, domain_radius=m.domain_radius, meta=m.meta,
        )
    return m


def load_spec(path) -> tuple[dict, MetricField]:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec {path} is not valid JSON: {exc}") from None
    return spec, metric_from_spec(spec)
