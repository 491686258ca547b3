import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from geodistort import distortion as dd
from geodistort import geodesic as gd
from geodistort import metric as mc
from geodistort.errors import RangeError, SingularityError, StepError
from geodistort.interp import MonotoneCubic, fritsch_carlson


def lambert_inverse(rhat):
    """Synthetic radius of chart radius rhat on the hemisphere chart (equal-area projection)."""
    return np.sqrt(2.0) * np.sqrt(1.0 - np.sqrt(1.0 - rhat**2))


# --- monotone interpolation --------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 5.0)), min_size=2, max_size=12))
def test_monotone_cubic_stays_monotone(increments):
    y = np.concatenate([[0.0], np.cumsum(increments)])
    x = np.arange(len(y), dtype=float)
    f = MonotoneCubic(x, y)
    fine = np.linspace(0, x[-1], 400)
    vals = f(fine)
    assert np.all(np.diff(vals) >= -1e-12)
    assert np.allclose(f(x), y, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0))
def test_monotone_cubic_inverse(u):
    x = np.linspace(0, 2, 9)
    f = MonotoneCubic(x, x**3, 3 * x**2)
    v = u * 8.0
    assert f(f.inverse(v)) == pytest.approx(v, abs=1e-12)


def test_monotone_cubic_exact_slopes_reproduce_cubic():
    x = np.linspace(0, 1, 6)
    f = MonotoneCubic(x, x**3 + x, 3 * x**2 + 1)
    s = np.linspace(0, 1, 50)
    assert np.allclose(f(s), s**3 + s, atol=1e-14)
    with pytest.raises(RangeError):
        f(1.5)
    with pytest.raises(RangeError):
        f.inverse(-0.1)


def test_fritsch_carlson_limits_overshoot():
    slopes = fritsch_carlson([0, 1, 2], [0, 0, 1], [np.inf, 5.0, 5.0])
    assert slopes[0] == 0.0 and slopes[1] == 0.0
    assert slopes[2] <= 3.0
    with pytest.raises(ValueError):
        fritsch_carlson([0, 1], [1, 0], [0, 0])


# --- length-preserving (exponential) profile ---------------------------------

def test_sphere_exponential_profile_is_sine(sphere):
    length = dd.exponential_profile(sphere)
    grid = np.linspace(0.0, 1.5, 100)
    assert np.abs(length(grid) - np.sin(grid)).max() < 1e-8
    assert length.boundary == pytest.approx(np.pi / 2, abs=1e-12)
    assert length.rhat_end == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(SingularityError):
        length(1.6)


def test_hyperbolic_exponential_profile(hyperbolic):
    length = dd.exponential_profile(hyperbolic)
    assert float(length(1.0)) == pytest.approx(np.sinh(1.0), abs=1e-10)
    with pytest.raises(RangeError):
        length(3.5)


def test_euclidean_exponential_profile():
    length = dd.exponential_profile(mc.euclidean(2.0))
    grid = np.linspace(0, 2, 33)
    assert np.abs(length(grid) - grid).max() < 1e-12


def test_length_profile_against_quadrature():
    def g_rr(r):
        return 1.0 + r**2

    length = dd.solve_length_preserving(g_rr, rhat_max=1.5)
    for rh in (0.2, 0.8, 1.4):
        rp = quad(lambda s: np.sqrt(g_rr(s)), 0, rh)[0]
        assert float(length(rp)) == pytest.approx(rh, abs=1e-10)
    with pytest.raises(StepError):
        dd.solve_length_preserving(g_rr, 1.0, n_steps=1)
    with pytest.raises(ValueError):
        dd.solve_length_preserving(g_rr)


# --- volume-preserving profile -----------------------------------------------

def test_sphere_distortion_closed_form(sphere_profile):
    r = np.linspace(0.0, 1.4, 100)
    assert np.abs(sphere_profile.rhat(r) - r * np.sqrt(1 - r**2 / 4)).max() < 1e-8
    assert np.abs(sphere_profile.rprime(r) - np.arccos(1 - r**2 / 2)).max() < 1e-8
    assert sphere_profile.r_max == pytest.approx(np.sqrt(2), abs=1e-8)


def test_sphere_inverse_profile(sphere_profile):
    rhat = np.linspace(0.0, 0.999, 60)
    assert np.abs(dd.inverse_profile(sphere_profile, rhat) - lambert_inverse(rhat)).max() < 1e-8
    assert float(dd.inverse_profile(sphere_profile, 1.0)) == pytest.approx(np.sqrt(2), abs=1e-8)
    assert float(dd.inverse_profile(sphere_profile, np.sqrt(3) / 2)) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(RangeError):
        dd.inverse_profile(sphere_profile, 1.01)


def test_sphere_slip(sphere_profile):
    assert float(dd.differential_slip(sphere_profile, 1.0)) == pytest.approx(2 / np.sqrt(3), abs=1e-8)
    assert float(dd.differential_slip(sphere_profile, 1e-7)) == pytest.approx(1.0, abs=1e-6)
    r = np.linspace(0.1, 1.3, 13)
    assert np.allclose(dd.differential_slip(sphere_profile, r), r / np.sin(np.arccos(1 - r**2 / 2)),
                       atol=1e-8)


def test_full_sphere_reaches_cut_radius(full_sphere_profile):
    p = full_sphere_profile
    assert p.r_max == pytest.approx(2.0, abs=1e-8)
    assert p.r_prime[-1] == pytest.approx(np.pi, abs=1e-12)
    r = np.linspace(0, 1.99, 50)
    assert np.abs(p.rprime(r) - np.arccos(1 - r**2 / 2)).max() < 1e-7
    assert p.rhat_limit == pytest.approx(np.sqrt(2), abs=1e-8)


def test_hyperbolic_distortion(hyperbolic_profile):
    r = np.linspace(0.0, 1.4, 100)
    assert np.abs(hyperbolic_profile.rhat(r) - r * np.sqrt(1 + r**2 / 4)).max() < 1e-8
    assert float(hyperbolic_profile.rhat(1.0)) == pytest.approx(1.118034, abs=1e-6)


def test_euclidean_distortion_is_identity():
    p = dd.distortion_profile(mc.euclidean(2.0))
    r = np.linspace(0, 1.9, 20)
    assert np.abs(p.rprime(r) - r).max() < 1e-12
    assert np.allclose(dd.differential_slip(p, r), 1.0, atol=1e-12)


def test_separable_oracle_for_a_generic_profile():
    def g(rp):
        return 1.0 / (1.0 + rp * rp)

    p = dd.solve_volume_preserving(g, r_span=1.5)
    for r in (0.3, 0.9, 1.5):
        # integral_0^r' s / (1 + s^2) ds = log(1 + r'^2) / 2 = r^2 / 2
        assert float(p.rprime(r)) == pytest.approx(np.sqrt(np.expm1(r * r)), abs=1e-9)


def test_unbounded_slip_without_end_radius():
    with pytest.raises(SingularityError):
        dd.solve_volume_preserving(lambda rp: np.cos(rp), r_span=3.0)


def test_profile_range_errors(sphere_profile):
    with pytest.raises(RangeError):
        sphere_profile.rprime(1.5)
    with pytest.raises(RangeError):
        sphere_profile.rprime(-0.1)
    with pytest.raises(RangeError):
        dd.differential_slip(sphere_profile, sphere_profile.r_max)


def test_profile_csv(sphere_profile):
    rows = list(csv.reader(io.StringIO(sphere_profile.to_csv())))
    assert rows[0] == ["r", "r_prime", "r_hat", "slip", "g"]
    first = [float(v) for v in rows[1]]
    assert first == [0.0, 0.0, 0.0, 1.0, 1.0]
    assert all(f"{float(v):.10g}" == v for v in rows[50])


# --- Theta, kappa, renormalised transport ------------------------------------

def test_theta_map_on_sphere(sphere_profile, sphere_frame):
    p = dd.theta_map(sphere_profile, sphere_frame, (1.0, 0.0))
    assert p.x == pytest.approx(np.sqrt(3) / 2, abs=1e-10) and p.y == 0.0
    s = np.array([[0.3, -0.4], [-0.9, 0.6], [0.0, 0.0]])
    img = dd.theta_map_batch(sphere_profile, sphere_frame, s)
    r = np.hypot(*s.T)
    assert np.allclose(np.hypot(*img.T), r * np.sqrt(1 - r**2 / 4), atol=1e-10)
    assert np.allclose(img[:2] / np.hypot(*img[:2].T)[:, None], s[:2] / r[:2, None], atol=1e-12)


def test_theta_inverse_is_lambert(sphere_profile, sphere_frame, sphere_chart_length):
    pts = np.array([[0.1, 0.2], [-0.5, 0.6], [0.0, -0.95]])
    pre = dd.theta_inverse_batch(sphere_profile, sphere_frame, sphere_chart_length, pts)
    rhat = np.hypot(*pts.T)
    assert np.allclose(np.hypot(*pre.T), lambert_inverse(rhat), atol=1e-9)
    back = dd.theta_map_batch(sphere_profile, sphere_frame, pre)
    assert np.allclose(back, pts, atol=1e-9)


def test_theta_rejects_points_beyond_r_max(sphere_profile, sphere_frame):
    with pytest.raises(RangeError):
        dd.theta_map(sphere_profile, sphere_frame, (1.2, 0.8))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.95), st.floats(0, 2 * np.pi))
def test_kappa_gauge_identity(rho, phi):
    m = mc.sphere_projection()
    k = dd.KappaField(m, (0.0, 0.0))
    q = rho * np.array([np.cos(phi), np.sin(phi)])
    kap = dd.kappa_matrix(k, q)
    assert np.abs(kap @ kap.T - mc.inverse_metric_at(m, q)).max() < 1e-12


def test_kappa_values(sphere):
    k = dd.KappaField(sphere, (0.0, 0.0))
    assert np.array_equal(dd.kappa_matrix(k, (0.0, 0.0)), np.eye(2))
    assert np.allclose(dd.kappa_matrix(k, (0.6, 0.0)), np.diag([0.8, 1.0]), atol=1e-15)
    assert np.allclose(dd.kappa_apply(k, (0.6, 0.0), (1.0, 1.0)), (0.8, 1.0), atol=1e-15)
    # polar components at chart radius 0.5: radial factor sqrt(1 - 0.25), angular factor 1
    assert np.allclose(dd.kappa_polar(k, (0.4, 0.3)), np.diag([np.sqrt(0.75), 1.0]), atol=1e-14)
    with pytest.raises(ValueError):
        dd.kappa_matrix(dd.KappaField(mc.sphere_polar(), (0.0, 0.0)), (0.5, 0.1))


def test_kappa_for_warped_metric(hyperbolic):
    k = dd.KappaField(hyperbolic, (0.0, 0.0))
    q = np.array([1.0, 0.5])
    kap = dd.kappa_matrix(k, q)
    assert np.abs(kap @ kap.T - mc.inverse_metric_at(hyperbolic, q)).max() < 1e-13


def test_renormalised_circle(sphere_profile, sphere_frame, sphere_chart_length):
    r = 0.8
    rp = float(sphere_profile.rprime(r))

    def circle(s):
        return r * np.column_stack([np.cos(s / r), np.sin(s / r)])

    curve = dd.renormalized_transport(sphere_profile, sphere_frame, circle, np.pi * r, n_samples=41,
                                      steps_per_unit=1000)
    rho = np.hypot(*curve.points.T)
    assert np.abs(rho - np.sin(rp)).max() < 1e-9
    s = np.linspace(0, np.pi * r, 41)
    # g-length of the image circle grows at rate sin(r') / r
    assert np.abs(curve.param - s * np.sin(rp) / r).max() < 1e-8
    assert np.abs(curve.g_speed - 1).max() < 1e-12


def test_renormalised_ray_is_geodesic(sphere_profile, sphere_frame):
    curve = dd.renormalized_transport(sphere_profile, sphere_frame,
                                      lambda s: np.column_stack([s, 0 * s]), 1.2, n_samples=101,
                                      steps_per_unit=1000)
    # the image of the ray is the radial geodesic with t = r'(s)
    s = np.linspace(0, 1.2, 101)
    assert np.abs(curve.param - np.arccos(1 - s**2 / 2)).max() < 1e-8
    assert np.abs(curve.points[:, 0] - np.sin(curve.param)).max() < 1e-8
    with pytest.raises(StepError):
        dd.renormalized_transport(sphere_profile, sphere_frame, lambda s: s, 1.0, n_samples=2)
