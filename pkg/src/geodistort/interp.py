"""Monotone cubic Hermite interpolation with an exact inverse."""
from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import RangeError

_BISECT_ITER = 64


def fritsch_carlson(x, y, slopes):
    """Limit node slopes so the Hermite cubic stays monotone on increasing data.

    Non-finite slopes (e.g. an infinite derivative at a profile end) are
    replaced by the largest admissible value, three times the adjacent secant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.array(slopes, dtype=float)
    delta = np.diff(y) / np.diff(x)
    if np.any(delta < 0):
        raise ValueError("data must be non-decreasing")
    bad = ~np.isfinite(m)
    if np.any(bad):
        left = np.concatenate([delta[:1], delta])
        right = np.concatenate([delta, delta[-1:]])
        m[bad] = 3.0 * np.maximum(left, right)[bad]
    m = np.maximum(m, 0.0)
    for k, d in enumerate(delta):
        if d == 0.0:
            m[k] = m[k + 1] = 0.0
            continue
        a, b = m[k] / d, m[k + 1] / d
        s = a * a + b * b
        if s > 9.0:
            tau = 3.0 / np.sqrt(s)
            m[k] = tau * a * d
            m[k + 1] = tau * b * d
    return m


class MonotoneCubic:
    """Piecewise cubic Hermite interpolant of increasing data.

    ``slopes`` are node derivatives (exact ones give fourth-order accuracy);
    when omitted they are estimated as in PCHIP.
    """

    def __init__(self, x, y, slopes=None):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if slopes is None:
            from scipy.interpolate import PchipInterpolator

            slopes = PchipInterpolator(self.x, self.y).derivative()(self.x)
        self.slopes = fritsch_carlson(self.x, self.y, slopes)
        self._spline = CubicHermiteSpline(self.x, self.y, self.slopes)

    @property
    def lo(self):
        return self.x[0]

    @property
    def hi(self):
        return self.x[-1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.x[0]) or np.any(t > self.x[-1]):
            raise RangeError(f"argument outside [{self.x[0]:.6g}, {self.x[-1]:.6g}]")
        return self._spline(t)

    def derivative(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)

    def inverse(self, v):
        """x with interpolant(x) = v, by bisection inside the bracketing node interval."""
        v = np.asarray(v, dtype=float)
        if np.any(v < self.y[0]) or np.any(v > self.y[-1]):
            raise RangeError(f"value outside [{self.y[0]:.6g}, {self.y[-1]:.6g}]")
        k = np.clip(np.searchsorted(self.y, v, side="left") - 1, 0, len(self.x) - 2)
        lo = self.x[k].astype(float)
        hi = self.x[k + 1].astype(float)
        for _ in range(_BISECT_ITER):
            mid = 0.5 * (lo + hi)
            below = self._spline(mid) < v
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        out = np.where(v == self.y[-1], self.x[-1], out)
        return np.where(v == self.y[0], self.x[0], out)
