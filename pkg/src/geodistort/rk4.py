"""Classical fixed-step fourth-order Runge-Kutta."""
from __future__ import annotations

import numpy as np

from .errors import StepError


class StopIntegration(Exception):
    """Raised by a right-hand side or an ``accept`` hook to end integration early."""


def rk4_step(f, t, y, h):
    """One RK4 step for dy/dt = f(t, y).  ``h`` may be an array broadcasting against ``y``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def rk4_fixed(f, y0, t0, h, n_steps, accept=None):
    """Integrate ``n_steps`` steps of size ``h`` from ``(t0, y0)``.

    Returns ``(ts, ys, complete)``.  Integration ends early, with
    ``complete=False``, when ``f`` raises :class:`StopIntegration` or when
    ``accept(t, y)`` returns False for a freshly computed state (that state is
    dropped).  ``ys[0]`` is always ``y0``.
    """
    if n_steps < 1:
        raise StepError(f"need at least one step, got {n_steps}")
    y = np.asarray(y0, dtype=float)
    ys = np.empty((n_steps + 1,) + y.shape)
    ys[0] = y
    t = t0
    for i in range(n_steps):
        try:
            y_new = rk4_step(f, t, y, h)
        except StopIntegration:
            return t0 + h * np.arange(i + 1), ys[: i + 1], False
        if not np.all(np.isfinite(y_new)) or (accept is not None and not accept(t + h, y_new)):
            return t0 + h * np.arange(i + 1), ys[: i + 1], False
        y = y_new
        t = t0 + (i + 1) * h
        ys[i + 1] = y
    return t0 + h * np.arange(n_steps + 1), ys, True


def hermite_eval(t_nodes, y_nodes, dy_nodes, t):
    """Cubic Hermite dense output on a uniform grid of RK4 nodes.

    ``y_nodes`` and ``dy_nodes`` have shape ``(n, ...)``; ``t`` is a 1D array
    inside ``[t_nodes[0], t_nodes[-1]]``.
    """
    t_nodes = np.asarray(t_nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.searchsorted(t_nodes, t, side="right") - 1, 0, len(t_nodes) - 2)
    t0, t1 = t_nodes[idx], t_nodes[idx + 1]
    h = t1 - t0
    s = (t - t0) / h
    extra = (slice(None),) + (None,) * (np.ndim(y_nodes) - 1)
    s, h = s[extra], h[extra]
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return (
        h00 * y_nodes[idx]
        + h10 * h * dy_nodes[idx]
        + h01 * y_nodes[idx + 1]
        + h11 * h * dy_nodes[idx + 1]
    )
