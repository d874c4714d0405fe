"""Discrete fractional integrals and Caputo derivatives on uniform grids.

These operators are verification oracles: they check that closed-form
solutions satisfy ``D^beta u + mu u = 0`` without sharing any code path with
the spectral propagators.

* :func:`rl_integral` uses the product trapezoidal rule (piecewise-linear
  interpolation of ``u`` integrated exactly against ``(t - s)^(beta - 1)``),
  second order for smooth ``u``.
* :func:`caputo_derivative` uses the L1 scheme for ``0 < beta < 1`` (piecewise
  linear ``u`` in the Caputo integral, order ``2 - beta`` for smooth ``u``) and
  applies :func:`rl_integral` of order ``2 - beta`` to a discrete second
  derivative for ``1 < beta < 2``.

Both quadratures integrate the kernel exactly over each cell, so the
singularity at ``s = t`` is never evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "BetaEqualsOne",
    "BetaOutOfRange",
    "TimeSeries",
    "caputo_derivative",
    "residual",
    "rl_integral",
]


class BetaEqualsOne(ValueError):
    """``beta = 1`` is the ordinary derivative; use a plain difference."""


class BetaOutOfRange(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Samples ``values[k] = u(k * dt)``."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("a time series needs at least 3 samples")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, dt, t_end):
        n = int(round(t_end / dt))
        t = dt * np.arange(n + 1)
        return cls(dt, np.asarray(fn(t), dtype=float))

    @property
    def times(self):
        return self.dt * np.arange(self.values.size)

    def __len__(self):
        return self.values.size


def _causal_conv(weights, x):
    """``out[n] = sum_{k <= n} weights[k] x[n - k]`` truncated to ``len(x)``."""
    if x.size < 64:
        return np.convolve(weights, x)[: x.size]
    return fftconvolve(weights, x)[: x.size]


def rl_integral(series, beta):
    """Riemann-Liouville integral ``I^beta u`` by product trapezoid weights."""
    if not beta > 0:
        raise BetaOutOfRange("integral order must be positive")
    u = series.values
    n_pts = u.size
    h = series.dt
    m = np.arange(n_pts, dtype=float)
    p = beta + 1.0
    # Interior weight for u_j at t_n depends only on m = n - j >= 1.
    a = np.empty(n_pts)
    a[0] = 1.0
    mm = m[1:]
    a[1:] = (mm + 1.0) ** p - 2.0 * mm**p + (mm - 1.0) ** p
    # The j = 0 endpoint weight replaces the interior one at m = n.
    nn = m[1:]
    a0 = (nn - 1.0) ** p - (nn - beta - 1.0) * nn**beta
    out = _causal_conv(a, u)
    out[1:] += (a0 - a[1:]) * u[0]
    out[0] = 0.0
    return TimeSeries(h, out * h**beta / math.gamma(beta + 2.0))


def _second_difference(u, h):
    d2 = np.empty_like(u)
    d2[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    d2[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h**2
    d2[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / h**2
    return d2


def caputo_derivative(series, beta):
    """Caputo derivative of order ``beta`` in ``(0, 1)`` or ``(1, 2)``.

    The value at ``t = 0`` is set to 0 for ``beta < 1``, where the L1 sum is
    empty.
    """
    if beta == 1.0:
        raise BetaEqualsOne("beta = 1 is the first derivative")
    if not 0.0 < beta < 2.0:
        raise BetaOutOfRange(f"Caputo order must lie in (0, 1) or (1, 2), got {beta}")
    u = series.values
    h = series.dt
    if beta < 1.0:
        m = np.arange(u.size - 1, dtype=float)
        b = (m + 1.0) ** (1.0 - beta) - m ** (1.0 - beta)
        du = np.diff(u)
        out = np.zeros_like(u)
        out[1:] = _causal_conv(b, du)
        return TimeSeries(h, out * h**-beta / math.gamma(2.0 - beta))
    if u.size < 4:
        raise ValueError("beta > 1 needs at least 4 samples")
    return rl_integral(TimeSeries(h, _second_difference(u, h)), 2.0 - beta)


def residual(series, beta, mu, t_min=0.0):
    """``max |D^beta u + mu u|`` over grid times ``t >= max(dt, t_min)``.

    ``t = 0`` is always excluded because the discrete derivative is not
    defined there.
    """
    d = caputo_derivative(series, beta).values
    r = np.abs(d + mu * series.values)
    t = series.times
    mask = t >= max(series.dt, t_min) - 1e-12 * series.dt
    if not np.any(mask):
        raise ValueError("no grid points in the residual window")
    return float(np.max(r[mask]))
