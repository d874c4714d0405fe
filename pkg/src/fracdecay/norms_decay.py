"""Singular-number curves, weak Lorentz norms and decay-rate measurement.

For a spectral multiplier ``phi(L)`` the distribution function
``d_g = tau(E_(g, inf)(|phi(L)|))`` and the singular numbers
``mu_t = inf{g >= 0 : d_g <= t}`` are generalized inverses of each other.
On a model with atoms ``mu_t`` is the step function obtained by listing the
values ``|phi(eigenvalue)|`` in decreasing order, each repeated over an
interval of length equal to its weight. ``sup_t t^(1/r) mu_t`` over such a
step function is attained at the right endpoints of the steps, which is how
:func:`lorentz_weak_norm` computes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fracdecay._fit import loglog_fit
from fracdecay.propagator import (
    EvolutionRequest,
    analyze,
    evolve,
    synthesize,
)
from fracdecay.spectral_model import build_model, fit_lambda

__all__ = [
    "AdditionalBound",
    "ContinuousRearrangement",
    "DecayFit",
    "DecayStudy",
    "HypothesisViolated",
    "Multiplier",
    "NonMonotonePhiOnContinuousModel",
    "RearrangementCurve",
    "WindowTooNarrow",
    "ZeroModePresent",
    "decay_study",
    "lorentz_norm",
    "lorentz_weak_norm",
    "lp_norm",
    "select_window",
    "singular_function",
    "verify_additional_bound",
]


class NonMonotonePhiOnContinuousModel(ValueError):
    pass


class HypothesisViolated(ValueError):
    """A premise of the weak-norm bound fails; ``witness`` locates it."""

    def __init__(self, message, witness=None):
        super().__init__(message if witness is None else f"{message} (at v={witness})")
        self.witness = witness


class ZeroModePresent(ValueError):
    pass


class WindowTooNarrow(ValueError):
    pass


@dataclass(frozen=True)
class Multiplier:
    """A scalar function of the spectral variable.

    ``decreasing`` declares that ``|fn|`` is nonincreasing on ``[0, inf)``,
    which continuous models need so that level sets are intervals.
    """

    fn: object
    decreasing: bool = False
    name: str = "phi"

    def __call__(self, v):
        return self.fn(np.asarray(v, dtype=float))


def _as_multiplier(phi):
    return phi if isinstance(phi, Multiplier) else Multiplier(phi)


@dataclass(frozen=True, eq=False)
class RearrangementCurve:
    """Right-continuous step function.

    ``levels[j]`` is the value on ``[breakpoints[j-1], breakpoints[j])`` with
    ``breakpoints[-1]`` read as 0; the curve vanishes beyond the last
    breakpoint.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.levels, dtype=float)
        if b.shape != v.shape or b.ndim != 1:
            raise ValueError("breakpoints and levels must be aligned 1-D arrays")
        if np.any(np.diff(b) <= 0) or (b.size and b[0] <= 0):
            raise ValueError("breakpoints must be positive and strictly ascending")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("levels must be nonnegative and nonincreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "levels", v)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.concatenate([self.levels, [0.0]])
        return padded[idx]

    def distribution(self, gamma):
        """``d_gamma``: total length on which the curve exceeds ``gamma``."""
        k = int(np.sum(self.levels > gamma))
        return float(self.breakpoints[k - 1]) if k else 0.0

    @property
    def widths(self):
        return np.diff(np.concatenate([[0.0], self.breakpoints]))


@dataclass(frozen=True, eq=False)
class ContinuousRearrangement:
    """``mu_t = |phi|(N^{-1}(t))`` for a nonincreasing multiplier."""

    model: object
    phi: Multiplier

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.abs(self.phi(self.model.counting_inverse(t)))


def singular_function(model, phi):
    """Generalized singular numbers of ``phi(L)``.

    Atoms with ``|phi| = 0`` contribute nothing. Equal values are merged into
    one step.
    """
    phi = _as_multiplier(phi)
    model = build_model(model)
    if not model.has_atoms:
        if not phi.decreasing:
            raise NonMonotonePhiOnContinuousModel(
                "continuous models need a multiplier declared nonincreasing"
            )
        probe = np.abs(phi(np.concatenate([[0.0], np.logspace(-6, 8, 400)])))
        if np.any(np.diff(probe) > 1e-12 * max(1.0, probe[0])):
            raise NonMonotonePhiOnContinuousModel("multiplier increases somewhere on the probe grid")
        return ContinuousRearrangement(model, phi)
    vals = np.abs(phi(model.eigenvalues))
    order = np.argsort(-vals, kind="stable")
    vals, w = vals[order], model.weights[order]
    keep = vals > 0
    vals, w = vals[keep], w[keep]
    if vals.size == 0:
        return RearrangementCurve(np.zeros(0), np.zeros(0))
    cum = np.cumsum(w)
    last = np.concatenate([vals[1:] != vals[:-1], [True]])
    return RearrangementCurve(cum[last], vals[last])


def lorentz_weak_norm(curve, r):
    """``sup_t t^(1/r) mu_t``."""
    if not r >= 1:
        raise ValueError("r must be at least 1")
    if isinstance(curve, RearrangementCurve):
        if curve.levels.size == 0:
            return 0.0
        return float(np.max(curve.breakpoints ** (1.0 / r) * curve.levels))
    t = np.logspace(-8, 12, 4001)
    return float(np.max(t ** (1.0 / r) * curve(t)))


def lorentz_norm(curve, r):
    """``(integral mu_t^r dt)^(1/r)`` of a step curve."""
    if not r >= 1:
        raise ValueError("r must be at least 1")
    return float(np.sum(curve.levels**r * curve.widths) ** (1.0 / r))


@dataclass(frozen=True)
class AdditionalBound:
    lhs: float
    rhs: float
    holds: bool
    rhs_at: float


def verify_additional_bound(model, phi, psi, r, v_grid=None, tol=1e-12, points_per_decade=200):
    """Compare ``||phi(L)||_{L^{r,inf}}`` with ``sup_v psi(v) tau(E_[0,v))^(1/r)``.

    The counting here includes the eigenvalue-0 atom: with the open interval
    ``(0, v)`` the bound already fails for ``phi = psi = exp(-v)`` on the
    4-cycle, where the constant mode carries ``|phi| = 1`` but is never
    counted. On models with atoms the supremum is exact: ``psi`` is
    nonincreasing and the counting is piecewise constant, so it is attained
    just above an atom.
    """
    model = build_model(model)
    phi, psi = _as_multiplier(phi), _as_multiplier(psi)
    if not r >= 1:
        raise ValueError("r must be at least 1")
    if v_grid is None:
        top = float(model.eigenvalues[-1]) if model.has_atoms else 1.0e6
        decades = max(math.log10(max(top, 1.0) * 10.0) + 6.0, 1.0)
        v_grid = np.logspace(-6, -6 + decades, int(points_per_decade * decades) + 1)
    v_grid = np.asarray(v_grid, dtype=float)
    atoms = model.eigenvalues if model.has_atoms else np.zeros(0)
    checks = np.unique(np.concatenate([[0.0], atoms, v_grid]))
    psi_vals = np.asarray(psi(checks), dtype=float)
    if abs(float(psi(np.array([0.0]))[0]) - 1.0) > 1e-12:
        raise HypothesisViolated("psi(0) must equal 1", 0.0)
    rises = np.nonzero(np.diff(psi_vals) > 1e-14)[0]
    if rises.size:
        raise HypothesisViolated("psi must be nonincreasing", float(checks[rises[0] + 1]))
    if np.any(psi_vals < 0):
        raise HypothesisViolated("psi must be nonnegative", float(checks[np.argmin(psi_vals)]))
    far = float(np.abs(psi(np.array([1.0e12])))[0])
    if far > 1e-3:
        raise HypothesisViolated("psi must tend to 0", 1.0e12)
    dom_pts = checks if not model.has_atoms else atoms
    excess = np.abs(phi(dom_pts)) - psi(dom_pts)
    bad = np.nonzero(excess > 1e-14)[0]
    if bad.size:
        raise HypothesisViolated("|phi| exceeds psi", float(dom_pts[bad[0]]))

    lhs = lorentz_weak_norm(singular_function(model, phi), r)
    if model.has_atoms:
        # counting over [0, v] is constant on [atom_j, atom_{j+1}); psi peaks at the left end
        cand = np.concatenate([atoms, v_grid[v_grid > 0]])
        n_incl = np.searchsorted(atoms, cand, side="right")
        cum = np.concatenate([[0.0], np.cumsum(model.weights)])
        vals = psi(cand) * cum[n_incl] ** (1.0 / r)
    else:
        cand = v_grid
        vals = psi(cand) * np.asarray(model.counting(cand), dtype=float) ** (1.0 / r)
    k = int(np.argmax(vals))
    rhs = float(vals[k])
    return AdditionalBound(lhs, rhs, bool(lhs <= rhs + tol), float(cand[k]))


def lp_norm(samples, p, cell_measure):
    """``(sum |f|^p cell)^(1/p)``; ``p = inf`` gives the maximum."""
    f = np.abs(np.asarray(samples))
    if not cell_measure > 0:
        raise ValueError("cell measure must be positive")
    if p == math.inf:
        return float(f.max())
    if not p >= 1:
        raise ValueError("p must be at least 1")
    return float(np.sum(f**p * cell_measure) ** (1.0 / p))


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    max_abs_residual: float
    t_range: tuple
    r_squared: float


@dataclass(frozen=True, eq=False)
class DecayStudy:
    """Measured decay together with the predicted exponent."""

    fit: DecayFit
    target: float
    lambda_used: float
    t: np.ndarray
    norm_q: np.ndarray
    normalizer: np.ndarray
    local_slope: np.ndarray
    window: tuple = field(default=(0, 0))

    @property
    def rel_dev(self):
        return abs(self.fit.slope - self.target) / abs(self.target) if self.target else math.inf

    def rows(self):
        return list(zip(self.t, self.norm_q, self.normalizer, self.local_slope))


def _local_slopes(t, y):
    lt, ly = np.log(t), np.log(y)
    return np.gradient(ly, lt)


def select_window(t, local_slope, max_variation=0.15, min_decades=1.5):
    """Largest index window whose local slopes vary by less than ``max_variation``.

    Variation is ``(max - min) / |mean|`` over the window. Returns ``(i, j)``
    with ``j`` exclusive; raises :class:`WindowTooNarrow` when the best window
    spans fewer than ``min_decades`` decades of ``t``.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(local_slope, dtype=float)
    best = None
    for i in range(s.size):
        for j in range(s.size, i + 1, -1):
            if best is not None and (t[j - 1] / t[i]) <= best[2]:
                break
            w = s[i:j]
            mean = abs(float(np.mean(w)))
            if mean > 0 and (w.max() - w.min()) / mean < max_variation:
                best = (i, j, t[j - 1] / t[i])
                break
    if best is None or math.log10(best[2]) < min_decades - 1e-9:
        span = 0.0 if best is None else math.log10(best[2])
        raise WindowTooNarrow(f"best stable window spans {span:.2f} decades")
    return best[0], best[1]


def decay_study(
    model,
    beta,
    p,
    q,
    data0,
    data1=None,
    t_grid=None,
    window=None,
    lambda_value=None,
    s_grid=None,
):
    """Measure the log-log decay slope of ``||w(t)||_q`` and compare it with
    ``-beta lambda (1/p - 1/q)``.

    Heat type (``beta <= 1``) reports ``||w(t)||_q / ||w0||_p``; wave type
    reports ``||w(t)||_q / (||w0||_p + t ||w1||_p)``. ``window`` fixes the fit
    indices ``(i, j)``; otherwise :func:`select_window` picks them. ``lambda``
    comes from :func:`fit_lambda` on ``s_grid`` unless given.
    """
    model = build_model(model)
    if not (1.0 <= p <= 2.0 <= q):
        raise ValueError("need 1 <= p <= 2 <= q")
    kind = "heat" if beta <= 1.0 else "wave"
    if kind == "heat" and data1 is not None:
        raise ValueError("an initial velocity is only accepted for 1 < beta < 2")
    t_grid = np.asarray(t_grid, dtype=float)
    request = EvolutionRequest(beta, tuple(t_grid), kind)
    f0 = analyze(model, np.asarray(data0, dtype=float))
    f1 = None
    if kind == "wave":
        f1 = analyze(model, np.asarray(data1, dtype=float)) if data1 is not None else None
    if model.is_compact:
        for f in (f0, f1):
            if f is None:
                continue
            zero = f.eigenvalues == 0
            scale = max(f.l2_norm(), 1e-300)
            if np.any(np.abs(f.coefficients[zero]) > 1e-10 * scale):
                raise ZeroModePresent("data must have zero mean on compact models")
    if lambda_value is None:
        if s_grid is None:
            s_grid = np.geomspace(1e2, 1e4, 41) if model.kind == "torus" else np.geomspace(1e-2, 1e2, 41)
        lam_fit = fit_lambda(model, s_grid)
        if not lam_fit.usable:
            raise ValueError(f"counting exponent fit is unreliable (r^2={lam_fit.r_squared:.4f})")
        lambda_value = lam_fit.lambda_hat
    target = -beta * lambda_value * (1.0 / p - 1.0 / q)

    cell = f0.grid.cell
    n0 = lp_norm(data0, p, cell)
    n1 = lp_norm(data1, p, cell) if data1 is not None else 0.0
    norms = np.empty(t_grid.size)
    for k, (t, w) in enumerate(evolve(request, f0, f1)):
        norms[k] = lp_norm(synthesize(w), q, cell)
    normalizer = n0 + t_grid * n1 if kind == "wave" else np.full(t_grid.size, n0)
    y = norms / normalizer
    slopes = _local_slopes(t_grid, y)
    i, j = window if window is not None else select_window(t_grid, slopes)
    if math.log10(t_grid[j - 1] / t_grid[i]) < 1.5 - 1e-9:
        raise WindowTooNarrow("fit window must span at least 1.5 decades")
    slope, intercept, r2, resid = loglog_fit(t_grid[i:j], y[i:j])
    fit = DecayFit(
        slope, intercept, float(np.max(np.abs(resid))), (float(t_grid[i]), float(t_grid[j - 1])), r2
    )
    return DecayStudy(fit, target, lambda_value, t_grid, norms, normalizer, slopes, (i, j))
