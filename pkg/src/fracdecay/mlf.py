r"""Two-parameter Mittag-Leffler function on the nonpositive real axis.

.. math::

    E_{\alpha,\delta}(z) = \sum_{k=0}^{\infty} \frac{z^k}{\Gamma(\alpha k + \delta)}

Three evaluation regimes are used, selected by the scaled modulus
``r = |z| ** (1 / alpha)`` (see :mod:`fracdecay._regimes`):

* ``series``: the power series, for small ``r`` where cancellation is mild;
* ``integral``: the Bromwich integral of the Laplace transform
  ``s**(alpha - delta) / (s**alpha - z)`` collapsed onto a keyhole around the
  branch cut (two rays plus a small circle) with the pole residues added for
  ``alpha > 1``;
* ``asymptotic``: the optimally truncated algebraic expansion
  ``-sum z**(-k) / Gamma(delta - alpha k)`` plus the same pole residues.

For ``alpha`` in ``{1, 2}`` with integer ``delta`` the asymptotic formula is a
finite exact identity and replaces the integral regime.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, roots_legendre
from scipy.special import rgamma as _sp_rgamma

from fracdecay import _regimes

__all__ = [
    "CancellationLoss",
    "MLParams",
    "MLResult",
    "NotInAsymptoticRegime",
    "UnsupportedParameters",
    "mittag_leffler",
    "ml_asymptotic",
    "ml_eval",
    "ml_integral",
    "ml_series",
]

EPS = float(np.finfo(float).eps)

_CIRCLE_NODES, _CIRCLE_WEIGHTS = roots_legendre(64)
_CIRCLE_NODES_LO, _CIRCLE_WEIGHTS_LO = roots_legendre(48)


class CancellationLoss(ArithmeticError):
    """The power series lost too many digits to cancellation."""


class NotInAsymptoticRegime(ValueError):
    """``|z|`` is below the asymptotic threshold for this ``alpha``."""


class UnsupportedParameters(UserWarning):
    """Parameters lie outside the box where accuracy is guaranteed."""


@dataclass(frozen=True)
class MLParams:
    alpha: float
    delta: float
    z: float

    def __post_init__(self):
        _check_params(self.alpha, self.delta, self.z)


@dataclass(frozen=True)
class MLResult:
    """Value of ``E_{alpha,delta}(z)`` with an absolute error estimate."""

    value: float
    abs_error_estimate: float
    regime: str
    guaranteed: bool = True


def _check_params(alpha, delta, z):
    for name, v in (("alpha", alpha), ("delta", delta), ("z", z)):
        if isinstance(v, complex) or np.iscomplexobj(v):
            raise TypeError(f"{name} must be real, got {v!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if np.any(np.asarray(z) > 0.0):
        raise ValueError("only z <= 0 is supported")


def _in_box(alpha, delta, z):
    lo, hi = _regimes.GUARANTEED_ALPHA
    return (
        lo <= alpha <= hi
        and delta in _regimes.GUARANTEED_DELTA
        and bool(np.all(np.asarray(z) >= _regimes.GUARANTEED_MIN_Z))
    )


def _rgamma(x):
    """``1 / Gamma(x)`` with exact zeros at the nonpositive integers."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(_sp_rgamma(x), dtype=float)
    pole = (x <= 0.0) & (np.abs(x - np.round(x)) <= 8.0 * EPS * np.maximum(1.0, np.abs(x)))
    return np.where(pole, 0.0, out)


def _is_exact_case(alpha, delta):
    # finite residue + algebraic identity: E_1 and E_2 with integer delta
    return alpha in (1.0, 2.0) and float(delta).is_integer()


# {{{ series


_SERIES_KCAP = 20000


def _series_length(alpha, delta, x, tol):
    """Number of terms needed so that the tail is below ``tol``."""
    k = np.arange(_SERIES_KCAP + 2, dtype=float)
    logmag = k * math.log(x) - gammaln(alpha * k + delta)
    if logmag.max() > 700.0:
        return None, logmag
    peak = int(np.argmax(logmag))
    below = np.nonzero(logmag[peak:-1] < math.log(tol) - 2.0)[0]
    if below.size == 0:
        return None, logmag
    return peak + int(below[0]), logmag


def ml_series(alpha, delta, z, tol=1.0e-17):
    """Sum the power series until the tail is below ``tol``.

    Raises :class:`CancellationLoss` when ``sum |t_k| / |sum t_k|`` exceeds
    the frozen cap, so the caller has to switch regimes.
    """
    _check_params(alpha, delta, z)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if abs(z) > _regimes.SERIES_MAX_ABS_Z:
        raise ValueError(f"|z| = {abs(z)} exceeds the series radius {_regimes.SERIES_MAX_ABS_Z}")
    if z == 0.0:
        return MLResult(float(_rgamma(delta)), 0.0, "series", _in_box(alpha, delta, z))

    n, logmag = _series_length(alpha, delta, -z, tol)
    if n is None:
        raise CancellationLoss(f"series does not settle for alpha={alpha}, z={z}")
    k = np.arange(n + 1, dtype=float)
    terms = np.power(z, k) * _rgamma(alpha * k + delta)
    value = math.fsum(terms)
    total = float(np.sum(np.abs(terms)))
    cancellation = total / abs(value) if value != 0.0 else math.inf
    if cancellation > _regimes.SERIES_MAX_CANCELLATION:
        raise CancellationLoss(
            f"cancellation factor {cancellation:.3g} at alpha={alpha}, z={z}"
        )
    # the terms decrease at least geometrically past the peak
    q = math.exp(logmag[n + 1] - logmag[n])
    tail = math.exp(logmag[n + 1]) / max(1.0 - q, 1.0e-3)
    err = tail + 8.0 * EPS * total
    return MLResult(value, err, "series", _in_box(alpha, delta, z))


def _series_values(alpha, delta, z):
    """Vectorized series for an array of ``z`` already known to be safe."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    if z.size == 0:
        return out, out.copy()
    x_max = float(np.max(-z))
    if x_max == 0.0:
        out[:] = _rgamma(delta)
        return out, np.zeros_like(z)
    n, _ = _series_length(alpha, delta, x_max, 1.0e-17)
    if n is None:
        raise CancellationLoss(f"series does not settle for alpha={alpha}, |z|={x_max}")
    k = np.arange(n + 1, dtype=float)
    terms = np.power(z[:, None], k[None, :]) * _rgamma(alpha * k + delta)[None, :]
    out = terms.sum(axis=1)
    err = 8.0 * EPS * np.abs(terms).sum(axis=1) + 1.0e-17
    return out, err


# }}}


# {{{ asymptotic expansion


def _residues(alpha, delta, r):
    """Contribution of the poles of the Laplace transform, in unscaled form."""
    if alpha < 1.0:
        return 0.0
    if alpha == 1.0:
        if not float(delta).is_integer():
            return 0.0
        return r ** (1.0 - delta) * math.exp(-r) * (-1.0) ** int(1.0 - delta)
    pole = cmath.exp(1j * math.pi / alpha)
    val = (2.0 / alpha) * (cmath.exp(r * pole) * pole ** (1.0 - delta)).real
    return r ** (1.0 - delta) * val


_ASYM_KCAP = 4000
# keeps delta - alpha * k inside the range where 1/Gamma is finite
_ASYM_MAX_GAMMA_ARG = 160.0


def ml_asymptotic(alpha, delta, z, num_terms=None):
    """Large-``|z|`` expansion.

    ``num_terms`` counts the nonvanishing algebraic terms (terms with
    ``1 / Gamma`` at a pole are skipped).  When omitted the expansion is
    truncated just before its smallest term.  The error estimate is the
    magnitude of the first omitted nonvanishing term.
    """
    _check_params(alpha, delta, z)
    if z == 0.0:
        raise NotInAsymptoticRegime("z = 0 has no asymptotic expansion")
    x = -float(z)
    r = x ** (1.0 / alpha)
    exact = _is_exact_case(alpha, delta)
    if not exact and r < _regimes.thresholds(alpha)[1]:
        raise NotInAsymptoticRegime(
            f"|z|**(1/alpha) = {r:.4g} below threshold {_regimes.thresholds(alpha)[1]}"
        )
    if num_terms is not None and num_terms < 1:
        raise ValueError("num_terms must be at least 1")

    kcap = min(_ASYM_KCAP, int(_ASYM_MAX_GAMMA_ARG / alpha))
    k = np.arange(1, kcap + 1, dtype=float)
    coef = _rgamma(delta - alpha * k)
    logx = math.log(x)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(coef)) - k * logx
    terms = np.where(coef != 0.0, -coef * np.exp(-k * logx) * np.where(k % 2 == 0, 1.0, -1.0), 0.0)
    nonzero = np.nonzero(coef != 0.0)[0]

    if exact:
        # finite sum: only k < delta / alpha can be nonzero
        keep = nonzero[k[nonzero] * alpha < delta + 0.5]
        value = math.fsum(terms[keep]) + _residues(alpha, delta, r)
        err = 4.0 * EPS * (float(np.sum(np.abs(terms[keep]))) + abs(value))
        return MLResult(value, err, "asymptotic", _in_box(alpha, delta, z))

    if num_terms is None:
        # envelope |Gamma(alpha k + 1 - delta)| / (pi x**k) of the reflected terms
        arg = alpha * k + 1.0 - delta
        env = np.where(arg > 0.0, gammaln(np.maximum(arg, 1.0e-300)) - k * logx, np.inf)
        k_opt = int(np.argmin(env))
        used = nonzero[nonzero < k_opt]
        omitted = nonzero[nonzero >= k_opt]
        err = math.exp(logmag[omitted[0]]) if omitted.size else 0.0
        err = max(err, math.exp(env[k_opt]) / math.pi)
    else:
        if num_terms > nonzero.size:
            raise ValueError(f"num_terms={num_terms} exceeds available terms")
        used = nonzero[:num_terms]
        err = math.exp(logmag[nonzero[num_terms]]) if num_terms < nonzero.size else 0.0

    value = math.fsum(terms[used]) + _residues(alpha, delta, r)
    err += 4.0 * EPS * abs(value)
    return MLResult(value, err, "asymptotic", _in_box(alpha, delta, z))


def _asymptotic_values(alpha, delta, z, chunk=2048):
    """Vectorized default-truncation :func:`ml_asymptotic` (values and errors)."""
    x = -np.asarray(z, dtype=float)
    r = x ** (1.0 / alpha)
    kcap = min(_ASYM_KCAP, int(_ASYM_MAX_GAMMA_ARG / alpha))
    k = np.arange(1, kcap + 1, dtype=float)
    coef = _rgamma(delta - alpha * k)
    live = coef != 0.0
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        logcoef = np.log(np.abs(coef))
    arg = alpha * k + 1.0 - delta
    lg = np.where(arg > 0.0, gammaln(np.maximum(arg, 1.0e-300)), np.inf)
    exact = _is_exact_case(alpha, delta)
    vals = np.empty_like(x)
    errs = np.empty_like(x)
    for lo in range(0, x.size, chunk):
        logx = np.log(x[lo : lo + chunk])[:, None]
        powers = np.exp(-k[None, :] * logx)
        terms = np.where(live, -coef * sign, 0.0)[None, :] * powers
        if exact:
            used = live & (k * alpha < delta + 0.5)
            err_alg = np.zeros(logx.shape[0])
            mask = np.broadcast_to(used, terms.shape)
        else:
            env = lg[None, :] - k[None, :] * logx
            k_opt = np.argmin(env, axis=1)
            idx = np.arange(kcap)[None, :]
            mask = live[None, :] & (idx < k_opt[:, None])
            omitted = live[None, :] & (idx >= k_opt[:, None])
            first = np.argmax(omitted, axis=1)
            has = omitted[np.arange(first.size), first]
            err_first = np.where(has, np.exp(logcoef[first] - k[first] * logx[:, 0]), 0.0)
            err_env = np.exp(env[np.arange(first.size), k_opt]) / math.pi
            err_alg = np.maximum(err_first, err_env)
        alg = np.where(mask, terms, 0.0)
        v = alg.sum(axis=1) + _residues_array(alpha, delta, r[lo : lo + chunk])
        vals[lo : lo + chunk] = v
        errs[lo : lo + chunk] = err_alg + 8.0 * EPS * (np.abs(alg).sum(axis=1) + np.abs(v))
    return vals, errs


def _residues_array(alpha, delta, r):
    if alpha < 1.0 or (alpha == 1.0 and not float(delta).is_integer()):
        return np.zeros_like(r)
    if alpha == 1.0:
        return r ** (1.0 - delta) * np.exp(-r) * (-1.0) ** int(1.0 - delta)
    pole = cmath.exp(1j * math.pi / alpha)
    val = (2.0 / alpha) * (np.exp(r * pole) * pole ** (1.0 - delta)).real
    return r ** (1.0 - delta) * val


# }}}


# {{{ contour integral


def _keyhole(alpha, delta, r):
    """Scaled Bromwich integral of ``s**(alpha-delta) / (s**alpha + 1)`` at time ``r``.

    The contour wraps the negative real axis: two rays from ``eps`` to
    infinity and a circle of radius ``eps = min(1/2, 1/r)`` around the origin.
    Returns ``(value, abs_error)``; pole residues are not included.
    """
    eps = min(0.5, 1.0 / r)
    sin_d = math.sin(math.pi * delta)
    sin_ad = math.sin(math.pi * (alpha - delta))
    cos_a = math.cos(math.pi * alpha)
    ad = alpha - delta

    def ray(rho):
        pa = rho**alpha
        return math.exp(-r * rho) * rho**ad * (pa * sin_d - sin_ad) / (pa * pa + 2.0 * cos_a * pa + 1.0)

    # the rays decay like exp(-r rho): cut inside the boundary layer so quad resolves it
    cuts = sorted(p for p in (1.0, 2.0, 5.0 / r, 40.0 / r) if p > eps)
    hi = cuts[-1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        i1, e1 = integrate.quad(ray, eps, hi, points=cuts[:-1] or None, epsabs=0.0, epsrel=2.0e-14, limit=200)
        i2, e2 = integrate.quad(ray, hi, np.inf, epsabs=0.0, epsrel=2.0e-14, limit=200)

    def circle(nodes, weights):
        s = eps * np.exp(1j * math.pi * nodes)
        f = np.exp(r * s) * s**ad / (s**alpha + 1.0) * s
        return 0.5 * float(np.dot(weights, f).real)

    c_hi = circle(_CIRCLE_NODES, _CIRCLE_WEIGHTS)
    c_lo = circle(_CIRCLE_NODES_LO, _CIRCLE_WEIGHTS_LO)
    value = (i1 + i2) / math.pi + c_hi
    err = (e1 + e2) / math.pi + abs(c_hi - c_lo) + 4.0 * EPS * (abs(i1 + i2) / math.pi + abs(c_hi))
    return value, err


def _euler_alpha_one(delta, x):
    """``E_{1,delta}(-x)`` from the Euler integral, any ``delta > 0``."""
    if delta <= 1.0:
        # E_{1,d}(z) = 1/Gamma(d) + z E_{1,d+1}(z)
        val, err = _euler_alpha_one(delta + 1.0, x)
        return float(_rgamma(delta)) - x * val, x * err + EPS / math.gamma(delta)
    if delta == 2.0:
        return -math.expm1(-x) / x, 4.0 * EPS / x
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda s: math.exp(-x * s), 0.0, 1.0, weight="alg", wvar=(0.0, delta - 2.0),
            epsabs=0.0, epsrel=1.0e-13, limit=200,
        )
    g = float(_rgamma(delta - 1.0))
    return g * val, g * err


def ml_integral(alpha, delta, z):
    """Evaluate through the collapsed Bromwich contour.

    Accepts any ``z <= 0`` but is conditioned for ``|z|**(1/alpha)`` of order
    one and above: for very small ``|z|`` the contour value is multiplied by
    ``r**(1 - delta)`` and loses digits, which ``abs_error_estimate`` reports.
    """
    _check_params(alpha, delta, z)
    if z == 0.0:
        return MLResult(float(_rgamma(delta)), 0.0, "integral", _in_box(alpha, delta, z))
    x = -float(z)
    box = _in_box(alpha, delta, z)
    if alpha == 1.0:
        val, err = _euler_alpha_one(float(delta), x)
        return MLResult(val, err + 4.0 * EPS * abs(val), "integral", box)
    r = x ** (1.0 / alpha)
    if alpha == 2.0 and float(delta).is_integer() and delta <= 2.0:
        body, err = 0.0, 0.0
    else:
        body, err = _keyhole(alpha, delta, r)
    scale = r ** (1.0 - delta)
    val = scale * body + _residues(alpha, delta, r)
    return MLResult(val, scale * err + 4.0 * EPS * abs(val), "integral", box)


# }}}


def ml_eval(alpha, delta, z):
    """Evaluate ``E_{alpha,delta}(z)`` for real ``z <= 0`` with regime dispatch.

    Accuracy of 1e-10 relative is guaranteed for ``z in [-1e6, 0]``,
    ``alpha in [0.1, 2]``, ``delta in {1, 2}``; outside that box the result is
    best effort, ``guaranteed`` is false and :class:`UnsupportedParameters`
    is warned.
    """
    _check_params(alpha, delta, z)
    alpha, delta, z = float(alpha), float(delta), float(z)
    if not _in_box(alpha, delta, z):
        warnings.warn(
            f"alpha={alpha}, delta={delta}, z={z} outside the guaranteed box",
            UnsupportedParameters,
            stacklevel=2,
        )
    if z == 0.0:
        return MLResult(float(_rgamma(delta)), 0.0, "series", _in_box(alpha, delta, z))
    r = (-z) ** (1.0 / alpha)
    r_series, r_asym = _regimes.thresholds(alpha)
    if r <= r_series:
        try:
            return ml_series(alpha, delta, z)
        except (CancellationLoss, ValueError):
            pass
    if r >= r_asym or _is_exact_case(alpha, delta):
        return ml_asymptotic(alpha, delta, z)
    return ml_integral(alpha, delta, z)


def mittag_leffler(alpha, delta, z, return_error=False):
    """Vectorized :func:`ml_eval` over an array of ``z <= 0``.

    Repeated arguments are evaluated once.  With ``return_error`` a second
    array of absolute error estimates is returned.
    """
    z = np.asarray(z, dtype=float)
    _check_params(alpha, delta, z)
    alpha, delta = float(alpha), float(delta)
    if not _in_box(alpha, delta, z):
        warnings.warn(
            f"alpha={alpha}, delta={delta} or some z outside the guaranteed box",
            UnsupportedParameters,
            stacklevel=2,
        )
    uz, inverse = np.unique(z.ravel(), return_inverse=True)
    vals = np.empty_like(uz)
    errs = np.empty_like(uz)
    r = (-uz) ** (1.0 / alpha)
    r_series, r_asym = _regimes.thresholds(alpha)

    ser = r <= r_series
    if ser.any():
        vals[ser], errs[ser] = _series_values(alpha, delta, uz[ser])
    asym = ~ser & ((r >= r_asym) | _is_exact_case(alpha, delta))
    if asym.any():
        vals[asym], errs[asym] = _asymptotic_values(alpha, delta, uz[asym])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedParameters)
        for i in np.nonzero(~ser & ~asym)[0]:
            res = ml_integral(alpha, delta, uz[i])
            vals[i], errs[i] = res.value, res.abs_error_estimate

    vals = vals[inverse].reshape(z.shape)
    if return_error:
        return vals, errs[inverse].reshape(z.shape)
    return vals
