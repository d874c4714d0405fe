"""Self-check batteries shared by ``fracdecay verify`` and the test suite.

Each battery returns a list of :class:`Check` records; nothing here raises on
a failed check, so a report can always be written.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, expm1

from fracdecay.fractional_time import TimeSeries, residual
from fracdecay.mlf import UnsupportedParameters, mittag_leffler
from fracdecay.norms_decay import HypothesisViolated, Multiplier, verify_additional_bound
from fracdecay.propagator import analyze, heat_propagate, synthesize
from fracdecay.spectral_model import build_model

__all__ = [
    "Check",
    "additional_bound_battery",
    "corrupted_psi",
    "ml_identity_battery",
    "random_bound_case",
    "residual_battery",
    "semigroup_checks",
    "transform_battery",
]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def _rel_err(a, b):
    return np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)


def ml_identity_battery(n_points=500, tol=1e-10):
    """Closed-form special cases of the Mittag-Leffler function on ``[-1e6, 0]``."""
    z = np.concatenate([[0.0], -np.logspace(-6, 6, n_points - 1)])
    x = -z
    cases = [
        ("exp", 1.0, 1.0, z, np.exp(z), False),
        ("expm1/z", 1.0, 2.0, z[1:], expm1(z[1:]) / z[1:], False),
        ("erfcx", 0.5, 1.0, z, erfcx(x), False),
        # E_2(-y^2) = cos y: absolute error, since cos has zeros
        ("cos", 2.0, 1.0, z, np.cos(np.sqrt(x)), True),
    ]
    out = []
    for name, a, d, zz, ref, absolute in cases:
        val = mittag_leffler(a, d, zz)
        err = np.abs(val - ref) if absolute else _rel_err(val, ref)
        worst = float(np.max(err))
        out.append(Check(f"ml-identity:{name}", worst, tol, worst <= tol))
    return out


def transform_battery(seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)
    cases = [
        ("torus2", build_model("torus:2:cutoff=100"), (16, 12)),
        ("euclidean1", build_model("euclidean:1:box_length=50"), (256,)),
        ("s4", build_model("cayley:s4"), (24,)),
    ]
    out = []
    for name, model, shape in cases:
        f = rng.standard_normal(shape)
        field = analyze(model, f)
        back = synthesize(field)
        rt = float(np.max(np.abs(back - f)) / np.max(np.abs(f)))
        cell = field.grid.cell
        grid_l2 = math.sqrt(float(np.sum(f**2)) * cell)
        pars = abs(field.l2_norm() - grid_l2) / grid_l2
        out.append(Check(f"roundtrip:{name}", rt, tol, rt <= tol))
        out.append(Check(f"parseval:{name}", pars, tol, pars <= tol))
    return out


def residual_battery(betas=(0.3, 0.5, 0.8), t_min=0.1, min_order=1.0):
    """Empirical L1 order of the residual of ``E_beta(-t^beta)`` on ``[t_min, 1]``."""
    out = []
    for b in betas:
        res = []
        for dt in (1e-2, 5e-3):
            s = TimeSeries.from_function(lambda t, b=b: mittag_leffler(b, 1.0, -(t**b)), dt, 1.0)
            res.append(residual(s, b, 1.0, t_min=t_min))
        order = math.log2(res[0] / res[1])
        out.append(
            Check(f"residual-order:beta={b}", order, min_order, order >= min_order, f"on [{t_min}, 1]")
        )
    return out


def semigroup_checks(tol=1e-10, gap=1e-3):
    model = build_model("torus:1:cutoff=100")
    x = 2 * np.pi * np.arange(32) / 32
    f = analyze(model, np.cos(x) + 0.5 * np.sin(3 * x))
    t1, t2 = 0.3, 0.7

    def run(beta):
        two = heat_propagate(heat_propagate(f, beta, t1), beta, t2)
        one = heat_propagate(f, beta, t1 + t2)
        return float(np.max(np.abs(two.coefficients - one.coefficients)))

    d1, d05 = run(1.0), run(0.5)
    return [
        Check("semigroup:beta=1", d1, tol, d1 <= tol),
        Check("semigroup-gap:beta=0.5", d05, gap, d05 >= gap),
    ]


_CAYLEY_POOL = (
    [f"cayley:cyclic:{n}" for n in range(2, 13)]
    + [f"cayley:dihedral:{n}" for n in range(3, 9)]
    + ["cayley:s4"]
)


def _psi_family(rng):
    a = float(rng.uniform(0.05, 5.0))
    kind = int(rng.integers(3))
    if kind == 0:
        return Multiplier(lambda v: np.exp(-a * v), True, f"exp(-{a:.3g}v)")
    if kind == 1:
        k = float(rng.uniform(0.5, 3.0))
        return Multiplier(lambda v: (1.0 + a * v) ** -k, True, f"(1+{a:.3g}v)^-{k:.3g}")
    return Multiplier(lambda v: 1.0 / (1.0 + a * v * v), True, f"1/(1+{a:.3g}v^2)")


def random_bound_case(rng, models=None):
    """One hypothesis-satisfying ``(model, phi, psi, r)`` draw."""
    if models is None:
        models = {}
    desc = _CAYLEY_POOL[int(rng.integers(len(_CAYLEY_POOL)))]
    if desc not in models:
        models[desc] = build_model(desc)
    model = models[desc]
    r = float(rng.uniform(1.0, 6.0))
    kind = int(rng.integers(4))
    if kind == 3:
        beta = float(rng.uniform(0.1, 1.0))
        c = float(rng.uniform(0.1, 3.0))
        g = math.gamma(1.0 + beta)
        psi = Multiplier(lambda v: 1.0 / (1.0 + c * v / g), True, "ml-bound")
        phi = Multiplier(lambda v: mittag_leffler(beta, 1.0, -c * v), True, f"E_{beta:.3g}")
        return desc, model, phi, psi, r
    psi = _psi_family(rng)
    if kind == 0:
        rho = float(rng.uniform(0.0, 1.0))
        phi = Multiplier(lambda v: rho * psi(v), True, "scaled psi")
    elif kind == 1:
        w = float(rng.uniform(0.1, 10.0))
        phi = Multiplier(lambda v: psi(v) * np.cos(w * v), False, "modulated psi")
    else:
        shift = float(rng.uniform(0.0, 3.0))
        phi = Multiplier(lambda v: psi(v + shift), True, "shifted psi")
    return desc, model, phi, psi, r


def corrupted_psi():
    """``psi(0) = 1`` and ``psi -> 0`` but increasing on ``[0, 1/2]``."""
    return Multiplier(lambda v: np.exp(-v) * (1.0 + 2.0 * v), False, "increasing")


def additional_bound_battery(n_cases=1000, seed=0, tol=1e-12, psi_override=None):
    rng = np.random.default_rng(seed)
    models = {}
    worst = -math.inf
    failures = 0
    violations = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedParameters)
        for _ in range(n_cases):
            desc, model, phi, psi, r = random_bound_case(rng, models)
            if psi_override is not None:
                psi = psi_override
            try:
                res = verify_additional_bound(model, phi, psi, r, tol=tol)
            except HypothesisViolated as exc:
                violations.append(f"{desc}: {exc}")
                continue
            worst = max(worst, res.lhs - res.rhs)
            failures += not res.holds
    checks = [
        Check(
            "additional-bound-battery",
            worst if math.isfinite(worst) else 0.0,
            tol,
            failures == 0 and not violations,
            f"{n_cases} cases, {failures} failures",
        )
    ]
    if violations:
        checks.append(
            Check("additional-bound-hypotheses", float(len(violations)), 0.0, False, violations[0])
        )
    return checks
