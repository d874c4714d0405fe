"""Positive left-invariant operators described through their spectra.

Every model exposes the counting function ``N(s)``: the total weight of the
spectrum lying in the open interval ``(0, s)``. Compact and finite models also
carry their atoms (eigenvalue and multiplicity); continuous models carry a
closed-form counting law.

Model descriptors are plain mappings, for example::

    {"kind": "torus", "n": 2, "cutoff": 1e4}
    {"kind": "euclidean", "n": 1, "box_length": 400.0}
    {"kind": "cayley", "group": "cyclic", "order": 4}
    {"kind": "power_law", "preset": "engel"}

or the equivalent compact strings accepted by :func:`parse_descriptor`
(``"torus:2"``, ``"cayley:dihedral:5"``, ``"power_law:engel"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from fracdecay import groups as _groups
from fracdecay._fit import loglog_fit
from fracdecay.mlf import mittag_leffler

__all__ = [
    "POWER_LAW_PRESETS",
    "ConditionSup",
    "CutoffTooSmall",
    "DegenerateGrid",
    "LambdaFit",
    "NonSymmetricGenerators",
    "SpectralAtom",
    "SpectralModel",
    "ZeroCounting",
    "build_model",
    "counting_function",
    "fit_lambda",
    "heat_condition_sup",
    "kernel_envelope",
    "parse_descriptor",
    "wave_condition_sup",
]


class NonSymmetricGenerators(ValueError):
    """The generating set is not closed under inverses."""


class CutoffTooSmall(ValueError):
    """A spectral query reaches beyond the enumerated part of the spectrum."""


class DegenerateGrid(ValueError):
    pass


class ZeroCounting(ValueError):
    pass


# Counting exponents of the homogeneous groups that enter only through N(s).
POWER_LAW_PRESETS = {
    "engel": 3.0,
    "cartan": 4.5,
}


def heisenberg_lambda(n):
    """Sub-Laplacian on the Heisenberg group of topological dimension 2n+1."""
    return float(n + 1)


def rockland_lambda(Q, nu):
    """Rockland operator of homogeneous degree ``nu`` on a graded group."""
    return float(Q) / float(nu)


@dataclass(frozen=True)
class SpectralAtom:
    eigenvalue: float
    weight: float

    def __post_init__(self):
        if not self.eigenvalue >= 0.0:
            raise ValueError("eigenvalue must be nonnegative")
        if not self.weight > 0.0:
            raise ValueError("weight must be positive")


@dataclass(frozen=True)
class LambdaFit:
    lambda_hat: float
    c_hat: float
    r_squared: float
    s_range: tuple

    @property
    def usable(self):
        return self.r_squared >= 0.99


@dataclass(frozen=True)
class ConditionSup:
    """Maximum of a kernel over a ``(t, s)`` grid, with its location.

    ``at_edge`` flags a maximizer on the first or last ``s`` point, the
    signature of a supremum that grows without bound.
    """

    value: float
    t: float
    s: float
    at_edge: bool


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Immutable spectral description of one operator.

    ``eigenvalues``/``weights`` hold the atoms (empty for continuous models).
    ``eigenvectors`` is set only for finite Cayley models, columns ordered like
    ``vector_eigenvalues``.
    """

    kind: str
    params: dict
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exponent: float | None = None
    constant: float | None = None
    cutoff: float = math.inf
    scale: float = 1.0
    group: object = None
    generators: tuple = ()
    eigenvectors: np.ndarray | None = None
    vector_eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if ev.shape != w.shape:
            raise ValueError("eigenvalues and weights must align")
        if ev.size and (np.any(np.diff(ev) <= 0) or ev[0] < 0 or np.any(w <= 0)):
            raise ValueError("atoms must be strictly ascending, nonnegative, positively weighted")
        for arr in (ev, w):
            arr.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "weights", w)
        if self.eigenvectors is not None:
            self.eigenvectors.setflags(write=False)
            self.vector_eigenvalues.setflags(write=False)

    @property
    def atoms(self):
        return [SpectralAtom(float(e), float(w)) for e, w in zip(self.eigenvalues, self.weights)]

    @property
    def has_atoms(self):
        return self.eigenvalues.size > 0

    @property
    def is_compact(self):
        """True when the operator has an eigenvalue-0 atom (a constant mode)."""
        return self.kind in ("torus", "cayley", "euclidean")

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def counting(self, s, include_zero=False):
        """Weight of the spectrum in ``(0, s)``, or ``[0, s)`` with ``include_zero``."""
        s = np.asarray(s, dtype=float)
        if np.any(s > self.cutoff):
            raise CutoffTooSmall(f"s={float(np.max(s))} exceeds enumerated cutoff {self.cutoff}")
        if self.has_atoms:
            cum = np.concatenate([[0.0], np.cumsum(self.weights)])
            idx = np.searchsorted(self.eigenvalues, s, side="left")
            out = cum[idx]
            if not include_zero and self.eigenvalues[0] == 0.0:
                out = np.where(idx > 0, out - self.weights[0], 0.0)
            return out if out.ndim else float(out)
        out = self.constant * np.power(np.maximum(s, 0.0) / self.scale, self.exponent)
        return out if out.ndim else float(out)

    def counting_inverse(self, m):
        """Smallest ``s`` with ``N(s) >= m`` for continuous models."""
        if self.has_atoms:
            raise TypeError("counting_inverse is defined only for continuous models")
        return self.scale * np.power(np.asarray(m, dtype=float) / self.constant, 1.0 / self.exponent)

    def scaled(self, c):
        """Model of ``c`` times the operator, so that ``N_c(s) = N(s / c)``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        kw = {"scale": self.scale * c, "cutoff": self.cutoff * c}
        if self.has_atoms:
            kw["eigenvalues"] = self.eigenvalues * c
        if self.vector_eigenvalues is not None:
            kw["vector_eigenvalues"] = self.vector_eigenvalues * c
        return replace(self, **kw)


def counting_function(model, s):
    """``N(s) = tau(E_(0,s))``; vectorized over ``s``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(~(s_arr > 0)):
        raise ValueError("s must be positive")
    return model.counting(s)


# ---------------------------------------------------------------- builders


def _lattice_counts(n, cutoff):
    """``counts[j]`` = number of ``k`` in Z^n with ``|k|^2 = j``, ``j <= cutoff``."""
    top = int(math.floor(cutoff))
    one = np.zeros(top + 1, dtype=np.int64)
    r = math.isqrt(top)
    one[np.arange(r + 1) ** 2] = 2
    one[0] = 1
    counts = one.copy()
    for _ in range(n - 1):
        counts = np.convolve(counts, one)[: top + 1]
    return counts


def _torus(n, cutoff=1.0e4):
    n = int(n)
    if n < 1:
        raise ValueError("torus dimension must be >= 1")
    if not cutoff >= 1.0:
        raise CutoffTooSmall("torus cutoff must be at least 1")
    counts = _lattice_counts(n, cutoff)
    ev = np.nonzero(counts)[0]
    return SpectralModel(
        kind="torus",
        params={"n": n, "cutoff": float(cutoff)},
        eigenvalues=ev.astype(float),
        weights=counts[ev].astype(float),
        cutoff=float(cutoff),
    )


def _euclidean(n, box_length=400.0):
    n = int(n)
    if n < 1:
        raise ValueError("Euclidean dimension must be >= 1")
    if not box_length > 0:
        raise ValueError("box_length must be positive")
    ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    return SpectralModel(
        kind="euclidean",
        params={"n": n, "box_length": float(box_length)},
        exponent=n / 2.0,
        constant=ball / (2.0 * math.pi) ** n,
    )


def _power_law(lam, c=1.0):
    if not lam > 0:
        raise ValueError("power-law exponent must be positive")
    if not c > 0:
        raise ValueError("power-law constant must be positive")
    return SpectralModel(
        kind="power_law",
        params={"lambda": float(lam), "c": float(c)},
        exponent=float(lam),
        constant=float(c),
    )


def cayley_laplacian(group, generators):
    """``deg * I - A`` with ``A[g, g s] += 1``; commutes with left translations."""
    n = group.order
    A = np.zeros((n, n))
    rows = np.arange(n)
    for s in generators:
        np.add.at(A, (rows, group.table[:, s]), 1.0)
    return len(generators) * np.eye(n) - A


def _cayley(group, generators=None):
    if generators is None:
        generators = _groups.default_generators(group)
    gens = tuple(int(g) for g in generators)
    if not gens:
        raise ValueError("generator set is empty")
    if any(g < 0 or g >= group.order for g in gens):
        raise ValueError("generator index out of range")
    gen_set = set(gens)
    missing = [g for g in gens if group.inverse(g) not in gen_set]
    if missing:
        raise NonSymmetricGenerators(f"inverses of generators {missing} are not in the set")
    lap = cayley_laplacian(group, gens)
    vals, vecs = np.linalg.eigh(lap)
    # Symmetric integer matrix: clusters are separated by far more than 1e-8.
    vals = np.where(np.abs(vals) < 1e-10, 0.0, vals)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    breaks = np.nonzero(np.diff(vals) > 1e-8)[0] + 1
    groups = np.split(vals, breaks)
    ev = np.array([g.mean() for g in groups])
    w = np.array([float(g.size) for g in groups])
    rounded = np.round(ev)
    ev = np.where(np.abs(ev - rounded) < 1e-9, rounded, ev)
    return SpectralModel(
        kind="cayley",
        params={"group": group.name, "order": group.order, "generators": list(gens)},
        eigenvalues=ev,
        weights=w,
        group=group,
        generators=gens,
        eigenvectors=vecs,
        vector_eigenvalues=np.repeat(ev, w.astype(int)),
    )


def _to_float(value):
    return float(value) if not isinstance(value, (int, float)) else value


def build_model(spec):
    """Build a :class:`SpectralModel` from a descriptor mapping or string."""
    if isinstance(spec, SpectralModel):
        return spec
    if isinstance(spec, str):
        spec = parse_descriptor(spec)
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "torus":
        return _torus(int(spec.pop("n")), _to_float(spec.pop("cutoff", 1.0e4)))
    if kind == "euclidean":
        return _euclidean(int(spec.pop("n")), _to_float(spec.pop("box_length", 400.0)))
    if kind == "power_law":
        preset = spec.pop("preset", None)
        c = _to_float(spec.pop("c", 1.0))
        if preset is not None:
            if preset not in POWER_LAW_PRESETS:
                raise ValueError(f"unknown power-law preset {preset!r}")
            return _power_law(POWER_LAW_PRESETS[preset], c)
        return _power_law(_to_float(spec.pop("lambda")), c)
    if kind == "cayley":
        if "table" in spec:
            table = spec.pop("table")
            group = (
                _groups.read_table_csv(table)
                if isinstance(table, str)
                else _groups.FiniteGroup(np.asarray(table), name="table")
            )
        else:
            group = _groups.preset(spec.pop("group"), spec.pop("order", None))
        gens = spec.pop("generators", None)
        if isinstance(gens, str):
            gens = [int(g) for g in gens.replace(";", ",").split(",") if g.strip()]
        return _cayley(group, gens)
    raise ValueError(f"unknown model kind {kind!r}")


def parse_descriptor(text):
    """Parse ``kind:arg[:key=value...]`` into a descriptor mapping."""
    parts = [p.strip() for p in text.split(":") if p.strip()]
    if not parts:
        raise ValueError("empty model descriptor")
    kind, rest = parts[0].lower(), parts[1:]
    options = dict(p.split("=", 1) for p in rest if "=" in p)
    positional = [p for p in rest if "=" not in p]
    spec = {"kind": kind}
    if kind in ("torus", "euclidean"):
        if positional:
            spec["n"] = int(positional[0])
    elif kind == "power_law":
        if positional:
            head = positional[0]
            if head in POWER_LAW_PRESETS:
                spec["preset"] = head
            else:
                spec["lambda"] = float(head)
    elif kind == "cayley":
        if positional:
            if positional[0] == "csv":
                spec["table"] = positional[1]
            else:
                spec["group"] = positional[0]
                if len(positional) > 1:
                    spec["order"] = int(positional[1])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    for key, value in options.items():
        spec[key] = value if key in ("generators", "table", "preset", "group") else float(value)
    return spec


# ---------------------------------------------------------------- exponent fit


def fit_lambda(model, s_grid):
    """Least-squares slope of ``log N(s)`` against ``log s``."""
    s = np.unique(np.asarray(s_grid, dtype=float))
    if s.size < 2 or np.any(s <= 0) or s[-1] / s[0] < 100.0 * (1 - 1e-12):
        raise DegenerateGrid("s_grid needs at least two positive points spanning two decades")
    N = np.asarray(model.counting(s), dtype=float)
    if np.any(N <= 0):
        raise ZeroCounting(f"N(s) vanishes at s={float(s[np.argmin(N)])}")
    slope, intercept, r2, _ = loglog_fit(s, N)
    return LambdaFit(slope, math.exp(intercept), r2, (float(s[0]), float(s[-1])))


# ---------------------------------------------------------------- sup conditions


def _condition_sup(model, gamma, t_grid, s_grid, kernel):
    t = np.asarray(t_grid, dtype=float)
    s = np.asarray(s_grid, dtype=float)
    if t.ndim != 1 or s.ndim != 1 or t.size == 0 or s.size == 0:
        raise ValueError("grids must be nonempty 1-D arrays")
    N = np.asarray(model.counting(s), dtype=float)
    vals = np.power(N, gamma)[None, :] * kernel(t[:, None], s[None, :])
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    edge = bool(s.size > 1 and (j == 0 or j == s.size - 1))
    return ConditionSup(float(vals[i, j]), float(t[i]), float(s[j]), edge)


def _check_pq(p, q):
    if not (1.0 < p <= 2.0 <= q < math.inf):
        raise ValueError("need 1 < p <= 2 <= q < inf")


def heat_condition_sup(model, p, q, beta, t_grid, s_grid):
    """``max N(s)^(1/p-1/q) E_beta(-t^beta s)`` over the grids."""
    _check_pq(p, q)
    if not 0.0 < beta <= 1.0:
        raise ValueError("heat condition needs 0 < beta <= 1")

    def kernel(t, s):
        z = -np.power(t, beta) * s
        return mittag_leffler(beta, 1.0, z)

    return _condition_sup(model, 1.0 / p - 1.0 / q, t_grid, s_grid, kernel)


def wave_condition_sup(model, p, q, beta, t_grid, s_grid):
    """``max N(s)^(1/p-1/q) / (1 + t^beta s)`` over the grids."""
    _check_pq(p, q)
    if not 1.0 < beta < 2.0:
        raise ValueError("wave condition needs 1 < beta < 2")
    return _condition_sup(
        model, 1.0 / p - 1.0 / q, t_grid, s_grid, lambda t, s: 1.0 / (1.0 + np.power(t, beta) * s)
    )


def kernel_envelope(model, beta, gamma, t, delta=1.0):
    """``sup_s N(s)^gamma |E_{beta,delta}(-t^beta s)|`` for a single ``t``.

    Discrete models take the maximum over atoms. Continuous models search a
    log grid and polish the best point with a bounded scalar maximization.
    """
    tb = float(t) ** beta

    def f(s):
        return float(model.counting(s)) ** gamma * abs(float(mittag_leffler(beta, delta, -tb * s)))

    if model.has_atoms:
        ev = model.eigenvalues[model.eigenvalues > 0]
        N = model.counting(np.nextafter(ev, np.inf))
        vals = np.power(N, gamma) * np.abs(mittag_leffler(beta, delta, -tb * ev))
        return float(vals.max())
    u = np.logspace(-4, 4, 161)
    s = u / tb
    vals = np.power(model.counting(s), gamma) * np.abs(mittag_leffler(beta, delta, -u))
    k = int(np.argmax(vals))
    if k in (0, u.size - 1):
        raise ValueError("envelope maximum is not interior; the sup may be infinite")
    lo, hi = math.log(s[k - 1]), math.log(s[k + 1])
    res = minimize_scalar(
        lambda x: -f(math.exp(x)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    return max(-float(res.fun), float(vals[k]))
