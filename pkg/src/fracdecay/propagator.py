"""Spectral fields and the heat- and wave-type solution operators.

A :class:`SpectralField` stores the coefficients of a function in the
eigenbasis of a model's operator together with the eigenvalue attached to each
coefficient. Propagation multiplies coefficients by Mittag-Leffler factors:

* heat type, ``0 < beta <= 1``: ``E_beta(-t^beta mu)``;
* wave type, ``1 < beta < 2``: ``a0 E_beta(-t^beta mu) + a1 t E_{beta,2}(-t^beta mu)``,
  where the second factor is the running integral of the first.

Discretizations: the torus and the Euclidean box surrogate use uniform grids
with an orthonormal FFT scaled by ``sqrt(cell)`` so that the coefficient
``l2`` norm equals the grid ``L2`` norm; finite Cayley models use the
orthonormal eigenvectors of the Cayley Laplacian under counting measure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from fracdecay.mlf import UnsupportedParameters, mittag_leffler
from fracdecay.spectral_model import SpectralModel, build_model

__all__ = [
    "BetaOutOfRange",
    "EvolutionRequest",
    "Grid",
    "MissingW1",
    "ModelMismatch",
    "ShapeMismatch",
    "SpectralField",
    "analyze",
    "evolve",
    "grid_for",
    "heat_propagate",
    "preset_data",
    "synthesize",
    "wave_propagate",
]


class ShapeMismatch(ValueError):
    pass


class BetaOutOfRange(ValueError):
    pass


class ModelMismatch(ValueError):
    pass


class MissingW1(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    """Sampling of a model's group.

    ``coords`` lists one coordinate array per axis (empty for finite groups),
    ``cell`` is the Haar measure of one sample cell and ``origin`` the index
    of the identity element.
    """

    shape: tuple
    cell: float
    lengths: tuple
    origin: tuple
    coords: tuple = ()

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def measure(self):
        return self.cell * self.size


def grid_for(model, shape=None):
    """Discretization of ``model`` with the given sample ``shape``."""
    if model.kind == "cayley":
        g = model.group.order
        if shape is not None and tuple(np.atleast_1d(shape)) != (g,):
            raise ShapeMismatch(f"finite group of order {g} needs shape ({g},)")
        return Grid((g,), 1.0, (), (model.group.identity,))
    if model.kind not in ("torus", "euclidean"):
        raise TypeError(f"model kind {model.kind!r} has no spatial discretization")
    n = model.params["n"]
    if shape is None:
        raise ShapeMismatch("a grid shape is required for this model")
    shape = tuple(int(m) for m in np.atleast_1d(shape))
    if len(shape) != n or any(m < 2 for m in shape):
        raise ShapeMismatch(f"expected {n} axes of at least 2 points, got {shape}")
    if model.kind == "torus":
        L = 2.0 * math.pi
        coords = tuple(L * np.arange(m) / m for m in shape)
        origin = (0,) * n
    else:
        L = model.params["box_length"]
        coords = tuple(L * (np.arange(m) - m // 2) / m for m in shape)
        origin = tuple(m // 2 for m in shape)
    lengths = (L,) * n
    cell = float(np.prod([L / m for m in shape]))
    return Grid(shape, cell, lengths, origin, coords)


def _mode_eigenvalues(model, grid):
    if model.kind == "cayley":
        return np.asarray(model.vector_eigenvalues, dtype=float)
    total = np.zeros(grid.shape)
    for axis, (m, L) in enumerate(zip(grid.shape, grid.lengths)):
        k = np.fft.fftfreq(m, d=1.0 / m) * (2.0 * math.pi / L)
        shape = [1] * len(grid.shape)
        shape[axis] = m
        total = total + (k**2).reshape(shape)
    return total * model.scale


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a function in the eigenbasis of ``model``.

    ``eigenvalues`` has the shape of ``coefficients``; ``real`` records that
    the sampled function is real so synthesis can drop roundoff imaginary
    parts.
    """

    model: SpectralModel
    grid: Grid
    coefficients: np.ndarray
    eigenvalues: np.ndarray
    real: bool = True
    samples: np.ndarray | None = field(default=None, repr=False)

    def with_coefficients(self, coefficients):
        return SpectralField(self.model, self.grid, coefficients, self.eigenvalues, self.real)

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def __add__(self, other):
        _same_model(self, other)
        return SpectralField(
            self.model,
            self.grid,
            self.coefficients + other.coefficients,
            self.eigenvalues,
            self.real and other.real,
        )

    def __rmul__(self, scalar):
        real = self.real and np.isrealobj(scalar)
        return SpectralField(self.model, self.grid, scalar * self.coefficients, self.eigenvalues, real)


def analyze(model, samples, shape=None):
    """Transform grid samples into a :class:`SpectralField`."""
    model = build_model(model)
    f = np.asarray(samples)
    grid = grid_for(model, f.shape if shape is None else shape)
    if f.shape != grid.shape:
        raise ShapeMismatch(f"samples have shape {f.shape}, grid needs {grid.shape}")
    real = bool(np.isrealobj(f))
    if model.kind == "cayley":
        coef = model.eigenvectors.T @ f
    else:
        coef = np.fft.fftn(f, norm="ortho") * math.sqrt(grid.cell)
    return SpectralField(model, grid, coef, _mode_eigenvalues(model, grid), real, f)


def synthesize(field):
    """Grid samples of ``field``; real-valued when the source data were real."""
    if field.model.kind == "cayley":
        out = field.model.eigenvectors @ field.coefficients
    else:
        out = np.fft.ifftn(field.coefficients / math.sqrt(field.grid.cell), norm="ortho")
    if field.real:
        out = np.real(out)
    return out


def _same_model(a, b):
    same = a.model is b.model or (
        a.model.kind == b.model.kind
        and a.model.params == b.model.params
        and a.model.scale == b.model.scale
    )
    if not same or a.grid.shape != b.grid.shape or a.grid.lengths != b.grid.lengths:
        raise ModelMismatch("fields belong to different models or grids")


def _ml_factor(beta, delta, t, mu):
    if t == 0.0:
        return np.ones_like(mu)
    # Grid spectra times t^beta routinely pass the validated |z| range; there
    # the algebraic expansion only becomes more accurate, so the warning is noise.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedParameters)
        return mittag_leffler(beta, delta, -(t**beta) * mu)


def _check_t(t):
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError("t must be finite and nonnegative")
    return t


def heat_propagate(field, beta, t):
    """``E_beta(-t^beta L) w0`` for ``0 < beta <= 1``."""
    if not 0.0 < beta <= 1.0:
        raise BetaOutOfRange(f"heat type needs 0 < beta <= 1, got {beta}")
    t = _check_t(t)
    return field.with_coefficients(field.coefficients * _ml_factor(beta, 1.0, t, field.eigenvalues))


def wave_propagate(field0, field1, beta, t):
    """``E_beta(-t^beta L) w0 + t E_{beta,2}(-t^beta L) w1`` for ``1 < beta < 2``."""
    if not 1.0 < beta < 2.0:
        raise BetaOutOfRange(f"wave type needs 1 < beta < 2, got {beta}")
    _same_model(field0, field1)
    t = _check_t(t)
    mu = field0.eigenvalues
    coef = field0.coefficients * _ml_factor(beta, 1.0, t, mu) + field1.coefficients * (
        t * _ml_factor(beta, 2.0, t, mu)
    )
    return SpectralField(field0.model, field0.grid, coef, mu, field0.real and field1.real)


@dataclass(frozen=True)
class EvolutionRequest:
    beta: float
    t_grid: tuple
    kind: str = "heat"

    def __post_init__(self):
        t = tuple(float(x) for x in np.atleast_1d(self.t_grid))
        object.__setattr__(self, "t_grid", t)
        if self.kind == "heat":
            if not 0.0 < self.beta <= 1.0:
                raise BetaOutOfRange("heat type needs 0 < beta <= 1")
        elif self.kind == "wave":
            if not 1.0 < self.beta < 2.0:
                raise BetaOutOfRange("wave type needs 1 < beta < 2")
        else:
            raise ValueError(f"unknown equation type {self.kind!r}")
        if not t or any(x < 0 or not math.isfinite(x) for x in t) or any(np.diff(t) <= 0):
            raise ValueError("t_grid must be nonempty, ascending and nonnegative")


def evolve(request, field0, field1=None):
    """List of ``(t, field)`` over ``request.t_grid``."""
    if request.kind == "heat":
        if field1 is not None:
            raise ValueError("an initial velocity is only accepted for 1 < beta < 2")
        return [(t, heat_propagate(field0, request.beta, t)) for t in request.t_grid]
    if field1 is None:
        raise MissingW1("wave type needs an initial velocity field")
    return [(t, wave_propagate(field0, field1, request.beta, t)) for t in request.t_grid]


def preset_data(model, name, shape=None, sigma=None, seed=0):
    """Named initial data on the model's grid.

    ``gaussian`` (width ``sigma`` around the identity), ``dirac`` (unit mass at
    the identity, i.e. ``1 / cell`` at one sample), ``random-mean-zero``
    (standard normal samples with the mean removed), and the mean-zero
    variants ``gaussian-mean-zero``/``dirac-mean-zero`` used by decay studies
    on compact models.
    """
    model = build_model(model)
    grid = grid_for(model, shape)
    if name.startswith("random"):
        f = np.random.default_rng(seed).standard_normal(grid.shape)
        return f - f.mean()
    if model.kind == "cayley":
        if name.startswith("dirac"):
            f = np.zeros(grid.shape)
            f[grid.origin] = 1.0
        else:
            raise ValueError(f"preset {name!r} is not defined on finite groups")
    elif name.startswith("gaussian"):
        sigma = 1.0 if sigma is None else float(sigma)
        r2 = np.zeros(grid.shape)
        for axis, (x, L, o) in enumerate(zip(grid.coords, grid.lengths, grid.origin)):
            d = x - x[o]
            d = (d + L / 2) % L - L / 2
            shp = [1] * len(grid.shape)
            shp[axis] = -1
            r2 = r2 + (d**2).reshape(shp)
        n = len(grid.shape)
        f = np.exp(-r2 / (2 * sigma**2)) / (2 * math.pi * sigma**2) ** (n / 2)
    elif name.startswith("dirac"):
        f = np.zeros(grid.shape)
        f[grid.origin] = 1.0 / grid.cell
    else:
        raise ValueError(f"unknown data preset {name!r}")
    if name.endswith("mean-zero"):
        f = f - f.mean()
    return f
