"""scikit-learn style front ends.

``FractionalPropagator`` is a transformer: each row of ``X`` is one field
sampled on the model grid (flattened), and ``transform`` returns the evolved
rows. ``PowerLawRegressor`` fits ``y = c x^lambda`` in log-log coordinates and
is what :func:`fracdecay.spectral_model.fit_lambda` computes for counting
functions. ``DecayRateEstimator`` wraps :func:`fracdecay.norms_decay.decay_study`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from fracdecay._fit import loglog_fit
from fracdecay.norms_decay import decay_study
from fracdecay.propagator import analyze, grid_for, heat_propagate, synthesize, wave_propagate
from fracdecay.spectral_model import build_model

__all__ = ["DecayRateEstimator", "FractionalPropagator", "PowerLawRegressor"]


class FractionalPropagator(TransformerMixin, BaseEstimator):
    """Evolve fields by the heat-type (``beta <= 1``) or wave-type solution operator.

    For ``1 < beta < 2`` each row holds the initial position followed by the
    initial velocity, so ``X`` has twice the grid size in columns.
    """

    def __init__(self, model="torus:1", beta=0.5, t=1.0, grid_shape=None):
        self.model = model
        self.beta = beta
        self.t = t
        self.grid_shape = grid_shape

    def _wave(self):
        return self.beta > 1.0

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if not 0.0 < self.beta < 2.0:
            raise ValueError("beta must lie in (0, 2)")
        if not self.t >= 0.0:
            raise ValueError("t must be nonnegative")
        self.model_ = build_model(self.model)
        width = X.shape[1] // 2 if self._wave() else X.shape[1]
        if self._wave() and X.shape[1] % 2:
            raise ValueError("wave type needs position and velocity columns of equal width")
        shape = self.grid_shape if self.grid_shape is not None else (width,)
        self.grid_ = grid_for(self.model_, shape)
        if self.grid_.size != width:
            raise ValueError(f"rows have {width} samples per field, grid has {self.grid_.size}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        size = self.grid_.size
        out = np.empty((X.shape[0], size))
        for i, row in enumerate(X):
            f0 = analyze(self.model_, row[:size].reshape(self.grid_.shape))
            if self._wave():
                f1 = analyze(self.model_, row[size:].reshape(self.grid_.shape))
                w = wave_propagate(f0, f1, self.beta, self.t)
            else:
                w = heat_propagate(f0, self.beta, self.t)
            out[i] = synthesize(w).ravel()
        return out


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log y = log c + lambda log x`` on positive data."""

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if X.shape[1] != 1:
            raise ValueError("PowerLawRegressor takes a single feature")
        if np.any(X <= 0) or np.any(y <= 0):
            raise ValueError("power-law fitting needs positive x and y")
        slope, intercept, r2, _ = loglog_fit(X[:, 0], y)
        self.exponent_ = slope
        self.coef_ = float(np.exp(intercept))
        self.r_squared_ = r2
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "exponent_")
        X = check_array(X, dtype=float)
        return self.coef_ * X[:, 0] ** self.exponent_


class DecayRateEstimator(BaseEstimator):
    """Measured ``L^p -> L^q`` decay slope of an evolved initial datum.

    ``fit(X)`` takes one row: the initial datum, or position then velocity
    for ``beta > 1``.
    """

    def __init__(self, model="euclidean:1", beta=0.5, p=4 / 3, q=4.0, t_grid=None, window=None):
        self.model = model
        self.beta = beta
        self.p = p
        self.q = q
        self.t_grid = t_grid
        self.window = window

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[0] != 1:
            raise ValueError("pass a single initial datum as one row")
        model = build_model(self.model)
        row = X[0]
        data1 = None
        if self.beta > 1.0:
            half = row.size // 2
            row, data1 = row[:half], row[half:]
        t_grid = np.geomspace(0.1, 1000.0, 25) if self.t_grid is None else self.t_grid
        study = decay_study(
            model, self.beta, self.p, self.q, row, data1, t_grid=t_grid, window=self.window
        )
        self.study_ = study
        self.slope_ = study.fit.slope
        self.target_ = study.target
        self.n_features_in_ = X.shape[1]
        return self
