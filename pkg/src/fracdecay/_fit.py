"""Least-squares line in log-log coordinates."""

from __future__ import annotations

import numpy as np


def loglog_fit(x, y):
    """Fit ``log y = intercept + slope * log x``.

    Returns ``(slope, intercept, r_squared, residuals)`` with residuals in
    natural-log units.
    """
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0), resid
