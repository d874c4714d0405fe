"""Frozen dispatch thresholds for the Mittag-Leffler evaluator.

Thresholds are expressed in the scaled variable ``r = |z| ** (1 / alpha)``,
the modulus of the poles of ``s**(alpha - delta) / (s**alpha - z)``.  In that
variable the series condition number grows like ``exp(r)`` (``exp(2 r)`` when
``alpha`` is near one) and the optimally truncated asymptotic expansion has
remainder ``~exp(-r)``, so one band table covers all of ``alpha in (0, 2]``.

Each row is ``(alpha_lo, alpha_hi, r_series_max, r_asymptotic_min)``; bands
are half-open on the right except the last.  Validated by the regime
consistency tests in ``tests/test_mlf.py``.
"""

REGIME_TABLE = (
    (0.0, 0.85, 6.0, 40.0),
    (0.85, 1.15, 4.0, 40.0),
    (1.15, 2.0, 6.0, 40.0),
)

# guarded radius for the plain power series
SERIES_MAX_ABS_Z = 50.0
# largest accepted sum(|t_k|) / |sum(t_k)|
SERIES_MAX_CANCELLATION = 1.0e6

# box where ml_eval guarantees 1e-10 relative accuracy
GUARANTEED_ALPHA = (0.1, 2.0)
GUARANTEED_DELTA = (1.0, 2.0)
GUARANTEED_MIN_Z = -1.0e6


def thresholds(alpha):
    """Return ``(r_series_max, r_asymptotic_min)`` for ``alpha``."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha={alpha!r} outside (0, 2]")
    for lo, hi, r_s, r_a in REGIME_TABLE:
        if lo <= alpha < hi:
            return r_s, r_a
    return REGIME_TABLE[-1][2:]
