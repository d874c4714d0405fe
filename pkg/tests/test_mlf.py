import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import erfc, erfcx, rgamma

from fracdecay import _regimes
from fracdecay.mlf import (
    CancellationLoss,
    MLParams,
    NotInAsymptoticRegime,
    UnsupportedParameters,
    mittag_leffler,
    ml_asymptotic,
    ml_eval,
    ml_integral,
    ml_series,
)


def envelope(alpha, delta, r):
    """Size of the leading algebraic term plus the oscillating pole part."""
    env = abs(float(rgamma(delta - alpha))) / r**alpha
    if alpha > 1:
        env += (2 / alpha) * r ** (1 - delta) * math.exp(r * math.cos(math.pi / alpha))
    return max(env, 1e-300)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestClosedForms:
    def test_exponential(self):
        assert rel(ml_eval(1.0, 1.0, -1.0).value, math.exp(-1.0)) < 1e-15

    def test_erfc(self):
        assert rel(ml_eval(0.5, 1.0, -1.0).value, math.e * erfc(1.0)) < 1e-14

    def test_cosine_zero(self):
        assert abs(ml_eval(2.0, 1.0, -((math.pi / 2) ** 2)).value) < 1e-14

    @pytest.mark.parametrize("x", [1e-3, 0.7, 5.0, 40.0, 400.0, 1e4, 1e6])
    def test_expm1_ratio(self, x):
        assert rel(ml_eval(1.0, 2.0, -x).value, -math.expm1(-x) / x) < 1e-13

    @pytest.mark.parametrize("x", [1e-2, 1.0, 10.0, 1e3, 1e6])
    def test_erfcx_large(self, x):
        assert rel(ml_eval(0.5, 1.0, -x).value, float(erfcx(x))) < 1e-12

    def test_zero_argument(self):
        assert ml_eval(0.7, 2.5, 0.0).value == pytest.approx(1.0 / math.gamma(2.5), rel=1e-15)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5, 1.9, 2.0])
@pytest.mark.parametrize("delta", [1.0, 2.0])
def test_against_extended_precision(alpha, delta, ml_oracle):
    for r in (0.05, 0.7, 3.0, 5.5, 8.0, 15.0, 30.0, 45.0):
        z = -(r**alpha)
        got = ml_eval(alpha, delta, z)
        ref = ml_oracle(alpha, delta, z)
        # oscillating values for alpha > 1 can pass near zero: scale by the envelope
        scale = max(abs(ref), envelope(alpha, delta, r))
        assert abs(got.value - ref) / scale < 1e-10, (alpha, delta, z, got.regime)


@pytest.mark.parametrize("delta", [0.5, 1.5, 2.7])
def test_noninteger_delta(delta, ml_oracle):
    for alpha in (0.4, 1.0, 1.6):
        for r in (0.5, 4.0, 12.0, 50.0):
            z = -(r**alpha)
            assert rel(ml_eval(alpha, delta, z).value, ml_oracle(alpha, delta, z)) < 1e-9


class TestRegimes:
    def test_dispatch_labels(self):
        assert ml_eval(0.5, 1.0, -1.0).regime == "series"
        assert ml_eval(0.5, 1.0, -3.5).regime == "integral"
        assert ml_eval(0.5, 1.0, -100.0).regime == "asymptotic"

    @pytest.mark.parametrize("alpha", [0.3, 0.8, 1.2, 1.7])
    def test_integral_matches_series_in_overlap(self, alpha):
        for r in (1.0, 2.0, 3.5):
            z = -(r**alpha)
            assert abs(ml_integral(alpha, 1.0, z).value - ml_series(alpha, 1.0, z).value) < 1e-11

    @pytest.mark.parametrize("alpha", [0.3, 0.8, 1.2, 1.7])
    def test_integral_matches_asymptotic_in_overlap(self, alpha):
        for r in (40.0, 55.0):
            z = -(r**alpha)
            a, b = ml_integral(alpha, 2.0, z).value, ml_asymptotic(alpha, 2.0, z).value
            assert abs(a - b) <= 1e-9 * max(abs(b), 1e-3 / r**alpha)

    def test_asymptotic_two_terms(self):
        res = ml_asymptotic(1.5, 1.0, -1000.0, num_terms=2)
        assert rel(res.value, ml_integral(1.5, 1.0, -1000.0).value) < 1e-8

    def test_asymptotic_single_term(self):
        res = ml_asymptotic(0.5, 1.0, -100.0, num_terms=1)
        assert res.value == pytest.approx(1 / (100 * math.sqrt(math.pi)), rel=1e-14)
        true = float(erfcx(100.0))
        assert abs(res.value - true) <= res.abs_error_estimate

    def test_asymptotic_rejects_small_argument(self):
        with pytest.raises(NotInAsymptoticRegime):
            ml_asymptotic(0.5, 1.0, -2.0)

    def test_series_rejects_large_argument(self):
        with pytest.raises(ValueError):
            ml_series(0.5, 1.0, -1e3)

    def test_series_reports_cancellation(self):
        with pytest.raises(CancellationLoss):
            ml_series(1.0, 1.0, -45.0)

    def test_error_estimate_bounds_true_error(self, ml_oracle):
        for alpha, z in ((0.5, -0.5), (0.8, -4.0), (1.3, -30.0), (0.3, -3.0)):
            res = ml_eval(alpha, 1.0, z)
            assert abs(res.value - ml_oracle(alpha, 1.0, z)) <= max(res.abs_error_estimate, 1e-16)

    def test_threshold_table_is_monotone(self):
        for lo, hi, rs, ra in _regimes.REGIME_TABLE:
            assert lo < hi and 0 < rs < ra

    def test_thresholds_reject_out_of_range(self):
        with pytest.raises(ValueError):
            _regimes.thresholds(2.5)


class TestValidation:
    @pytest.mark.parametrize("args", [(0.0, 1.0, -1.0), (2.5, 1.0, -1.0), (0.5, 0.0, -1.0), (0.5, 1.0, 1.0), (0.5, 1.0, math.nan)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            ml_eval(*args)

    def test_params_dataclass(self):
        with pytest.raises(ValueError):
            MLParams(alpha=3.0, delta=1.0, z=-1.0)

    def test_outside_box_warns(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", UnsupportedParameters)
            with pytest.raises(UnsupportedParameters):
                ml_eval(0.5, 3.0, -1.0)

    def test_outside_box_flags_result(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert not ml_eval(0.5, 1.0, -1e7).guaranteed
        assert ml_eval(0.5, 1.0, -1e5).guaranteed


class TestVectorized:
    def test_matches_scalar(self):
        z = -np.geomspace(1e-4, 1e7, 300)
        for alpha in (0.2, 0.9, 1.0, 1.4, 2.0):
            vec = mittag_leffler(alpha, 1.0, z)
            ref = np.array([ml_eval(alpha, 1.0, x).value for x in z])
            scale = np.maximum(np.abs(ref), 1e-12 * np.abs(ref).max() / 1e6)
            assert np.max(np.abs(vec - ref) / np.maximum(scale, 1e-300)) < 1e-10

    def test_shape_and_duplicates(self):
        z = -np.array([[1.0, 2.0], [1.0, 0.0]])
        out = mittag_leffler(0.5, 1.0, z)
        assert out.shape == (2, 2) and out[0, 0] == out[1, 0] and out[1, 1] == 1.0

    def test_error_output(self):
        _, err = mittag_leffler(0.5, 1.0, [-1.0, -1e3], return_error=True)
        assert np.all(err >= 0) and np.all(err < 1e-12)

    def test_runtime_of_accuracy_grid(self):
        import time

        z = np.concatenate([[0.0], -np.logspace(-6, 6, 499)])
        start = time.perf_counter()
        for alpha in (0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.9):
            for delta in (1.0, 2.0):
                mittag_leffler(alpha, delta, z)
        assert time.perf_counter() - start < 10.0


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.1, 2.0),
    delta=st.floats(0.5, 3.0),
    x=st.floats(0.0, 1e4),
)
def test_shift_recurrence(alpha, delta, x):
    # E_{a,d}(z) = 1/Gamma(d) + z E_{a,a+d}(z)
    lhs = ml_eval(alpha, delta, -x).value
    rhs = 1.0 / math.gamma(delta) - x * ml_eval(alpha, alpha + delta, -x).value
    scale = max(1.0 / math.gamma(delta), x * abs(ml_eval(alpha, alpha + delta, -x).value), 1e-12)
    assert abs(lhs - rhs) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(beta=st.floats(0.05, 1.0), x=st.floats(0.0, 1e5), y=st.floats(0.0, 1e5))
def test_completely_monotone_bounds(beta, x, y):
    # 0 < E_beta(-x) <= 1, nonincreasing, and dominated by 1/(1 + x/Gamma(1+beta))
    lo, hi = sorted((x, y))
    a, b = ml_eval(beta, 1.0, -lo).value, ml_eval(beta, 1.0, -hi).value
    assert 0.0 <= b <= a * (1 + 1e-12) and a <= 1.0 + 1e-15  # e^-x may underflow
    assert a <= 1.0 / (1.0 + lo / math.gamma(1.0 + beta)) * (1 + 1e-10)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(1.01, 1.99), mu=st.floats(0.01, 100.0), t=st.floats(0.01, 10.0))
def test_running_integral_identity(beta, mu, t):
    quad, _ = integrate.quad(lambda s: ml_eval(beta, 1.0, -(s**beta) * mu).value, 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=400)
    closed = t * ml_eval(beta, 2.0, -(t**beta) * mu).value
    assert abs(quad - closed) <= 1e-8
