import math

import numpy as np
import pytest

from fracdecay.mlf import mittag_leffler
from fracdecay.norms_decay import (
    HypothesisViolated,
    Multiplier,
    NonMonotonePhiOnContinuousModel,
    RearrangementCurve,
    WindowTooNarrow,
    ZeroModePresent,
    decay_study,
    lorentz_norm,
    lorentz_weak_norm,
    lp_norm,
    select_window,
    singular_function,
    verify_additional_bound,
)
from fracdecay.propagator import grid_for, preset_data
from fracdecay.spectral_model import build_model

Z4 = build_model("cayley:cyclic:4")
EXP = Multiplier(lambda v: np.exp(-v), True, "exp")


def brute_weak_norm(model, phi, r):
    """Enumerate one value per eigenvector; the sup is approached just left of t = k."""
    vals = np.sort(np.abs(phi(model.vector_eigenvalues)))[::-1]
    k = np.arange(1, vals.size + 1)
    return np.max(k ** (1 / r) * vals)


class TestRearrangement:
    def test_four_cycle_steps(self):
        curve = singular_function(Z4, EXP)
        vals = curve(np.array([0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 10.0]))
        e2, e4 = math.exp(-2), math.exp(-4)
        assert np.allclose(vals, [1.0, e2, e2, e4, e4, 0.0, 0.0], rtol=1e-15)

    def test_distribution_is_inverse(self):
        curve = singular_function(Z4, EXP)
        assert curve.distribution(0.5) == 1.0
        assert curve.distribution(math.exp(-3)) == 3.0
        assert curve.distribution(1.0) == 0.0

    def test_zero_multiplier(self):
        curve = singular_function(Z4, lambda v: np.zeros_like(v))
        assert lorentz_weak_norm(curve, 2) == 0.0

    def test_identity_multiplier(self):
        m = build_model("cayley:dihedral:5")
        curve = singular_function(m, lambda v: np.ones_like(v))
        assert lorentz_weak_norm(curve, 3) == pytest.approx(m.group.order ** (1 / 3), rel=1e-15)

    def test_single_atom(self):
        curve = RearrangementCurve([2.5], [0.4])
        assert lorentz_weak_norm(curve, 2) == pytest.approx(0.4 * math.sqrt(2.5), rel=1e-15)
        assert lorentz_norm(curve, 2) == pytest.approx(0.4 * math.sqrt(2.5), rel=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            RearrangementCurve([1.0, 2.0], [0.1, 0.5])
        with pytest.raises(ValueError):
            RearrangementCurve([2.0, 1.0], [0.5, 0.1])


class TestWeakNorm:
    @pytest.mark.parametrize("desc", ["cayley:cyclic:4", "cayley:dihedral:6", "cayley:s4"])
    @pytest.mark.parametrize("r", [1.0, 2.0, 3.5])
    def test_brute_force(self, desc, r):
        m = build_model(desc)
        phi = lambda v: 1.0 / (1.0 + v)
        brute = brute_weak_norm(m, phi, r)
        assert lorentz_weak_norm(singular_function(m, phi), r) == pytest.approx(brute, rel=1e-12)

    def test_weak_below_strong(self):
        m = build_model("cayley:s4")
        curve = singular_function(m, EXP)
        for r in (1.0, 1.5, 2.0, 4.0):
            assert lorentz_weak_norm(curve, r) <= lorentz_norm(curve, r) * (1 + 1e-14)

    def test_rejects_small_r(self):
        with pytest.raises(ValueError):
            lorentz_weak_norm(singular_function(Z4, EXP), 0.5)


class TestContinuous:
    def test_euclidean_closed_form(self):
        m = build_model("euclidean:1")
        curve = singular_function(m, EXP)
        t = np.array([0.01, 0.3, 1.0])
        assert np.allclose(curve(t), np.exp(-((math.pi * t) ** 2)), rtol=1e-13)
        # sup of t^(1/2) exp(-(pi t)^2) sits at t = 1 / (2 pi)
        exact = math.exp(-0.25) / math.sqrt(2 * math.pi)
        assert lorentz_weak_norm(curve, 2) == pytest.approx(exact, rel=1e-4)

    def test_undeclared_monotonicity(self):
        with pytest.raises(NonMonotonePhiOnContinuousModel):
            singular_function(build_model("euclidean:2"), lambda v: np.exp(-v))

    def test_false_declaration(self):
        bump = Multiplier(lambda v: np.exp(-v) * (1 + 2 * v), True, "bump")
        with pytest.raises(NonMonotonePhiOnContinuousModel):
            singular_function(build_model("euclidean:2"), bump)


class TestAdditionalBound:
    def test_four_cycle_worked_example(self):
        res = verify_additional_bound(Z4, EXP, EXP, 2)
        # lhs over the step ends t = 1, 3, 4; rhs over v = 0, 2, 4 with counts 1, 3, 4.
        # With phi = psi the two enumerations coincide and both peak at the zero mode.
        brute = max(1.0, math.exp(-2) * math.sqrt(3), math.exp(-4) * 2)
        assert res.lhs == brute and res.rhs == brute and res.rhs_at == 0.0 and res.holds

    def test_zero_multiplier(self):
        res = verify_additional_bound(Z4, lambda v: np.zeros_like(v), EXP, 2)
        assert res.lhs == 0.0 and res.holds

    @pytest.mark.parametrize("beta", [0.3, 0.7, 1.0])
    def test_torus_ml_bound(self, beta):
        g = math.gamma(1 + beta)
        phi = Multiplier(lambda v: mittag_leffler(beta, 1.0, -v), True)
        psi = Multiplier(lambda v: 1.0 / (1.0 + v / g), True)
        assert verify_additional_bound(build_model("torus:2:cutoff=2000"), phi, psi, 2.0).holds

    def test_increasing_psi_witness(self):
        bump = Multiplier(lambda v: np.exp(-v) * (1 + 2 * v), False)
        with pytest.raises(HypothesisViolated) as info:
            verify_additional_bound(Z4, EXP, bump, 2)
        assert 0 < info.value.witness <= 0.5

    def test_domination_witness(self):
        with pytest.raises(HypothesisViolated) as info:
            verify_additional_bound(Z4, lambda v: np.ones_like(v), EXP, 2)
        assert info.value.witness == 2.0

    def test_psi_normalization(self):
        with pytest.raises(HypothesisViolated):
            verify_additional_bound(Z4, EXP, lambda v: 0.5 * np.exp(-v), 2)


class TestLpNorm:
    @pytest.mark.parametrize("n,p", [(1, 2.0), (2, 3.0)])
    def test_constant_on_torus(self, n, p):
        m = build_model({"kind": "torus", "n": n, "cutoff": 10})
        shape = (16,) * n
        cell = grid_for(m, shape).cell
        assert lp_norm(np.ones(shape), p, cell) == pytest.approx((2 * math.pi) ** (n / p), rel=1e-13)

    def test_indicator_on_four_cycle(self):
        assert lp_norm(preset_data(Z4, "dirac"), 2, 1.0) == 1.0

    @pytest.mark.parametrize("p", [4 / 3, 2.0, 4.0])
    def test_gaussian_closed_form(self, p):
        m = build_model("euclidean:1:box_length=60")
        sigma = 1.5
        g = preset_data(m, "gaussian", (4096,), sigma=sigma)
        exact = (2 * math.pi * sigma**2) ** (-0.5 + 0.5 / p) * p ** (-0.5 / p)
        assert lp_norm(g, p, grid_for(m, (4096,)).cell) == pytest.approx(exact, rel=1e-12)

    def test_sup(self):
        assert lp_norm([1.0, -3.0, 2.0], math.inf, 0.1) == 3.0


class TestWindow:
    def test_picks_flat_stretch(self):
        t = np.geomspace(1e-2, 1e3, 31)
        s = np.where(t < 1.0, -2.0 * t, -0.5)
        i, j = select_window(t, s)
        assert t[i] >= 1.0 and j == t.size

    def test_too_narrow(self):
        t = np.geomspace(1.0, 10.0, 10)
        with pytest.raises(WindowTooNarrow):
            select_window(t, np.full(10, -1.0))


EUC = build_model("euclidean:1:box_length=400")
SHAPE = (8192,)


@pytest.fixture(scope="module")
def near_dirac():
    return preset_data(EUC, "gaussian-mean-zero", SHAPE, sigma=0.05)


class TestDecayStudy:
    def test_requires_mean_zero(self):
        data = preset_data(EUC, "gaussian", SHAPE, sigma=0.05)
        with pytest.raises(ZeroModePresent):
            decay_study(EUC, 0.5, 4 / 3, 4, data, t_grid=np.geomspace(0.1, 1e3, 25))

    def test_fixed_window_too_narrow(self, near_dirac):
        with pytest.raises(WindowTooNarrow):
            decay_study(EUC, 0.5, 4 / 3, 4, near_dirac, t_grid=np.geomspace(0.1, 1e3, 25), window=(0, 5))

    def test_l2_norm_frozen_at_short_times(self):
        # for t much smaller than sigma^2 the heat flow has not yet moved a wide Gaussian
        data = preset_data(EUC, "gaussian-mean-zero", SHAPE, sigma=3.0)
        study = decay_study(EUC, 1.0, 2, 2, data, t_grid=np.geomspace(1e-3, 1e-1, 21), window=(0, 21))
        assert study.target == 0.0 and abs(study.fit.slope) < 1e-2

    @pytest.mark.parametrize("beta,q", [(0.5, 4.0), (0.8, 4.0)])
    def test_fixed_data_follow_integrable_exponent(self, near_dirac, beta, q):
        # integrable data decay with the p = 1 exponent whatever p is reported
        study = decay_study(EUC, beta, 4 / 3, q, near_dirac, t_grid=np.geomspace(0.1, 1e3, 25))
        expected = -beta * 0.5 * (1 - 1 / q)
        assert study.fit.slope == pytest.approx(expected, rel=0.05)
        assert study.lambda_used == pytest.approx(0.5, rel=1e-9)

    def test_wave_normalizer(self, near_dirac):
        t = np.geomspace(0.1, 1e3, 25)
        study = decay_study(EUC, 1.5, 4 / 3, 4, np.zeros(SHAPE), near_dirac, t_grid=t)
        n1 = lp_norm(near_dirac, 4 / 3, grid_for(EUC, SHAPE).cell)
        assert np.allclose(study.normalizer, t * n1, rtol=1e-14)
        assert len(study.rows()) == t.size
