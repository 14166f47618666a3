import math

import numpy as np
import pytest

from fracfam.specfun import (
    MLParams,
    PoleError,
    WrightParams,
    g_kernel,
    gamma_fn,
    mittag_leffler,
    mittag_leffler_neg,
    recip_gamma,
    subordination_density,
    wright_phi,
    wright_tail_cutoff,
    _wright_log_term,
)

from oracles import ml_series_oracle, wright_series_oracle


class TestGamma:
    def test_known_values(self):
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-13)
        assert gamma_fn(0.5) == pytest.approx(1.772453850905516, rel=1e-13)
        assert gamma_fn(-0.5) == pytest.approx(-3.544907701811032, rel=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -17.0])
    def test_pole_error(self, x):
        with pytest.raises(PoleError):
            gamma_fn(x)

    def test_twelve_digits_against_stdlib(self):
        xs = np.concatenate([np.linspace(0.02, 50.0, 400), -np.linspace(0.1, 49.7, 167)])
        for x in xs:
            if x <= 0.0 and x == math.floor(x):
                continue
            assert gamma_fn(float(x)) == pytest.approx(math.gamma(float(x)), rel=1e-12)

    def test_recurrence_property(self):
        rng = np.random.default_rng(1234)
        for x in rng.uniform(0.1, 30.0, size=200):
            assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-12)

    def test_recip_gamma_zero_at_poles(self):
        assert recip_gamma(0.0) == 0.0
        assert recip_gamma(-3.0) == 0.0
        assert recip_gamma(2.0) == pytest.approx(1.0, rel=1e-13)


class TestGKernel:
    def test_examples(self):
        assert g_kernel(1.0, 0.7) == pytest.approx(1.0, rel=1e-13)
        assert g_kernel(2.0, 0.3) == pytest.approx(0.3, rel=1e-13)
        assert g_kernel(1.5, 1.0) == pytest.approx(1.128379167095513, rel=1e-13)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            g_kernel(0.0, 1.0)
        with pytest.raises(ValueError):
            g_kernel(-1.0, 1.0)
        with pytest.raises(ValueError):
            g_kernel(0.5, 0.0)  # singular at t=0 for alpha < 1
        with pytest.raises(ValueError):
            g_kernel(1.5, -0.1)

    def test_t_zero_for_alpha_at_least_one(self):
        assert g_kernel(1.0, 0.0) == 1.0
        assert g_kernel(1.7, 0.0) == 0.0


class TestMittagLeffler:
    def test_exponential_case(self):
        assert mittag_leffler(MLParams(1.0, 1.0), 1.0) == pytest.approx(
            2.718281828459045, rel=1e-12
        )

    def test_cosine_zero(self):
        val = mittag_leffler(MLParams(2.0, 1.0), -((np.pi / 2.0) ** 2))
        assert abs(val) <= 1e-10

    def test_frozen_oracle_value(self):
        # frozen from ml_series_oracle(1.5, 1.5, -2.0)
        frozen = 0.41340965905490819621
        assert ml_series_oracle(1.5, 1.5, -2.0) == pytest.approx(frozen, rel=1e-14)
        assert mittag_leffler(MLParams(1.5, 1.5), -2.0) == pytest.approx(frozen, rel=1e-11)

    def test_exp_reduction_grid(self):
        zs = np.linspace(-4.0, 2.0, 50)
        for z in zs:
            assert mittag_leffler(MLParams(1.0, 1.0), float(z)) == pytest.approx(
                math.exp(float(z)), rel=1e-10
            )

    def test_cos_reduction_grid(self):
        ts = np.linspace(0.0, 6.0, 50)
        for t in ts:
            want = math.cos(float(t))
            got = mittag_leffler(MLParams(2.0, 1.0), -float(t) ** 2)
            assert got == pytest.approx(want, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize(
        "alpha,beta,x",
        [
            (1.2, 1.0, 7.0),
            (1.2, 2.0, 30.0),
            (1.5, 1.5, 12.0),
            (1.5, 1.0, 100.0),
            (1.75, 2.0, 50.0),
            (1.9, 1.9, 8.0),
            (1.9, 1.0, 1000.0),
            (2.0, 2.0, 44.0),
        ],
    )
    def test_negative_axis_against_oracle(self, alpha, beta, x):
        want = ml_series_oracle(alpha, beta, -x)
        got = mittag_leffler(MLParams(alpha, beta), -x)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_vectorized_matches_scalar(self):
        xs = np.array([0.0, 0.5, 4.9, 5.1, 40.0, 2000.0])
        table = mittag_leffler_neg(1.6, 1.0, xs)
        for x, v in zip(xs, table):
            assert v == pytest.approx(mittag_leffler(MLParams(1.6, 1.0), -float(x)), rel=1e-13)

    def test_positive_overflow_cap(self):
        with pytest.raises(OverflowError):
            mittag_leffler(MLParams(1.0, 1.0), 1e6)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            MLParams(0.0, 1.0)
        with pytest.raises(ValueError):
            MLParams(2.5, 1.0)
        with pytest.raises(ValueError):
            MLParams(1.5, 0.0)


class TestWright:
    def test_value_at_zero(self):
        assert wright_phi(WrightParams(0.5), 0.0) == pytest.approx(
            0.5641895835477563, rel=1e-12
        )

    def test_half_gamma_closed_form(self):
        # phi_{1/2}(z) = exp(-z^2/4)/sqrt(pi)
        for z in np.linspace(0.0, 6.0, 25):
            want = math.exp(-z * z / 4.0) / math.sqrt(math.pi)
            assert wright_phi(WrightParams(0.5), float(z)) == pytest.approx(want, rel=1e-9)

    def test_frozen_oracle_value(self):
        # frozen from wright_series_oracle(0.75, 2.0)
        frozen = 0.22514007014896749913
        assert wright_series_oracle(0.75, 2.0) == pytest.approx(frozen, rel=1e-14)
        assert wright_phi(WrightParams(0.75), 2.0) == pytest.approx(frozen, rel=1e-9)

    @pytest.mark.parametrize("gamma,z", [(0.6, 3.1), (0.875, 1.9), (0.9, 1.4)])
    def test_tail_against_oracle(self, gamma, z):
        want = wright_series_oracle(gamma, z)
        assert wright_phi(WrightParams(gamma), z) == pytest.approx(want, rel=1e-9)

    def test_term_recurrence_consistency(self):
        # successive terms satisfy t_{n+1}/t_n = -z Gamma(1-g(n+1)) / ((n+1) Gamma(1-g(n+2)))
        g, z = 0.65, 1.7
        for n in range(0, 12):
            lt0, s0 = _wright_log_term(g, z, n)
            lt1, s1 = _wright_log_term(g, z, n + 1)
            if s0 == 0.0 or s1 == 0.0:
                continue
            got_ratio = s1 * math.exp(lt1) / (s0 * math.exp(lt0))
            want_ratio = (
                -z / (n + 1.0) * recip_gamma(1.0 - g * (n + 2)) / recip_gamma(1.0 - g * (n + 1))
            )
            assert got_ratio == pytest.approx(want_ratio, rel=1e-10)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            wright_phi(WrightParams(0.5), -0.1)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            WrightParams(0.0)
        with pytest.raises(ValueError):
            WrightParams(1.0)

    def test_tail_cutoff_envelope(self):
        z = wright_tail_cutoff(0.75, 1e-10)
        assert wright_phi(WrightParams(0.75), z) < 1e-9
        assert wright_phi(WrightParams(0.75), 0.5 * z) > wright_phi(WrightParams(0.75), z)


class TestSubordinationDensity:
    def test_reduces_to_phi_at_origin(self):
        assert subordination_density(0.5, 1.0, 0.0) == pytest.approx(
            0.5641895835477563, rel=1e-12
        )

    def test_time_scaling(self):
        assert subordination_density(0.5, 4.0, 0.0) == pytest.approx(
            0.2820947917738781, rel=1e-12
        )

    def test_frozen_oracle_value(self):
        # t=1 makes the density phi_{0.75}(s); frozen from wright_series_oracle(0.75, 1.5)
        frozen = 0.54873786222645633374
        assert wright_series_oracle(0.75, 1.5) == pytest.approx(frozen, rel=1e-14)
        assert subordination_density(0.75, 1.0, 1.5) == pytest.approx(frozen, rel=1e-9)

    def test_nonnegative_on_grid(self):
        for s in np.linspace(0.0, 3.0, 30):
            assert subordination_density(0.8, 0.7, float(s)) >= 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            subordination_density(0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            subordination_density(0.5, 1.0, -1.0)


def test_wright_normalization_unit_mass():
    # integral over s of the subordination density is 1 (quadrature + tail cut)
    from numpy.polynomial.legendre import leggauss

    xg, wg = leggauss(16)
    for gamma in (0.6, 0.75, 0.9):
        for t in (0.5, 1.0, 2.0):
            z_max = wright_tail_cutoff(gamma, 1e-12)
            edges = np.linspace(0.0, z_max * t ** gamma, 41)
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                for x_, w_ in zip(xg, wg):
                    total += half * w_ * subordination_density(gamma, t, mid + half * x_)
            assert abs(total - 1.0) <= 1e-6
