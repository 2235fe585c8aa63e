import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from vortexnuc.errors import DomainError, HypothesisError
from vortexnuc.exit_analytics import (BoundsReport, GammaCoords, ParameterFamily, Regime,
                                      RegimeLabel, asymptotic_log_ratio, check_bounds,
                                      classify_regime, combine_independent,
                                      family_with_beta_lnh, gamma_coords, hex_exp_sqrt_family,
                                      hex_log_family, log_exit_probability,
                                      log_nucleation_probability)
from vortexnuc.ode_dynamics import PhysicalParams
from vortexnuc.specialfn import LogValue


def quadrature_exit_probability(z, p, beta):
    """Independent oracle: adaptive quadrature of the scale density."""
    n = 1.0 / (beta * p.log_eps)
    rate = p.lam * p.h_ex / (beta * p.log_eps)

    def density(x):
        return x ** n * math.exp(-rate * x)

    num = quad(density, 0.0, z, epsabs=1e-13, epsrel=1e-11)[0]
    den = quad(density, 0.0, p.a_hat, epsabs=1e-13, epsrel=1e-11)[0]
    return num / den


MODERATE = [
    # (eps, alpha, lam, h_ex, beta*|ln eps|)
    (0.02, 0.5, 1.0, 2.47, 1.0),
    (0.05, 0.5, 1.0, 2.00, 0.8),
    (0.01, 0.5, 1.0, 3.00, 1.2),
]


def make(eps, alpha, lam, h_ex, beta_l):
    p = PhysicalParams(eps=eps, alpha=alpha, lam=lam, h_ex=h_ex)
    return p, beta_l / p.log_eps


class TestGammaCoords:
    @given(st.floats(min_value=1e-6, max_value=0.5),
           st.floats(min_value=0.05, max_value=1.0),
           st.floats(min_value=0.01, max_value=5.0),
           st.floats(min_value=0.1, max_value=30.0),
           st.floats(min_value=1e-3, max_value=10.0))
    @settings(max_examples=200)
    def test_ratio_identity(self, eps, alpha, lam, h_ex, beta):
        p = PhysicalParams(eps=eps, alpha=alpha, lam=lam, h_ex=h_ex)
        c = gamma_coords(p, beta)
        target = lam * h_ex * eps ** alpha
        assert c.m_eps / c.n_eps == pytest.approx(target, rel=1e-12)

    def test_positivity_required(self):
        with pytest.raises(DomainError):
            GammaCoords(m_eps=-1.0, n_eps=1.0)


class TestLogExitProbability:
    def test_boundaries(self):
        p, beta = make(*MODERATE[0])
        assert log_exit_probability(0.0, p, beta).is_zero
        assert log_exit_probability(p.a_hat, p, beta).log_magnitude == 0.0

    def test_outside_interval(self):
        p, beta = make(*MODERATE[0])
        with pytest.raises(DomainError):
            log_exit_probability(-0.01, p, beta)
        with pytest.raises(DomainError):
            log_exit_probability(1.5 * p.a_hat, p, beta)

    def test_requires_noise_and_lambda(self):
        p, beta = make(*MODERATE[0])
        with pytest.raises(DomainError):
            log_exit_probability(0.1, p, 0.0)
        p0 = PhysicalParams(eps=0.02, alpha=0.5, lam=0.0, h_ex=1.0)
        with pytest.raises(DomainError):
            log_exit_probability(0.1, p0, beta)

    @pytest.mark.parametrize("params", MODERATE)
    def test_quadrature_oracle(self, params):
        p, beta = make(*params)
        for frac in (0.1, 0.35, 0.6, 0.9):
            z = frac * p.a_hat
            phi = math.exp(log_exit_probability(z, p, beta).log_magnitude)
            assert abs(phi - quadrature_exit_probability(z, p, beta)) <= 1e-6

    @given(st.floats(min_value=1e-4, max_value=1.0 - 1e-4),
           st.floats(min_value=1e-4, max_value=1.0 - 1e-4))
    @settings(max_examples=200)
    def test_strictly_monotone(self, f1, f2):
        if f1 == f2:
            return
        p, beta = make(*MODERATE[0])
        lo, hi = sorted((f1, f2))
        v_lo = log_exit_probability(lo * p.a_hat, p, beta).log_magnitude
        v_hi = log_exit_probability(hi * p.a_hat, p, beta).log_magnitude
        assert v_lo < v_hi

    def test_satisfies_exit_equation(self):
        # centered differences of phi against beta*phi'' - b*phi' = 0
        p, beta = make(*MODERATE[0])
        delta = p.a_hat / 2500.0
        pts = np.linspace(0.15 * p.a_hat, 0.85 * p.a_hat, 20)
        for z in pts:
            f = [math.exp(log_exit_probability(z + k * delta, p, beta).log_magnitude)
                 for k in (-1, 0, 1)]
            d1 = (f[2] - f[0]) / (2.0 * delta)
            d2 = (f[2] - 2.0 * f[1] + f[0]) / delta ** 2
            b = -p.c_eps + 1.0 / (p.log_eps * z)
            assert abs(beta * d2 - b * d1) <= 1e-4 * abs(beta * d2)

    def test_deep_regime_stays_finite(self):
        p = PhysicalParams(eps=1e-12, alpha=0.5, lam=1.0, h_ex=27.63)
        beta = 0.01 / p.log_eps  # n_eps = 100: far below the double-precision floor
        lv = log_exit_probability(p.initial_distance, p, beta)
        assert math.isfinite(lv.log_magnitude)
        assert lv.log_magnitude < -800.0


class TestNucleationProbability:
    def test_combine_frozen_value(self):
        # oracle: 40-digit evaluation of 1 - (1 - 1e-6)**100
        log_n, n_val = combine_independent(LogValue.of(1e-6), math.log(100.0))
        assert n_val == pytest.approx(9.999505016169608e-5, rel=1e-12)
        assert log_n.log_magnitude == pytest.approx(math.log(9.999505016169608e-5), rel=1e-12)

    def test_certain_and_null_limits(self):
        assert combine_independent(LogValue(0.0), 5.0) == (LogValue(0.0), 1.0)
        log_n, n_val = combine_independent(LogValue(-900.0), math.log(10.0))
        assert n_val == pytest.approx(math.exp(-900.0 + math.log(10.0)))
        assert log_n.log_magnitude == pytest.approx(-900.0 + math.log(10.0))

    def test_saturated_start(self):
        # eps**alpha = a_hat makes the single-vortex escape certain
        eps, alpha = 0.01, 0.5
        p = PhysicalParams(eps=eps, alpha=alpha, lam=1.0, h_ex=eps ** -alpha)
        log_n, n_val = log_nucleation_probability(p, 0.1)
        assert n_val == 1.0
        assert log_n.log_magnitude == 0.0

    def test_start_above_equilibrium_rejected(self):
        p = PhysicalParams(eps=0.01, alpha=0.5, lam=2.0, h_ex=20.0)
        assert p.initial_distance > p.a_hat
        with pytest.raises(DomainError):
            log_nucleation_probability(p, 0.1)

    def test_matches_linear_combination(self):
        p, beta = make(*MODERATE[1])
        phi = math.exp(log_exit_probability(p.initial_distance, p, beta).log_magnitude)
        k = p.eps ** -p.alpha
        _, n_val = log_nucleation_probability(p, beta)
        assert n_val == pytest.approx(-math.expm1(k * math.log1p(-phi)), rel=1e-12)


class TestAsymptoticLogRatio:
    def test_unit_field_strength(self):
        p = PhysicalParams(eps=0.01, alpha=0.5, lam=0.5, h_ex=2.0)  # lam*h_ex = 1
        for beta in (0.1, 0.5, 2.0):
            assert asymptotic_log_ratio(p, beta) == pytest.approx(-p.alpha / beta, rel=1e-13)

    def test_diverges_for_small_beta(self):
        # ln(lam h)/|ln eps| < alpha drives the ratio to -inf as beta -> 0
        p = PhysicalParams(eps=1e-6, alpha=0.5, lam=1.0, h_ex=3.0)
        assert math.log(p.lam * p.h_ex) / p.log_eps < p.alpha
        vals = [asymptotic_log_ratio(p, b) for b in (0.5, 0.05, 0.005)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < -50.0

    @pytest.mark.parametrize("params", MODERATE)
    def test_within_bracket_width(self, params):
        p, beta = make(*params)
        coords = gamma_coords(p, beta)
        log_phi = log_exit_probability(p.initial_distance, p, beta).log_magnitude
        gap = abs(asymptotic_log_ratio(p, beta) - (log_phi + p.alpha * p.log_eps))
        assert gap <= coords.n_eps + coords.m_eps


class TestClassifyRegime:
    def test_no_nucleation_case(self):
        fam = family_with_beta_lnh(hex_exp_sqrt_family(), 0.3)
        regime = classify_regime(fam, alpha=0.5)
        assert regime.label is RegimeLabel.NO_NUCLEATION
        assert regime.limit_value == pytest.approx(0.3)

    def test_nucleation_case(self):
        fam = family_with_beta_lnh(hex_exp_sqrt_family(), 1.0)
        regime = classify_regime(fam, alpha=0.5)
        assert regime.label is RegimeLabel.NUCLEATION

    def test_transitional_case(self):
        fam = family_with_beta_lnh(hex_log_family(), 0.5)
        assert classify_regime(fam, alpha=0.5).label is RegimeLabel.TRANSITIONAL

    def test_probe_based_limit(self):
        # same family without the declared limit: probe must settle on it
        base = hex_log_family(2.0)
        fam = ParameterFamily(h_ex=base, beta=lambda e: 0.3 / math.log(base(e)), name="probe")
        regime = classify_regime(fam, alpha=0.5)
        assert regime.label is RegimeLabel.NO_NUCLEATION
        assert regime.limit_value == pytest.approx(0.3, abs=1e-6)

    def test_power_law_field_rejected(self):
        fam = ParameterFamily(h_ex=lambda e: 1.0 / e, beta=lambda e: 0.1, name="power")
        with pytest.raises(HypothesisError):
            classify_regime(fam, alpha=0.5)

    def test_nonvanishing_beta_rejected(self):
        fam = ParameterFamily(h_ex=hex_exp_sqrt_family(),
                              beta=lambda e: 1.0, name="const-beta", beta_lnh_limit=None)
        # beta*ln(h_ex) grows without settling
        with pytest.raises(HypothesisError):
            classify_regime(fam, alpha=0.5)

    def test_unsettled_probe_rejected(self):
        fam = ParameterFamily(h_ex=hex_log_family(),
                              beta=lambda e: 1.0 / math.sqrt(abs(math.log(e))),
                              name="drifting")
        with pytest.raises(HypothesisError):
            classify_regime(fam, alpha=0.5)


class TestCheckBounds:
    def test_small_argument_regime(self):
        # beta*|ln eps| >= 10 puts both m and n below 1; modest h_ex keeps
        # K*phi small enough for the sandwich to apply as well
        p = PhysicalParams(eps=1e-4, alpha=0.5, lam=1.0, h_ex=0.5)
        report = check_bounds(p, 10.0 / p.log_eps)
        coords = gamma_coords(p, 10.0 / p.log_eps)
        assert coords.m_eps <= 1.0 and coords.n_eps <= 1.0
        assert all(c.applicable for c in report.checks)
        assert report.all_passed

    def test_heavy_noise_suppression_regime(self):
        # beta*|ln eps| <= 0.1 sends n past 1: bracket not applicable
        p = PhysicalParams(eps=1e-4, alpha=0.5, lam=1.0, h_ex=5.0)
        report = check_bounds(p, 0.1 / p.log_eps)
        by_name = {c.name: c for c in report.checks}
        assert by_name["gamma-power"].applicable and by_name["gamma-power"].passed
        assert not by_name["exit-prob-bracket"].applicable
        assert report.all_passed

    def test_degenerate_start_brackets_zero(self):
        # eps**alpha = a_hat means m = n and phi = 1: bracket must span 0
        eps, alpha = 1e-4, 0.5
        p = PhysicalParams(eps=eps, alpha=alpha, lam=1.0, h_ex=eps ** -alpha)
        beta = 2.0 / p.log_eps
        report = check_bounds(p, beta)
        bracket = {c.name: c for c in report.checks}["exit-prob-bracket"]
        assert bracket.applicable and bracket.passed

    def test_report_shape(self):
        p, beta = make(*MODERATE[0])
        report = check_bounds(p, beta)
        assert isinstance(report, BoundsReport)
        assert {c.name for c in report.checks} == {
            "gamma-power", "exit-prob-bracket", "nucleation-sandwich"}
