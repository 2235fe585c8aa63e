import math

import numpy as np
import pytest

from vortexnuc.errors import DomainError
from vortexnuc.exit_analytics import log_exit_probability
from vortexnuc.ode_dynamics import PhysicalParams
from vortexnuc.sde_nucleation import (ExitLabel, ExitOutcome, ExitStats, NoiseParams,
                                      bessel_dimension, estimate_exit_prob, simulate_batch,
                                      simulate_path)

TRIALS = 20_000


@pytest.fixture(scope="module")
def setup():
    p = PhysicalParams(eps=0.02, alpha=0.5, lam=1.0, h_ex=2.47)
    n = NoiseParams(beta=1.0 / p.log_eps, seed=20260809, dt_base=2.5e-5, max_time=60.0)
    return p, n


class TestNoiseParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            NoiseParams(beta=0.0, seed=0, dt_base=1e-4, max_time=1.0)
        with pytest.raises(DomainError):
            NoiseParams(beta=0.1, seed=0, dt_base=0.0, max_time=1.0)
        with pytest.raises(DomainError):
            NoiseParams(beta=0.1, seed=-1, dt_base=1e-4, max_time=1.0)


class TestSimulatePath:
    def test_absorbed_at_origin_start(self, setup):
        p, n = setup
        out = simulate_path(p, n, 0.0, 0)
        assert out == ExitOutcome(ExitLabel.ANNIHILATED, 0.0, 0, 0.0)

    def test_absorbed_at_escape_start(self, setup):
        p, n = setup
        out = simulate_path(p, n, p.a_hat, 0)
        assert out.label is ExitLabel.NUCLEATED
        assert out.exit_time == 0.0 and out.path_steps == 0

    def test_bitwise_determinism(self, setup):
        p, n = setup
        a0 = p.initial_distance
        for idx in (0, 1, 977):
            assert simulate_path(p, n, a0, idx) == simulate_path(p, n, a0, idx)

    def test_distinct_paths_differ(self, setup):
        p, n = setup
        a0 = p.initial_distance
        assert simulate_path(p, n, a0, 0) != simulate_path(p, n, a0, 1)

    def test_outside_interval_rejected(self, setup):
        p, n = setup
        with pytest.raises(DomainError):
            simulate_path(p, n, -0.1, 0)
        with pytest.raises(DomainError):
            simulate_path(p, n, 2.0 * p.a_hat, 0)

    def test_labels_match_final_positions(self, setup):
        p, n = setup
        codes, times, steps, finals = simulate_batch(p, n, p.initial_distance, 3000)
        ann = codes == 0
        nuc = codes == 1
        assert np.all(finals[ann] <= 0.0)
        assert np.all(finals[nuc] >= p.a_hat)
        assert np.all(times <= n.max_time * (1.0 + 1e-12))

    def test_batch_matches_single(self, setup):
        p, n = setup
        a0 = p.initial_distance
        codes, times, steps, finals = simulate_batch(p, n, a0, 8)
        for i in range(8):
            out = simulate_path(p, n, a0, i)
            assert out.exit_time == times[i]
            assert out.path_steps == steps[i]
            assert out.final_position == finals[i]


class TestEstimateExitProb:
    def test_minimum_trials(self, setup):
        p, n = setup
        with pytest.raises(DomainError):
            estimate_exit_prob(p, n, 0.1, 99)

    def test_worker_count_invariance(self, setup):
        p, n = setup
        one = estimate_exit_prob(p, n, p.initial_distance, 2000, jobs=1)
        two = estimate_exit_prob(p, n, p.initial_distance, 2000, jobs=2)
        assert one == two

    def test_driftless_control_is_linear(self, setup):
        p, _ = setup
        n = NoiseParams(beta=0.3, seed=11, dt_base=2e-5, max_time=60.0)
        st = estimate_exit_prob(p, n, p.a_hat / 4.0, TRIALS, zero_drift=True)
        assert abs(st.estimate - 0.25) <= 4.0 * st.std_error

    def test_analytic_oracle_agreement(self, setup):
        p, n = setup
        phi = math.exp(log_exit_probability(p.initial_distance, p, n.beta).log_magnitude)
        st = estimate_exit_prob(p, n, p.initial_distance, TRIALS)
        assert abs(st.estimate - phi) <= 4.0 * st.std_error

    def test_monotone_in_start_point(self, setup):
        p, n = setup
        stats = [estimate_exit_prob(p, n, a0, TRIALS)
                 for a0 in (p.a_hat / 8.0, p.a_hat / 4.0, p.a_hat / 2.0)]
        for st, a0 in zip(stats, (p.a_hat / 8.0, p.a_hat / 4.0, p.a_hat / 2.0)):
            phi = math.exp(log_exit_probability(a0, p, n.beta).log_magnitude)
            assert abs(st.estimate - phi) <= 4.0 * st.std_error
        for lo, hi in zip(stats, stats[1:]):
            pooled = math.hypot(lo.std_error, hi.std_error)
            assert hi.estimate >= lo.estimate - 4.0 * pooled

    def test_step_refinement_stability(self, setup):
        p, n = setup
        fine = NoiseParams(beta=n.beta, seed=n.seed, dt_base=n.dt_base / 4.0,
                           max_time=n.max_time)
        coarse_st = estimate_exit_prob(p, n, p.initial_distance, TRIALS)
        fine_st = estimate_exit_prob(p, fine, p.initial_distance, TRIALS)
        pooled = math.hypot(coarse_st.std_error, fine_st.std_error)
        assert abs(coarse_st.estimate - fine_st.estimate) <= 2.0 * pooled

    def test_error_scaling_with_trials(self, setup):
        p, n = setup
        small = estimate_exit_prob(p, n, p.initial_distance, 5000)
        large = estimate_exit_prob(p, n, p.initial_distance, 20000)
        assert large.std_error == pytest.approx(small.std_error / 2.0, rel=0.2)

    def test_stats_invariants(self, setup):
        p, n = setup
        st = estimate_exit_prob(p, n, p.initial_distance, 1000)
        assert isinstance(st, ExitStats)
        assert st.estimate == st.nucleated / st.trials
        assert st.std_error == pytest.approx(
            math.sqrt(st.estimate * (1 - st.estimate) / st.trials))
        assert 0.0 <= st.estimate <= 1.0


class TestBesselDimension:
    def test_values(self):
        p = PhysicalParams(eps=math.exp(-10.0), alpha=0.5, lam=1.0, h_ex=1.0)
        n1 = NoiseParams(beta=0.1, seed=0, dt_base=1e-4, max_time=1.0)   # beta*L = 1
        assert bessel_dimension(p, n1) == pytest.approx(2.0, rel=1e-12)
        n2 = NoiseParams(beta=0.05, seed=0, dt_base=1e-4, max_time=1.0)  # beta*L = 0.5
        assert bessel_dimension(p, n2) == pytest.approx(3.0, rel=1e-12)
        n3 = NoiseParams(beta=1e9, seed=0, dt_base=1e-4, max_time=1.0)
        assert bessel_dimension(p, n3) == pytest.approx(1.0, abs=1e-9)
