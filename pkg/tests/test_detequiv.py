import numpy as np
import pytest
from scipy.optimize import brentq

from ris_capacity.channel import CorrelationMatrix, SystemConfig
from ris_capacity.detequiv import (
    FixedPointError,
    FixedPointSolution,
    MiStatistics,
    analyze,
    config_sigmas,
    ergodic_mi,
    fixed_point_rhs,
    lambda_matrix,
    mi_statistics,
    outage_mi,
    sigma_k,
    solve_fixed_point,
    variance,
)
from ris_capacity.experiments import phase_profiles
from ris_capacity.optimizer import analytic_phases
from ris_capacity.scenarios import reference_config


class TestSigmaK:
    def test_identity(self, rng):
        phi = np.exp(1j * rng.uniform(-np.pi, np.pi, 9))
        np.testing.assert_allclose(sigma_k(np.eye(9), np.eye(9), phi), np.eye(9), atol=1e-14)

    def test_trace_independent_of_phases_when_s_r_identity(self, rng):
        from conftest import random_psd

        s_t = random_psd(rng, 6)
        traces = {round(np.trace(sigma_k(s_t, np.eye(6), rng.uniform(-3, 3, 6))).real, 9)
                  for _ in range(5)}
        assert traces == {6.0}

    def test_unit_rank_with_optimal_phases(self):
        n = 16
        idx = np.arange(n)
        u_t = np.exp(0.7j * idx) / np.sqrt(n)
        u_r = np.exp(-1.9j * idx + 0.3j) / np.sqrt(n)
        s_t = CorrelationMatrix(n * np.outer(u_t, u_t.conj()))
        s_r = CorrelationMatrix(n * np.outer(u_r, u_r.conj()))
        prof = analytic_phases(s_t, s_r)
        sig = sigma_k(s_t, s_r, prof)
        kappa = u_r.conj() @ (prof.coefficients * u_t)
        assert abs(kappa) == pytest.approx(1.0, abs=1e-10)
        # S_t^{1/2} Phi^H S_r Phi S_t^{1/2} = n^2 |kappa|^2 u_t u_t^H
        np.testing.assert_allclose(sig, n**2 * np.outer(u_t, u_t.conj()), atol=1e-8)

    def test_rejects_non_unit_modulus_with_index(self):
        phi = np.ones(4, dtype=complex)
        phi[3] = 0.5
        with pytest.raises(ValueError, match="coefficient 3"):
            sigma_k(np.eye(4), np.eye(4), phi)

    def test_real_input_is_angles(self):
        np.testing.assert_allclose(sigma_k(np.eye(3), np.eye(3), np.zeros(3)), np.eye(3))


def _legacy(n, rho):
    return SystemConfig(n_t=n, n_r=n, rho=rho, direct_link=True)


class TestFixedPoint:
    def test_zero_snr(self):
        cfg = reference_config(1, np.deg2rad(5), n_d=6, rho=0.0, direct_link=True)
        sol, stats = analyze(cfg)
        assert sol.r_d == 0 and np.all(sol.r1 == 0) and np.all(sol.r2 == 0)
        assert sol.t_d == pytest.approx(cfg.beta_r, abs=1e-12)
        assert abs(stats.mean_nats) <= 1e-9 and abs(stats.variance_nats2) <= 1e-9

    @pytest.mark.parametrize("rho", [0.1, 1.0, 10.0, 1000.0])
    def test_legacy_mimo_against_bisection(self, rho):
        t_star = brentq(lambda t: t - 1.0 / (1.0 + rho / (1.0 + rho * t)), 1e-12, 1.0,
                        xtol=1e-15)
        r_star = rho / (1.0 + rho * t_star)
        cfg = _legacy(4, rho)
        sigmas = config_sigmas(cfg)
        sol = solve_fixed_point(cfg, sigmas)
        assert sol.t_d == pytest.approx(t_star, abs=1e-9)
        assert sol.r_d == pytest.approx(r_star, abs=1e-9 * max(1, r_star))
        mi = ergodic_mi(cfg, sigmas, sol)
        expected = 4 * (np.log1p(r_star) + np.log1p(rho * t_star) - r_star * t_star)
        assert mi == pytest.approx(expected, rel=1e-9)
        # known closed form of the iid square-channel capacity per antenna
        s = np.sqrt(1 + 4 * rho)
        closed = 2 * np.log((1 + s) / 2) - (s - 1) ** 2 / (4 * rho)
        assert mi / 4 == pytest.approx(closed, rel=1e-8)

    def test_residual_and_self_consistency(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        sol = solve_fixed_point(reference_k1, sigmas, tol=1e-10)
        assert sol.residual <= 1e-10
        v = sol.as_vector()
        assert np.all(v >= 0)
        back = fixed_point_rhs(reference_k1, sigmas, sol).as_vector()
        assert np.max(np.abs(back - v)) <= 10 * 1e-10

    def test_exhaustion_carries_residuals(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        with pytest.raises(FixedPointError) as info:
            solve_fixed_point(reference_k1, sigmas, tol=1e-15, max_iter=3)
        assert len(info.value.residuals) == 4
        assert "residual" in str(info.value)

    def test_warm_start(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        sol = solve_fixed_point(reference_k1, sigmas)
        again = solve_fixed_point(reference_k1, sigmas, init=sol)
        assert again.iterations == 0

    def test_vector_round_trip(self):
        v = np.arange(10, dtype=float)
        assert np.array_equal(FixedPointSolution.from_vector(v, 2).as_vector(), v)


class TestErgodicMi:
    def test_increasing_in_k_with_optimized_phases(self):
        values = []
        for k in (1, 2, 4):
            cfg = reference_config(k, np.deg2rad(5))
            _, stats = analyze(cfg, phase_profiles(cfg, "analytic"))
            values.append(stats.mean_nats)
        assert values[0] < values[1] < values[2]

    def test_zero_gamma_reduces_to_direct_link(self):
        with_ris = reference_config(2, np.deg2rad(5), n_d=5, direct_link=True, gamma=0.0)
        legacy = SystemConfig(n_t=8, n_r=4, rho=10.0, direct_link=True)
        s1 = config_sigmas(with_ris)
        mi_ris = ergodic_mi(with_ris, s1, solve_fixed_point(with_ris, s1))
        s0 = config_sigmas(legacy)
        mi_legacy = ergodic_mi(legacy, s0, solve_fixed_point(legacy, s0))
        assert mi_ris == pytest.approx(mi_legacy, rel=1e-10)

    def test_phase_decoupling(self, rng):
        cfg = reference_config(2, np.deg2rad(10), n_d=5)
        sigmas = config_sigmas(cfg)
        sol = solve_fixed_point(cfg, sigmas)
        _, before = ergodic_mi(cfg, sigmas, sol, per_ris=True)
        ris = cfg.ris[1]
        changed = [sigmas[0], sigma_k(ris.s_t(), ris.s_r(), rng.uniform(-np.pi, np.pi, 25))]
        _, after = ergodic_mi(cfg, changed, sol, per_ris=True)
        assert after[0] == before[0]
        assert after[1] != pytest.approx(before[1], rel=1e-6)


class TestVariance:
    def test_lambda_is_hessian(self):
        cfg = reference_config(2, np.deg2rad(8), n_d=4, direct_link=True, rho=3.0)
        sigmas = [config_sigmas(cfg)[0],
                  sigma_k(cfg.ris[1].s_t(), cfg.ris[1].s_r(), np.linspace(-2, 2, 16))]
        sol = solve_fixed_point(cfg, sigmas)
        lam = lambda_matrix(cfg, sigmas, sol)
        v0 = sol.as_vector()
        k = cfg.k

        def c(v):
            return ergodic_mi(cfg, sigmas, FixedPointSolution.from_vector(v, k)) / cfg.n_t

        steps = 1e-4 * np.maximum(np.abs(v0), 1e-2)
        n = v0.size
        hess = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                ei = np.zeros(n)
                ej = np.zeros(n)
                ei[i] = steps[i]
                ej[j] = steps[j]
                hess[i, j] = (c(v0 + ei + ej) - c(v0 + ei - ej) - c(v0 - ei + ej)
                              + c(v0 - ei - ej)) / (4 * steps[i] * steps[j])
        np.testing.assert_allclose(lam, hess, atol=1e-5 * np.max(np.abs(lam)))

    def test_lambda_dimension_and_symmetry(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        lam = lambda_matrix(reference_k1, sigmas, solve_fixed_point(reference_k1, sigmas))
        assert lam.shape == (6, 6)
        np.testing.assert_array_equal(lam, lam.T)

    def test_variance_positive_and_decreasing_snr_limit(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        var = variance(reference_k1, sigmas, solve_fixed_point(reference_k1, sigmas))
        assert var > 0
        low = reference_k1.replace(rho=1e-6)
        v_low = variance(low, sigmas, solve_fixed_point(low, sigmas))
        assert 0 <= v_low < 1e-6

    def test_statistics_container(self, reference_k1):
        sigmas = config_sigmas(reference_k1)
        stats = mi_statistics(reference_k1, sigmas, solve_fixed_point(reference_k1, sigmas))
        assert stats.lambda_dim == 6 and stats.mean_nats > 0
        assert stats.std_nats == pytest.approx(np.sqrt(stats.variance_nats2))


class TestOutage:
    def test_median(self):
        assert outage_mi(MiStatistics(5.0, 2.0, 6), 0.5) == pytest.approx(5.0, abs=1e-15)

    def test_zero_variance(self):
        for p in (0.01, 0.3, 0.99):
            assert outage_mi(MiStatistics(5.0, 0.0, 6), p) == 5.0

    def test_quantile(self):
        assert outage_mi(MiStatistics(5.0, 4.0, 6), 0.1) == pytest.approx(5 - 2 * 1.2815515655446004)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_bad_probability(self, p):
        with pytest.raises(ValueError):
            outage_mi(MiStatistics(5.0, 1.0, 6), p)
