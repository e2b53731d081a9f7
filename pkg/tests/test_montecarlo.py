import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import skew

from ris_capacity.channel import SystemConfig
from ris_capacity.detequiv import analyze, outage_mi
from ris_capacity.montecarlo import MonteCarloResult, empirical_cdf, sample_mi, simulate
from ris_capacity.optimizer import PhaseProfile
from ris_capacity.scenarios import reference_config


def _identity(config):
    return [PhaseProfile.identity(r.geometry.n_s, k) for k, r in enumerate(config.ris)]


@pytest.fixture(scope="module")
def reference_run(reference_k1):
    return simulate(reference_k1, _identity(reference_k1), 4000, seed=1)


def test_siso_matches_quadrature():
    rho = 5.0
    cfg = SystemConfig(n_t=1, n_r=1, rho=rho, direct_link=True)
    res = simulate(cfg, [], 20_000, seed=3)
    exact, _ = quad(lambda x: np.log1p(rho * x) * np.exp(-x), 0, np.inf)
    assert abs(res.mean - exact) < 3 * res.std_error


def test_zero_snr_gives_zero_samples(reference_k1):
    res = simulate(reference_k1.replace(rho=0.0), _identity(reference_k1), 20, seed=0)
    assert np.all(res.samples == 0.0)


def test_thread_count_does_not_change_samples():
    cfg = reference_config(2, np.deg2rad(5), n_d=6)
    runs = [simulate(cfg, _identity(cfg), 64, seed=11, threads=t).samples for t in (1, 4, 8)]
    assert np.array_equal(runs[0], runs[1]) and np.array_equal(runs[0], runs[2])


def test_samplewise_monotone_in_snr():
    cfg = reference_config(1, np.deg2rad(5), n_d=6)
    low = simulate(cfg.replace(rho=1.0), _identity(cfg), 50, seed=5).samples
    high = simulate(cfg.replace(rho=10.0), _identity(cfg), 50, seed=5).samples
    assert np.all(high > low)


def test_result_invariants(reference_run):
    s = reference_run.samples
    assert reference_run.n == s.size == 4000
    assert reference_run.excluded == 0
    assert np.all(s >= 0)
    assert reference_run.mean == float(np.mean(s))
    assert reference_run.variance == float(np.var(s, ddof=1))


def test_gaussian_limit_skewness(reference_k1, reference_run):
    _, stats = analyze(reference_k1)
    z = (reference_run.samples - stats.mean_nats) / stats.std_nats
    assert abs(skew(z)) < 0.2


def test_outage_within_empirical_bracket(reference_k1, reference_run):
    _, stats = analyze(reference_k1)
    predicted = outage_mi(stats, 0.1)
    s = reference_run.samples
    boot_rng = np.random.default_rng(0)
    boots = [np.quantile(boot_rng.choice(s, s.size), 0.1) for _ in range(200)]
    err = np.std(boots)
    assert abs(predicted - np.quantile(s, 0.1)) <= 3 * err


def test_empirical_cdf():
    res = MonteCarloResult(np.array([1.0, 2.0, 2.0, 3.0]), seed=0)
    np.testing.assert_allclose(empirical_cdf(res, [0.5, 1.0, 2.0, 2.5, 3.0]),
                               [0.0, 0.25, 0.75, 0.75, 1.0])
    np.testing.assert_allclose(res.cdf([10.0]), [1.0])


def test_sample_mi_matches_slogdet(rng):
    g = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    expected = np.linalg.slogdet(np.eye(3) + 2.0 * g @ g.conj().T)[1]
    assert sample_mi(g, 2.0) == pytest.approx(expected, rel=1e-12)


def test_rejects_empty_run(reference_k1):
    with pytest.raises(ValueError):
        simulate(reference_k1, _identity(reference_k1), 0, seed=0)
