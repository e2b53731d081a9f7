import itertools

import numpy as np
import pytest

from ris_capacity.channel import RisGeometry, build_correlation
from ris_capacity.scenarios import REFERENCE_WAVELENGTH as LAMBDA
from ris_capacity.scenarios import incoming_weight, outgoing_weight
from ris_capacity.spectra import (
    StepCdf,
    circulant_approximation,
    eigenvalue_count_estimate,
    eta_density,
    fourier_grid,
    fourier_mode,
    kolmogorov_distance,
    lag_function,
    spectral_density,
    theoretical_eigen_cdf,
    zero_mass_fraction,
)

K0 = 2 * np.pi / LAMBDA


def _density(sigma_deg, spacing, n_d=20, theta=0.0):
    g = RisGeometry(n_d, spacing)
    return g, spectral_density(g, incoming_weight(theta, np.deg2rad(sigma_deg), LAMBDA))


class TestEta:
    def test_zero_outside_support(self):
        w = incoming_weight(0.3, np.deg2rad(10), LAMBDA)
        q = np.array([[1.01 * K0, 0.0], [0.0, -1.5 * K0], [0.8 * K0, 0.8 * K0]])
        assert np.all(eta_density(w, LAMBDA / 4, q) == 0.0)

    def test_nonnegative_and_support_invariant(self):
        _, d = _density(15, LAMBDA / 4)
        outside = np.linalg.norm(d.grid, axis=1) > K0
        assert np.all(d.values >= 0)
        assert np.all(d.values[outside] == 0)

    def test_singularity_is_floored(self):
        w = incoming_weight(0.0, np.deg2rad(60), LAMBDA)
        value = eta_density(w, LAMBDA / 2, np.array([[K0 * (1 - 1e-15), 0.0]]))
        assert np.isfinite(value).all() and value[0] > 0

    def test_nonzero_fraction_at_half_wavelength(self):
        for sigma in (5, 15, 60):
            _, d = _density(sigma, LAMBDA / 2)
            assert abs(zero_mass_fraction(d) - (1 - np.pi / 4)) <= 0.05

    def test_peak_grows_as_spread_shrinks(self):
        _, narrow = _density(5, LAMBDA / 2)
        _, wide = _density(15, LAMBDA / 2)
        assert narrow.values.max() > wide.values.max()

    def test_count_estimate(self):
        g, d = _density(5, LAMBDA / 2)
        count = np.count_nonzero(d.values > 1e-3 * d.values.max())
        estimate = eigenvalue_count_estimate(np.deg2rad(5), g.spacing, LAMBDA, g.n_s)
        assert estimate / 2 <= count <= 2 * estimate
        # the estimate with (2 pi)^2 in the denominator is orders of magnitude off
        literal = np.deg2rad(5) ** 2 * g.spacing**2 * g.n_s / ((2 * np.pi) ** 2 * LAMBDA**2)
        assert count > 100 * literal

    @pytest.mark.parametrize("sigma", [5, 15])
    def test_grid_mean_is_trace(self, sigma):
        _, d = _density(sigma, LAMBDA / 2)
        assert d.mean == pytest.approx(1.0, rel=0.02)

    def test_grid_mean_converges_for_dense_lattice(self):
        errors = [abs(_density(5, LAMBDA / 4, n_d)[1].mean - 1) for n_d in (20, 40)]
        assert errors[1] < errors[0] and errors[1] < 1e-5

    def test_mirror_directions_share_density(self):
        g = RisGeometry(12, LAMBDA / 2)
        a = spectral_density(g, incoming_weight(0.5, np.deg2rad(7), LAMBDA))
        b = spectral_density(g, outgoing_weight(0.5, np.deg2rad(7), LAMBDA))
        np.testing.assert_allclose(a.values, b.values, rtol=1e-12)

    def test_peak_follows_in_plane_direction(self):
        q = np.stack([np.linspace(-K0, K0, 4001)[1:-1], np.zeros(3999)], axis=1)
        for theta in (0.2, 0.6):
            w = incoming_weight(theta, np.deg2rad(3), LAMBDA)
            peak = q[np.argmax(eta_density(w, LAMBDA / 2, q)), 0]
            assert peak == pytest.approx(K0 * np.sin(theta), abs=0.02 * K0)


class TestGridAndModes:
    def test_grid_range_and_size(self):
        a = LAMBDA / 2
        grid = fourier_grid(7, a)
        assert grid.shape == (49, 2)
        assert np.all(grid >= -np.pi / a - 1e-12) and np.all(grid < np.pi / a)

    def test_mode_norm_and_orthogonality(self):
        g = RisGeometry(4, LAMBDA / 2)
        modes = [fourier_mode(m, g) for m in itertools.product(range(1, 5), repeat=2)]
        gram = np.array([[u.conj() @ v for v in modes] for u in modes])
        np.testing.assert_allclose(gram, np.eye(16), atol=1e-12)

    def test_zero_mode_is_constant(self):
        g = RisGeometry(5, LAMBDA / 2)
        np.testing.assert_allclose(fourier_mode((5, 5), g), np.full(25, 1 / 5), atol=1e-14)

    def test_mode_index_validated(self):
        with pytest.raises(ValueError):
            fourier_mode((0, 1), RisGeometry(3, LAMBDA / 2))


class TestCirculant:
    def test_single_element(self):
        g = RisGeometry(1, LAMBDA / 2)
        s = build_correlation(g, incoming_weight(0.2, np.deg2rad(5), LAMBDA))
        c, gap = circulant_approximation(s, g)
        np.testing.assert_allclose(c.entries, s.entries)
        assert gap == 0.0

    def test_fourier_modes_diagonalize(self):
        g = RisGeometry(8, LAMBDA / 2)
        s = build_correlation(g, incoming_weight(0.4, np.deg2rad(10), LAMBDA))
        c, _ = circulant_approximation(s, g)
        # the wrapped-lag circulant is Hermitian but need not be PSD
        np.testing.assert_allclose(c.entries, c.entries.conj().T, atol=1e-14)
        for m in itertools.product(range(1, 9), repeat=2):
            u = fourier_mode(m, g)
            cu = c.entries @ u
            assert np.linalg.norm(cu - (u.conj() @ cu) * u) < 1e-8

    def test_lag_table_reads_entries(self):
        g = RisGeometry(5, LAMBDA / 2)
        s = build_correlation(g, incoming_weight(0.1, np.deg2rad(10), LAMBDA))
        table = lag_function(s, g)
        assert table[4, 4] == s.entries[0, 0]
        assert table[4 + 2, 4 - 1] == s.entries[2 * 5 + 0, 0 * 5 + 1]

    def test_gap_decreases_beyond_sixteen(self):
        w = incoming_weight(0.0, np.deg2rad(5), LAMBDA)
        gaps = []
        for n_d in (16, 32, 64):
            g = RisGeometry(n_d, LAMBDA / 2)
            gaps.append(circulant_approximation(build_correlation(g, w), g)[1])
        assert gaps[0] > gaps[1] > gaps[2]


class TestEigenCdf:
    def test_step_cdf(self):
        cdf = StepCdf([3.0, 1.0, 2.0])
        np.testing.assert_allclose(cdf([0.0, 1.0, 2.5, 3.0]), [0, 1 / 3, 2 / 3, 1])
        values, probs = cdf.table()
        np.testing.assert_array_equal(values, [1, 2, 3])
        np.testing.assert_allclose(probs, [1 / 3, 2 / 3, 1])

    def test_theoretical_cdf_has_zero_atom(self):
        _, d = _density(60, LAMBDA / 2)
        assert theoretical_eigen_cdf(d)(0.0) == pytest.approx(zero_mass_fraction(d))

    def test_eigenvalues_follow_density(self):
        g, d = _density(15, LAMBDA / 2)
        s = build_correlation(g, incoming_weight(0.0, np.deg2rad(15), LAMBDA))
        assert kolmogorov_distance(s, d, zero_floor=1e-4) <= 0.1
