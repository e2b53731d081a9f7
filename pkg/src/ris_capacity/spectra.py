"""
Limiting eigenvalue spectra of RIS correlation matrices.

For a lattice with spacing ``a`` and a weight ``w`` on the wave sphere the
correlation matrix is block Toeplitz with symbol

    eta(q) = (lambda/a)^2 [w(q, k_z) + w(q, -k_z)] / sqrt(1 - |q|^2/k0^2)

for ``|q| < k0`` (zero outside), ``k_z = sqrt(k0^2 - |q|^2)``. Its
eigenvalues are asymptotically distributed as ``eta`` sampled on the
discrete Fourier grid, and the eigenvectors approach lattice plane waves.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from .channel import CorrelationMatrix

__all__ = [
    "SpectralDensity",
    "StepCdf",
    "eta_density",
    "fourier_grid",
    "spectral_density",
    "circulant_approximation",
    "fourier_mode",
    "theoretical_eigen_cdf",
    "kolmogorov_distance",
    "zero_mass_fraction",
    "eigenvalue_count_estimate",
    "lag_function",
]

KZ_FLOOR = 1e-4


def eta_density(weight, spacing, q, kz_floor=KZ_FLOOR):
    """Limiting eigenvalue density at in-plane wavevector(s) ``q``.

    Parameters
    ----------
    weight : WeightFunction
        Expressed in the RIS frame (surface normal along ``z``).
    spacing : float
        Lattice spacing ``a`` in meters.
    q : array_like, shape (..., 2)
        In-plane wavevectors in rad/m.
    kz_floor : float
        ``k_z`` is clipped at ``kz_floor * k0`` to regularize the
        integrable square-root singularity at ``|q| = k0``.
    """
    q = np.asarray(q, dtype=float)
    k0 = weight.k0
    q2 = np.sum(q**2, axis=-1)
    inside = q2 < k0**2
    kz = np.maximum(np.sqrt(np.clip(k0**2 - q2, 0.0, None)), kz_floor * k0)
    up = np.concatenate([q, kz[..., None]], axis=-1)
    down = np.concatenate([q, -kz[..., None]], axis=-1)
    value = (weight.wavelength / spacing) ** 2 * (weight(up) + weight(down)) / (kz / k0)
    return np.where(inside, value, 0.0)


def fourier_grid(n_d, spacing):
    """The ``n_d^2`` wavevectors ``q_m = 2 pi m / (n_d a)``, ``m = 1 .. n_d``
    per axis, folded into ``[-pi/a, pi/a)`` and ordered like lattice
    indices."""
    m = np.arange(1, n_d + 1)
    q = 2 * np.pi * m / (n_d * spacing)
    period = 2 * np.pi / spacing
    q = (q + np.pi / spacing) % period - np.pi / spacing
    qx, qy = np.meshgrid(q, q, indexing="ij")
    return np.stack([qx.ravel(), qy.ravel()], axis=1)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """``eta`` sampled on a grid of in-plane wavevectors."""

    grid: np.ndarray
    values: np.ndarray
    wavelength: float
    spacing: float

    @property
    def mean(self):
        return float(np.mean(self.values))

    @property
    def k0(self):
        return 2 * np.pi / self.wavelength


def spectral_density(geometry, weight, kz_floor=KZ_FLOOR):
    """``eta`` of ``weight`` (world frame) on the Fourier grid of
    ``geometry``."""
    local = weight.in_frame(geometry.rotation)
    grid = fourier_grid(geometry.n_d, geometry.spacing)
    values = eta_density(local, geometry.spacing, grid, kz_floor)
    return SpectralDensity(grid, values, weight.wavelength, geometry.spacing)


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Right-continuous empirical CDF of a finite sample."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.sort(np.asarray(self.points, dtype=float)))

    def __call__(self, x):
        return np.searchsorted(self.points, np.asarray(x, dtype=float), side="right") / self.points.size

    def table(self):
        """``(value, cumulative probability)`` at each sample point."""
        return self.points, np.arange(1, self.points.size + 1) / self.points.size


def theoretical_eigen_cdf(density):
    return StepCdf(density.values)


def _zeroed(values, floor):
    values = np.asarray(values, dtype=float)
    if floor <= 0:
        return values
    return np.where(np.abs(values) < floor * np.max(np.abs(values)), 0.0, values)


def kolmogorov_distance(eigenvalues, density, zero_floor=0.0):
    """Two-sample Kolmogorov distance between the eigenvalues of ``S`` and
    the ``eta`` sample.

    ``zero_floor`` (relative to each sample's maximum) maps negligible
    values to exactly zero. The limiting law has an atom at zero, and CDF
    convergence only holds away from atoms, so numerically tiny positive
    eigenvalues otherwise dominate the distance.
    """
    eta = getattr(density, "values", density)
    eigs = getattr(eigenvalues, "eig", None)
    eigs = eigs[0] if eigs is not None else np.asarray(eigenvalues)
    return float(ks_2samp(_zeroed(eigs, zero_floor), _zeroed(eta, zero_floor)).statistic)


def zero_mass_fraction(density):
    return float(np.mean(np.asarray(getattr(density, "values", density)) == 0.0))


def eigenvalue_count_estimate(angle_spread, spacing, wavelength, n_s):
    """Rough number of non-negligible eigenvalues, ``(2 pi)^2 sigma^2 a^2
    N_s / lambda^2``: the fraction of the Fourier cell covered by a spot of
    radius ``sigma k0``."""
    return (2 * np.pi) ** 2 * angle_spread**2 * spacing**2 * n_s / wavelength**2


def lag_function(s, geometry):
    """Table ``T[p + n_d - 1, q + n_d - 1] = S(p, q)`` of a lattice
    Toeplitz matrix, read back from its entries."""
    m = np.asarray(getattr(s, "entries", s))
    n = geometry.n_d
    lags = np.arange(-(n - 1), n)
    p, q = np.meshgrid(lags, lags, indexing="ij")
    i = np.maximum(p, 0) * n + np.maximum(q, 0)
    j = (np.maximum(p, 0) - p) * n + (np.maximum(q, 0) - q)
    return m[i, j]


def _wrap_candidates(diff, n):
    """Per-entry candidate lags: ``diff mod n`` folded into ``(-n/2, n/2]``,
    with both signs kept at exactly ``n/2``."""
    w = (diff + (n - 1) // 2) % n - (n - 1) // 2
    tie = (n % 2 == 0) & (w == n // 2)
    return w, np.where(tie, -w, w)


def circulant_approximation(s, geometry):
    """Block-circulant matrix ``C`` sharing the lattice correlation of
    ``s`` at wrapped lags, and ``||S - C||_F^2 / N_s``.

    Lags are taken modulo ``n_d`` into the symmetric window
    ``(-n_d/2, n_d/2]``; at the tie ``n_d/2`` both signs are averaged so
    that ``C`` stays Hermitian.
    """
    m = np.asarray(getattr(s, "entries", s))
    n = geometry.n_d
    table = lag_function(m, geometry)
    idx = geometry.lattice_indices()
    d1 = idx[:, 0][:, None] - idx[:, 0][None, :]
    d2 = idx[:, 1][:, None] - idx[:, 1][None, :]
    c = np.zeros_like(m, dtype=complex)
    options1 = _wrap_candidates(d1, n)
    options2 = _wrap_candidates(d2, n)
    for a, b in itertools.product(options1, options2):
        c += table[a + n - 1, b + n - 1]
    c /= 4
    gap = float(np.sum(np.abs(m - c) ** 2) / geometry.n_s)
    return CorrelationMatrix(c), gap


def fourier_mode(m, geometry):
    """Lattice plane wave ``exp(i q_m . n a) / sqrt(N_s)`` with
    ``q_m = 2 pi m / (n_d a)``, ``m`` given as a pair in ``1 .. n_d``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2,) or np.any(m < 1) or np.any(m > geometry.n_d):
        raise ValueError("m must be a pair with components in 1 .. n_d")
    idx = geometry.lattice_indices()
    phase = 2 * np.pi * (idx @ m) / geometry.n_d
    return np.exp(1j * phase) / np.sqrt(geometry.n_s)
