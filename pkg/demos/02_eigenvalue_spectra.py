"""
How many degrees of freedom does a RIS correlation matrix have?

For a wave with small angle spread the correlation matrix of the surface
is nearly low rank. Its eigenvalues follow, for large surfaces, a density
sampled on the discrete Fourier grid of the lattice. Here we compare the
two at normal incidence, for two spreads and two spacings.
"""

import numpy as np

from ris_capacity import RisGeometry, build_correlation, spectral_density
from ris_capacity.scenarios import REFERENCE_WAVELENGTH, incoming_weight
from ris_capacity.spectra import eigenvalue_count_estimate, kolmogorov_distance, zero_mass_fraction

print(" sigma  spacing   KS    zero-mass  eigenvalues > 1e-3 max  rough count")
for sigma_deg in (5.0, 15.0):
    for a_rel in (0.5, 0.25):
        geometry = RisGeometry(20, a_rel * REFERENCE_WAVELENGTH)
        weight = incoming_weight(0.0, np.deg2rad(sigma_deg), REFERENCE_WAVELENGTH)
        s = build_correlation(geometry, weight)
        density = spectral_density(geometry, weight)
        eigs = s.eig[0]
        ks = kolmogorov_distance(s, density, zero_floor=1e-4)
        count = int(np.count_nonzero(eigs > 1e-3 * eigs[0]))
        estimate = eigenvalue_count_estimate(np.deg2rad(sigma_deg), geometry.spacing,
                                             REFERENCE_WAVELENGTH, geometry.n_s)
        print(f" {sigma_deg:4.0f}   {a_rel:5.2f} wl  {ks:.3f}    {zero_mass_fraction(density):.3f}"
              f"        {count:4d}                 {estimate:6.1f}")

# At half-wavelength spacing about 21% of the spectrum is exactly zero:
# grid wavevectors outside the visible disc |q| < k0 carry no energy.
# Denser lattices do not add degrees of freedom, they only add zeros.
