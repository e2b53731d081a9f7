"""
When does optimizing the RIS phases pay off?

We sweep the angle spread and compare three phase choices: all zeros, the
closed-form profile that aligns the dominant incoming and outgoing modes,
and alternating numerical optimization started from it. Narrow spreads
leave the surface with few strong modes, so steering them matters a lot.
Wide spreads make the channel close to isotropic, and phases stop
mattering.
"""

import numpy as np

from ris_capacity import alternating_optimize, analyze
from ris_capacity.experiments import phase_profiles
from ris_capacity.scenarios import reference_config

print(" sigma  unoptimized  analytic  numeric   (nats)")
for sigma_deg in (2.0, 5.0, 15.0, 60.0):
    config = reference_config(k=1, sigma=np.deg2rad(sigma_deg))
    _, unopt = analyze(config, phase_profiles(config, "identity"))
    _, analytic = analyze(config, phase_profiles(config, "analytic"))
    numeric = alternating_optimize(config)
    print(f" {sigma_deg:5.1f}  {unopt.mean_nats:10.3f}  {analytic.mean_nats:8.3f}  "
          f"{numeric.mi:7.3f}")

# The analytic profile is within a fraction of a percent of the numerical
# optimum, and at small spreads the optimized link beats the large-spread
# one even though the unoptimized link is much worse there.
