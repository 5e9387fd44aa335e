"""
Temporal correlation in a backlogged network
============================================

With static transmitters, the interference a receiver sees in two slots is
correlated (p/2 under Rayleigh fading), and so are its successes.  The
success correlation vanishes for very sparse and very dense networks, with a
single peak in between.  A short simulation shows the interference value.
"""

import dataclasses

import numpy as np

from msanet.analytics import (
    high_noise_correlation_point, interference_correlation, max_correlation_point,
    success_correlation,
)
from msanet.model import SystemParams
from msanet.sim import SimConfig, Traffic, run_simulation
from msanet.stats import pearson_over_slots, stacked_traces

base = SystemParams(noise_W=1e-4)
print(" p*lambda     rho(S)")
for pl in np.geomspace(1e-5, 1e-1, 9):
    rho = success_correlation(dataclasses.replace(base, density_lambda=pl / base.transmit_prob_p))
    print(f"{pl:9.1e}  {rho:.4f}")

for alpha in (2.5, 3.0, 3.5, 4.0):
    params = dataclasses.replace(base, pathloss_alpha=alpha)
    print(f"alpha={alpha}: correlation peaks at p*lambda = {max_correlation_point(params):.3e}")

loud = dataclasses.replace(base, noise_W=30 / 1250)
print(f"\nvery noisy receivers: peak {max_correlation_point(loud):.4e}, "
      f"limit {high_noise_correlation_point(loud):.4e}")

# Ten static topologies, every link always backlogged.
params = dataclasses.replace(base, density_lambda=0.005)
records = run_simulation(params, SimConfig(num_realizations=10, num_slots=200, seed=1,
                                           traffic=Traffic.BACKLOGGED))
trace, labels = stacked_traces(records, "trace_interference")
r, se = pearson_over_slots(trace, 1, groups=labels)
print(f"\ninterference correlation: simulated {r:.3f} +/- {se:.3f}, "
      f"closed form {interference_correlation(params.transmit_prob_p):.3f}")
