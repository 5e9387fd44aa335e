"""
High-mobility equivalence against a static simulation
=====================================================

Queues in a static network interact through interference.  Treating the
transmitters as if they moved every slot decouples them, and the stationary
non-empty probability then follows from a Lambert W fixed point.  Here the
closed form is compared with a short static simulation.
"""

import dataclasses

from msanet.analytics import stationary_solution
from msanet.model import SystemParams
from msanet.sim import SimConfig, run_simulation
from msanet.stats import estimate_delay, estimate_nonempty

base = SystemParams()   # lambda = xi = 0.01, p = 0.5, theta = 10 dB, W = 10^-3.3
config = SimConfig(num_realizations=10, num_slots=500, seed=7)

print(" alpha  zeta0   sim zeta       D0     sim D")
for alpha in (2.6, 3.0, 3.4):
    params = dataclasses.replace(base, pathloss_alpha=alpha)
    sol = stationary_solution(params)
    records = run_simulation(params, config)
    z, z_sd = estimate_nonempty(records)
    d, d_sd = estimate_delay(records)
    print(f"{alpha:5.1f}  {sol.nonempty_prob_zeta0:.4f}  {z:.4f}+/-{z_sd:.4f}  "
          f"{sol.mean_delay_D0:6.3f}  {d:.3f}+/-{d_sd:.3f}")

# Past the Lambert W domain there is no stationary solution at all.
busy = dataclasses.replace(base, arrival_rate_xi=0.05)
print("\nxi = 0.05:", stationary_solution(busy))
