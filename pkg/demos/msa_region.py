"""
Where does massive and sporadic access begin?
=============================================

A network counts as *massive* once the success probability of a fully
loaded network drops below epsilon, and as *sporadic* while a lone link's
queue stays under the delay ceiling beta.  Both thresholds are closed form.
"""

import dataclasses

import numpy as np

from msanet.analytics import msa_region
from msanet.model import MsaThresholds, SystemParams

base = SystemParams(noise_W=1e-4)
thresholds = MsaThresholds(success_floor_epsilon=0.1, delay_ceiling_beta=50)

# Steeper path loss needs a denser network before it counts as massive.
print(" alpha   lambda0    xi0")
for alpha in np.linspace(2.2, 4.0, 10):
    region = msa_region(dataclasses.replace(base, pathloss_alpha=alpha), thresholds)
    print(f"{alpha:6.2f}  {region.lambda0:.6f}  {region.xi0:.4f}")

# Noise moves the sporadic threshold a lot and the density threshold little.
print("\nlog10 W   lambda0    xi0")
for logw in (-6, -5, -4, -3.5, -3.3):
    region = msa_region(dataclasses.replace(base, noise_W=10.0 ** logw), thresholds)
    print(f"{logw:7.1f}  {region.lambda0:.6f}  {region.xi0:.4f}")

region = msa_region(base, thresholds)
print("\nlambda=0.01, xi=0.01 inside the region:", region.contains(0.01, 0.01))
