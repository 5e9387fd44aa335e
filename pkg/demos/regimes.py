"""
Interference-limited or noise-limited?
======================================

The traffic factor xi*lambda decides which impairment dominates.  Above one
boundary interference wins, below the other noise wins, and in between
neither is negligible.
"""

import numpy as np

from msanet.analytics import (
    classify_regime, interference_limited_boundary, noise_limited_boundary,
)
from msanet.model import MsaThresholds, SystemParams

params = SystemParams(transmit_prob_p=1.0, pathloss_alpha=3.5, noise_W=10 ** -3.4)
thresholds = MsaThresholds(regime_ratio_eta=0.5)

upper = interference_limited_boundary(params, thresholds)
lower = noise_limited_boundary(params, thresholds)
print(f"interference-limited when xi*lambda >= {upper:.3e}")
print(f"noise-limited        when xi*lambda <= {lower:.3e}")

# A coarse map of the (lambda, xi) plane; one letter per cell.
letters = {"interference_limited": "I", "noise_limited": "N", "intermediate": "."}
lambdas = np.geomspace(1e-4, 1e-1, 7)
print("\n xi \\ lambda " + " ".join(f"{l:8.0e}" for l in lambdas))
for xi in np.geomspace(1.0, 1e-4, 9):
    cells = []
    for lam in lambdas:
        p = SystemParams(density_lambda=lam, arrival_rate_xi=xi, transmit_prob_p=1.0,
                         pathloss_alpha=3.5, noise_W=10 ** -3.4)
        cells.append(letters[classify_regime(p, thresholds).kind.value])
    print(f"{xi:10.0e}   " + "".join(f"{c:>9}" for c in cells))

# The noise-limited boundary is not monotone in the path-loss exponent.
print("\n alpha   noise-limited boundary (W = 10^-3.2)")
for alpha in np.linspace(2.5, 5.0, 11):
    b = noise_limited_boundary(SystemParams(pathloss_alpha=alpha, noise_W=10 ** -3.2), thresholds)
    print(f"{alpha:6.2f}  {b:.3e}")
