"""
Link budgets: terrestrial shadowing and satellite fading
========================================================
"""

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.special import ndtr
from scipy.stats import gamma as gamma_dist

from ntnsim.channel import (
    LinkBudgetConfig,
    TerrestrialChannelConfig,
    deterministic_rx_dbm,
    fspl_db,
    ntn_gamma_params,
    terrestrial_pathloss_db,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

link = LinkBudgetConfig()
terr = TerrestrialChannelConfig()

# terrestrial: log-distance path loss plus lognormal shadowing, so the
# erasure probability at distance d is a Gaussian tail
d = np.linspace(200.0, 30_000.0, 400)
det = deterministic_rx_dbm("terrestrial", d, link, terr)
p_erase = ndtr((link.sensitivity_dbm - det) / terr.shadow_sigma_db)
print(f"terrestrial path loss at 10 km: {terrestrial_pathloss_db(10_000.0, terr):.2f} dB")
print(f"erasure probability at 10 km:   {float(np.interp(10_000, d, p_erase)):.3f}")

# satellite links: free-space loss plus a gamma-distributed power gain
# fitted to shadowed-Rice statistics, parameterized by elevation (the
# fit is only physical above roughly 17 degrees)
alpha = np.radians(np.linspace(17.0, 90.0, 200))
k, theta = ntn_gamma_params(alpha)

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
axes[0].plot(d / 1e3, p_erase)
axes[0].set_xlabel("ground distance [km]")
axes[0].set_ylabel("erasure probability")
axes[0].set_title("terrestrial link")

axes[1].plot(np.degrees(alpha), k, label="shape k")
axes[1].plot(np.degrees(alpha), theta, label="scale theta")
axes[1].set_xlabel("elevation [deg]")
axes[1].legend()
axes[1].set_title("fading fit vs elevation")

# erasure through the satellite channel at a fixed slant range: the
# deterministic budget shifts with distance, the fading tail with angle
for d_slant, label in ((750e3, "overhead, 750 km"), (1677e3, "grazing, 1677 km")):
    det_ntn = link.tx_power_dbm + link.tx_gain_dbi + link.rx_gain_dbi("leo") \
        - fspl_db(d_slant, link)
    need = 10 ** ((link.sensitivity_dbm - det_ntn) / 10.0)
    p = gamma_dist.cdf(need, a=k, scale=theta)
    axes[2].plot(np.degrees(alpha), p, label=label)
axes[2].set_xlabel("elevation [deg]")
axes[2].set_ylabel("erasure probability")
axes[2].legend(fontsize=8)
axes[2].set_title("satellite link")

fig.tight_layout()
fig.savefig(os.path.join(OUT, "channel_models.png"), dpi=130)
print(f"wrote {os.path.join(OUT, 'channel_models.png')}")

# the HAPS sits far closer, so its margin is enormous by comparison
for kind, dist in (("haps", math.hypot(30e3, 0)), ("leo", 750e3)):
    print(f"{kind:5s} free-space loss at {dist / 1e3:6.0f} km: "
          f"{fspl_db(dist, link):.2f} dB")
