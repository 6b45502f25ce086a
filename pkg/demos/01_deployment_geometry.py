"""
Region layout: devices, base stations, and the platform overhead
================================================================

Builds one random deployment and shows where everything sits.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ntnsim import build_config
from ntnsim.geometry import (
    deploy_basestations,
    deploy_devices,
    guard_bs_count,
    haps_elevation,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cfg = build_config({})
rng = np.random.default_rng(7)

# devices live in a disk; base stations get an extra guard annulus so
# that devices near the rim still see gateways on all sides
devices = deploy_devices(400, cfg.region, rng)
layout = deploy_basestations(cfg.n_basestations, cfg.region, rng)

print(f"region radius          {cfg.region.radius / 1e3:.0f} km")
print(f"guard annulus width    {cfg.region.guard_radius / 1e3:.0f} km")
print(f"inner base stations    {layout.inner.shape[0]}")
print(f"guard base stations    {layout.guard.shape[0]} "
      f"(density-matched: {guard_bs_count(cfg.n_basestations, cfg.region)})")

# the high-altitude platform hovers over the center; its elevation as
# seen from the ground falls off toward the rim
for rho_km in (0.0, 40.0, 80.0):
    el = haps_elevation(np.array([[rho_km * 1e3, 0.0]]), cfg.haps, cfg.region)
    print(f"platform elevation at {rho_km:5.1f} km ground range: {np.degrees(el[0]):.2f} deg")

fig, ax = plt.subplots(figsize=(7, 7))
ax.scatter(devices[:, 0] / 1e3, devices[:, 1] / 1e3, s=6, alpha=0.5,
           label="devices")
ax.scatter(layout.inner[:, 0] / 1e3, layout.inner[:, 1] / 1e3,
           marker="^", s=60, color="tab:red", label="inner BS")
ax.scatter(layout.guard[:, 0] / 1e3, layout.guard[:, 1] / 1e3,
           marker="^", s=14, color="tab:orange", alpha=0.6, label="guard BS")
ax.scatter([0], [0], marker="*", s=200, color="k", label="platform (nadir)")
for r, style in ((cfg.region.radius, "-"), (cfg.region.radius + cfg.region.guard_radius, "--")):
    circ = plt.Circle((0, 0), r / 1e3, fill=False, linestyle=style, color="gray")
    ax.add_patch(circ)
ax.set_xlabel("x [km]")
ax.set_ylabel("y [km]")
ax.set_aspect("equal")
ax.legend(loc="upper right", fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "deployment.png"), dpi=130)
print(f"wrote {os.path.join(OUT, 'deployment.png')}")
