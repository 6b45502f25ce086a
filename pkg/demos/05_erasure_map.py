"""
Where packets get lost: spatial erasure maps
============================================

Runs a small erasure campaign for three gateway mixes and draws the
resulting coverage maps. Collisions are excluded here; this is purely
about link quality.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from ntnsim import build_config
from ntnsim.runner import ScenarioSpec, run_erasure_experiment

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cfg = build_config({"heatmap_bin_m": "8000"})

fig, axes = plt.subplots(1, 3, figsize=(13, 4))
for ax, scenario in zip(axes, ("haps", "tn", "haps+tn")):
    spec = ScenarioSpec(scenario, 300, 30, 2 * 3600.0, "erasure", 99)
    out_dir = os.path.join(OUT, f"erasure_{scenario.replace('+', '_')}")
    summary = run_erasure_experiment(spec, cfg, workers=1, out_dir=out_dir)
    sc = summary["scalars"]
    print(f"{scenario:8s} mean erasure {sc['mean_erasure']:.3f}   "
          f"ring means "
          + " ".join("--" if m is None else f"{m:.2f}" for m in sc["ring_means"]))

    # the heatmap CSV is sparse (empty bins skipped); rebuild the grid
    rows = pd.read_csv(os.path.join(out_dir, "heatmap.csv"), comment="#")
    r = cfg.region.radius
    extent = [-r / 1e3, r / 1e3, -r / 1e3, r / 1e3]
    n = int(round(2 * r / cfg.heatmap_bin_m))
    img = np.full((n, n), np.nan)
    ix = ((rows["x_bin_m"] + r) / cfg.heatmap_bin_m).astype(int)
    iy = ((rows["y_bin_m"] + r) / cfg.heatmap_bin_m).astype(int)
    img[iy, ix] = rows["mean_erasure"]
    im = ax.imshow(img, origin="lower", extent=extent, vmin=0, vmax=1,
                   cmap="viridis")
    ax.set_title(scenario)
    ax.set_xlabel("x [km]")
axes[0].set_ylabel("y [km]")
fig.colorbar(im, ax=axes, label="mean erasure probability", shrink=0.8)
fig.savefig(os.path.join(OUT, "erasure_maps.png"), dpi=130)
print(f"wrote {os.path.join(OUT, 'erasure_maps.png')}")
