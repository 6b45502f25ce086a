"""
Success probability versus network load
=======================================

Full medium-access simulation: erasures plus destructive collisions,
decoded anywhere in the gateway mix. Satellite-only coverage degrades
quickly as devices multiply; a terrestrial mesh barely notices.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ntnsim import build_config
from ntnsim.runner import ScenarioSpec, run_success_experiment

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cfg = build_config({"n_basestations": "20"})
sweep = [100, 500, 2000]

fig, ax = plt.subplots(figsize=(7, 4.5))
for scenario in ("leo", "haps", "tn", "leo+tn", "haps+tn"):
    spec = ScenarioSpec(scenario, sweep[0], 15, 3600.0, "success", 4)
    summary = run_success_experiment(spec, cfg, n_devices_list=sweep, workers=1)
    pts = summary["scalars"]["points"]
    means = [p["mean_success"] for p in pts]
    cis = [p["ci95"] or 0.0 for p in pts]
    ax.errorbar(sweep, means, yerr=cis, marker="o", capsize=3, label=scenario)
    print(f"{scenario:8s} " + "  ".join(f"{m:.3f}" for m in means))

ax.set_xscale("log")
ax.set_xlabel("number of devices")
ax.set_ylabel("packet success probability")
ax.set_ylim(0, 1.02)
ax.grid(alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "success_curves.png"), dpi=130)
print(f"wrote {os.path.join(OUT, 'success_curves.png')}")
