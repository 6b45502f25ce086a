"""
What does each deployment cost over twenty years?
=================================================

Net present value of three ways to collect the same uplink traffic:
rent satellite capacity per device, fly one platform, or lease ground
base stations. Crossover points mark where the cheapest option changes.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from ntnsim import build_config
from ntnsim.runner import run_cost_report

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cfg = build_config({})
summary = run_cost_report(cfg, out_dir=os.path.join(OUT, "cost"))

rows = pd.read_csv(os.path.join(OUT, "cost", "cost_curves.csv"), comment="#")

fig, ax = plt.subplots(figsize=(7, 4.5))
n = rows["n_devices"]
ax.plot(n, rows["leo_total"] / 1e6, label="satellite, pay per device")
ax.plot(n, rows["haps_total"] / 1e6, label="platform, fixed")
ax.plot(n, rows["tn10_total"] / 1e6, label="10 leased base stations")
ax.plot(n, rows["tn20_total"] / 1e6, label="20 leased base stations")

for pair, nx in summary["scalars"]["crossovers"].items():
    if nx:
        ax.axvline(nx, color="gray", lw=0.7, ls=":")
        print(f"{pair:14s} crossover at N = {nx}")

ax.set_xlabel("number of devices")
ax.set_ylabel("20-year NPV [$ million]")
ax.grid(alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "cost_comparison.png"), dpi=130)

print(f"platform total:             ${summary['scalars']['haps_total']:,.2f}")
for m, v in summary["scalars"]["tn_totals"].items():
    print(f"terrestrial total (M={m:>2s}):   ${v:,.2f}")
print(f"wrote {os.path.join(OUT, 'cost_comparison.png')}")
