"""Plot mean max-min EE per architecture from fig2.csv.

Usage: python plot_fig2.py [output.png]
"""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open('fig2.csv', newline="")))
fig, ax = plt.subplots(figsize=(6, 4))
for arch in ['NoRIS', 'LPD', 'GPD', 'GPBD']:
    pts = sorted((float(r["value"]), float(r["mean_min_ee"]), float(r["stderr"]))
                 for r in rows if r["arch"] == arch)
    if not pts:
        continue
    x, y, e = zip(*pts)
    ax.errorbar(x, y, yerr=[0 if v != v else v for v in e], marker="o", capsize=3, label=arch)
ax.set_xlabel('P_RIS,n (dBm)')
ax.set_ylabel("average max-min EE (bit/J/use)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else 'fig2.png', dpi=150)
