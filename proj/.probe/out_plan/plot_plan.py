#!/usr/bin/env python3
"""Render plan_trajectory.csv and plan_profiles.csv from this directory."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(HERE, name)) as f:
        rdr = csv.reader(line for line in f if not line.startswith("#"))
        header = next(rdr)
        return {h: i for i, h in enumerate(header)}, list(rdr)


def main():
    col, tr = rows("plan_trajectory.csv")
    t = [float(r[col["t"]]) / 3600.0 for r in tr]
    fig, ax = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    ax[0].plot(t, [1e3 * float(r[col["gamma_r"]]) for r in tr])
    ax[0].set_ylabel("interface position [mm]")
    ax[1].plot(t, [3.6e6 * float(r[col["gamma_dot_r"]]) for r in tr])
    ax[1].set_ylabel("growth rate [mm/h]")
    ax[2].plot(t, [float(r[col["q_solid"]]) for r in tr], label="solid")
    ax[2].plot(t, [float(r[col["q_liquid"]]) for r in tr], label="liquid")
    ax[2].set_ylabel("boundary heat flux [W/m$^2$]")
    ax[2].set_xlabel("t [h]")
    ax[2].legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "plan_trajectory.png"), dpi=160)

    col, pr = rows("plan_profiles.csv")
    fig2, ax2 = plt.subplots(figsize=(7, 5))
    by_t = {}
    for r in pr:
        key = float(r[col["t"]])
        by_t.setdefault(key, []).append((float(r[col["z"]]), float(r[col["temperature"]])))
    for ti in sorted(by_t):
        pts = sorted(by_t[ti])
        ax2.plot([1e3 * z for z, _ in pts], [T for _, T in pts],
                 label="t = %.1f h" % (ti / 3600.0))
    ax2.set_xlabel("z [mm]")
    ax2.set_ylabel("temperature [K]")
    ax2.legend(fontsize=8)
    fig2.tight_layout()
    fig2.savefig(os.path.join(HERE, "plan_profiles.png"), dpi=160)


if __name__ == "__main__":
    main()
