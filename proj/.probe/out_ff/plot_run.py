#!/usr/bin/env python3
"""Render run_log.csv and run_profiles.csv from this directory."""
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
    col, lg = rows("run_log.csv")
    t = [float(r[col["t"]]) / 3600.0 for r in lg]
    fig, ax = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    ax[0].plot(t, [1e3 * float(r[col["dgamma"]]) for r in lg])
    ax[0].set_ylabel("front error [mm]")
    ax[1].semilogy(t, [max(float(r[col["l2_solid"]]), 1e-300) for r in lg], label="solid")
    ax[1].semilogy(t, [max(float(r[col["l2_liquid"]]), 1e-300) for r in lg], label="liquid")
    ax[1].set_ylabel("field error L2 [K m$^{1/2}$]")
    ax[1].legend()
    ax[2].plot(t, [float(r[col["q_solid"]]) for r in lg], label="solid")
    ax[2].plot(t, [float(r[col["q_liquid"]]) for r in lg], label="liquid")
    ax[2].set_ylabel("boundary heat flux [W/m$^2$]")
    ax[2].set_xlabel("t [h]")
    ax[2].legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "run_log.png"), dpi=160)

    col, pr = rows("run_profiles.csv")
    fig2, ax2 = plt.subplots(figsize=(7, 5))
    by_t = {}
    for r in pr:
        key = float(r[col["t"]])
        by_t.setdefault(key, []).append(
            (float(r[col["z"]]), float(r[col["temperature"]]), float(r[col["reference"]])))
    for ti in sorted(by_t):
        pts = sorted(by_t[ti])
        zs = [1e3 * z for z, _, _ in pts]
        line, = ax2.plot(zs, [T for _, T, _ in pts], label="t = %.1f h" % (ti / 3600.0))
        ax2.plot(zs, [Tr for _, _, Tr in pts], "--", color=line.get_color(), linewidth=0.8)
    ax2.set_xlabel("z [mm]")
    ax2.set_ylabel("temperature [K] (dashed: reference)")
    ax2.legend(fontsize=8)
    fig2.tight_layout()
    fig2.savefig(os.path.join(HERE, "run_profiles.png"), dpi=160)


if __name__ == "__main__":
    main()
