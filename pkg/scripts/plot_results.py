#!/usr/bin/env python3
"""Plot CSV outputs produced by the fluxgate CLI (not part of the data contract).

Usage:
    python scripts/plot_results.py spectrum  OUTDIR   # two-qubit levels vs flux
    python scripts/plot_results.py detuning  OUTDIR   # error/duration vs detuning
    python scripts/plot_results.py map2d     OUTDIR   # (delta_phi, t_p) error map
    python scripts/plot_results.py bloch     OUTDIR   # trajectory on the Bloch sphere
    python scripts/plot_results.py noise     OUTDIR   # error curves vs detuning shift
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def plot_spectrum(out: Path) -> None:
    df = pd.read_csv(out / "spectrum_two_qubit.csv")
    for col in ("e_01_ghz", "e_10_ghz", "e_11_ghz"):
        plt.plot(df["phi_over_pi"], df[col] - df["e_00_ghz"], label=col[2:4])
    plt.xlabel(r"$\phi/\pi$")
    plt.ylabel("E - E00 (GHz)")
    plt.legend()


def plot_detuning(out: Path) -> None:
    df = pd.read_csv(out / "detuning_scan.csv")
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
    ax1.plot(df["delta_phi_over_pi"], df["duration_ns"], "o-")
    ax1.set_ylabel("gate duration (ns)")
    ax2.semilogy(df["delta_phi_over_pi"], df["error"], "o-")
    ax2.set_ylabel("coherent error")
    ax2.set_xlabel(r"$\delta\phi/\pi$")


def plot_map2d(out: Path) -> None:
    df = pd.read_csv(out / "fidelity_map.csv")
    dphis = np.sort(df["delta_phi_over_pi"].unique())
    t_ps = np.sort(df["t_p_ns"].unique())
    grid = df.pivot_table(index="t_p_ns", columns="delta_phi_over_pi", values="error")
    plt.pcolormesh(dphis, t_ps, np.log10(grid.values), shading="auto", cmap="viridis_r")
    plt.colorbar(label="log10 error")
    plt.xlabel(r"$\delta\phi/\pi$")
    plt.ylabel(r"$t_p$ (ns)")


def plot_bloch(out: Path) -> None:
    paths = sorted(out.glob("trajectory_*.csv"))
    df = pd.read_csv(paths[0])
    ax = plt.figure().add_subplot(projection="3d")
    ax.plot(df["bloch_x"], df["bloch_y"], df["bloch_z"])
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_box_aspect((1, 1, 1))


def plot_noise(out: Path) -> None:
    paths = sorted(out.glob("noise_*.csv"))
    df = pd.read_csv(paths[0])
    x = df.columns[0]
    for col in df.columns[1:]:
        plt.semilogy(df[x], df[col], label=col)
    plt.xlabel(x)
    plt.ylabel("gate error")
    plt.legend()


def main() -> None:
    if len(sys.argv) != 3:
        print(__doc__)
        raise SystemExit(2)
    kind, out = sys.argv[1], Path(sys.argv[2])
    {
        "spectrum": plot_spectrum,
        "detuning": plot_detuning,
        "map2d": plot_map2d,
        "bloch": plot_bloch,
        "noise": plot_noise,
    }[kind](out)
    target = out / f"plot_{kind}.png"
    plt.savefig(target, dpi=160, bbox_inches="tight")
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
