#!/usr/bin/env python3
"""Render run directories written by `dss run`.

For each directory: boundary trace X(1, t), max_z |X| and V against time,
and a (z, t) heat map per component from field.csv. With several
directories a final figure overlays max_z |X| for comparison.

    python3 scripts/plot_runs.py out/contractive-2x2-ell0.1 out/contractive-2x2-ell1 --out plots
"""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_run(run: Path, out: Path) -> pd.DataFrame:
    boundary = pd.read_csv(run / "boundary.csv")
    monitor = pd.read_csv(run / "monitor.csv")
    field = pd.read_csv(run / "field.csv")
    summary = json.loads((run / "summary.json").read_text())
    name = summary["name"]
    comps = [c for c in field.columns if c.startswith("X")]

    fig, axes = plt.subplots(2, 2, figsize=(11, 7))
    ax = axes[0, 0]
    for c in boundary.columns:
        if c.endswith("_1"):
            ax.plot(boundary["t"], boundary[c], label=c.replace("_1", "(1,t)"))
    ax.set_xlabel("t")
    ax.set_title("boundary trace")
    ax.legend()

    ax = axes[0, 1]
    ax.semilogy(monitor["t"], monitor["maxnorm"].clip(lower=1e-300), label="max_z |X|")
    if monitor["V"].notna().any():
        ax.semilogy(monitor["t"], monitor["V"].clip(lower=1e-300), label="V")
    if summary.get("gamma_eps"):
        ax.axhline(summary["gamma_eps"] ** 0.5, ls="--", c="k", lw=0.8, label="sqrt(gamma_eps)")
    ax.set_xlabel("t")
    ax.set_title("norms")
    ax.legend()

    for ax, c in zip(axes[1], comps[:2]):
        grid = field.pivot(index="t", columns="z", values=c)
        im = ax.imshow(
            grid.values,
            aspect="auto",
            origin="lower",
            extent=[grid.columns.min(), grid.columns.max(), grid.index.min(), grid.index.max()],
            cmap="RdBu_r",
        )
        ax.set_xlabel("z")
        ax.set_ylabel("t")
        ax.set_title(c)
        fig.colorbar(im, ax=ax)

    fig.suptitle(f"{name} (certificate {summary['certificate_status']})")
    fig.tight_layout()
    fig.savefig(out / f"{name}.png", dpi=120)
    plt.close(fig)
    monitor["name"] = name
    return monitor


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("runs", nargs="+", type=Path)
    ap.add_argument("--out", type=Path, default=Path("plots"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    monitors = [plot_run(r, args.out) for r in args.runs]
    if len(monitors) > 1:
        fig, ax = plt.subplots(figsize=(7, 4))
        for m in monitors:
            ax.semilogy(m["t"], m["maxnorm"].clip(lower=1e-300), label=m["name"].iloc[0])
        ax.set_xlabel("t")
        ax.set_ylabel("max_z |X|")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.out / "comparison.png", dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()
