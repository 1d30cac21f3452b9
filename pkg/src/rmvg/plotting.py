"""Figures rendered next to the CSV output of a sweep."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .harness import SweepResult

DPI = 120


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "_-" else "_" for c in name)


def manifold_heatmap(rho, omega, values, title: str, path) -> None:
    fig = Figure(figsize=(4.8, 3.8))
    ax = fig.add_subplot()
    # cell-centred image; rho on the vertical axis as in the grid index k
    def edges(v):
        v = np.asarray(v, dtype=float)
        if v.size == 1:
            return np.array([v[0] - 0.5, v[0] + 0.5])
        mid = 0.5 * (v[1:] + v[:-1])
        return np.concatenate([[2 * v[0] - mid[0]], mid, [2 * v[-1] - mid[-1]]])
    mesh = ax.pcolormesh(edges(omega), edges(rho), values, shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel(r"$\omega_i$")
    ax.set_ylabel(r"$\rho$")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)


def memory_curves(rho, mc, window_mc, deltas: dict, title: str, path) -> None:
    fig = Figure(figsize=(5.5, 5.0))
    top, bottom = fig.subplots(2, 1, sharex=True)
    top.plot(rho, mc, "k-", label="MC")
    top.plot(rho, window_mc, "k--", label="MC (window)")
    top.set_ylabel("memory capacity")
    top.legend(frameon=False)
    for name, v in deltas.items():
        bottom.plot(rho, v, label=name)
    bottom.set_xlabel(r"$\rho$")
    bottom.set_ylabel(r"$\delta$")
    bottom.legend(frameon=False, fontsize=7, ncol=2)
    top.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)


def render_figures(result: SweepResult, out_dir) -> list:
    out = Path(out_dir)
    m = result.manifold
    paths = []
    if result.kind == "accuracy":
        for name, values in m.means.items():
            p = out / f"manifold_{_safe(name)}.png"
            manifold_heatmap(m.rho, m.omega, values, name, p)
            paths.append(p)
        return paths
    windows = [name[3:] for name in m.means if name.startswith("MC_")]
    for tag in windows:
        deltas = {n[: -len(tag) - 1]: m.means[n][:, 0] for n in m.means
                  if n.startswith("delta_") and n.endswith("_" + tag)}
        p = out / f"memory_{tag}.png"
        memory_curves(m.rho, m.means["MC"][:, 0], m.means["MC_" + tag][:, 0],
                      deltas, "window " + tag.replace("_", ":"), p)
        paths.append(p)
    return paths
