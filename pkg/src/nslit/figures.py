"""Matplotlib renderings saved next to the delimited output.

Figures are drawn on standalone Figure objects (no pyplot state, safe
headless) and saved as PNG with fixed metadata.  The CSV files remain the
quantitative contract; these are the quick-look views.
"""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

__all__ = [
    "save_intensity_figure",
    "save_trajectory_figure",
    "save_momentum_figure",
    "save_carpet_figure",
]

_META = {"Software": "nslit"}


def _new_axes(figsize=(6.0, 3.6)):
    fig = Figure(figsize=figsize)
    ax = fig.subplots()
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    return path


def save_intensity_figure(path, profile, md_density=None, title=None):
    fig, ax = _new_axes()
    x_um = profile.x_grid * 1e6
    ax.plot(x_um, profile.density, lw=0.9, color="#1f3d7a", label=r"$|\psi|^2$")
    if md_density is not None:
        ax.plot(x_um, md_density, lw=0.9, ls="--", color="#c23b22", label="MD arrival")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel(r"x ($\mu$m)")
    ax.set_ylabel("density (1/m)")
    if title:
        ax.set_title(title, fontsize=9)
    return _finish(fig, path)


def save_trajectory_figure(path, ensemble, title=None, half=False):
    fig, ax = _new_axes(figsize=(6.0, 4.2))
    y_mm = ensemble.y_stations * 1e3
    for i in range(ensemble.n_traj):
        xs = ensemble.xs[i]
        if half and xs[0] < 0:
            continue
        ax.plot(xs * 1e6, y_mm, lw=0.35, color="black", alpha=0.45)
    ax.set_xlabel(r"x ($\mu$m)")
    ax.set_ylabel("y (mm)")
    if title:
        ax.set_title(title, fontsize=9)
    return _finish(fig, path)


def save_momentum_figure(path, hist, p_grid, quantum_density, title=None):
    fig, ax = _new_axes()
    scale = 1e27  # kg m/s -> 1e-27 kg m/s for readable ticks
    ax.stairs(
        hist.density / scale,
        hist.bin_edges * scale,
        fill=True,
        color="#7a9cc6",
        alpha=0.8,
        label="Bohmian ensemble",
    )
    ax.plot(
        p_grid * scale,
        quantum_density / scale,
        "k--",
        lw=0.9,
        label=r"$|\bar c(p_x)|^2$",
    )
    ax.set_xlabel(r"$p_x$ ($10^{-27}$ kg m/s)")
    ax.set_ylabel("density")
    ax.legend(frameon=False, fontsize=8)
    if title:
        ax.set_title(title, fontsize=9)
    return _finish(fig, path)


def save_carpet_figure(path, profiles, title=None):
    fig, ax = _new_axes(figsize=(6.4, 4.2))
    x_um = profiles[0].x_grid * 1e6
    y_mm = np.array([p.y for p in profiles]) * 1e3
    z = np.array([p.density for p in profiles])
    ax.pcolormesh(x_um, y_mm, z, cmap="inferno", shading="auto")
    ax.set_xlabel(r"x ($\mu$m)")
    ax.set_ylabel("y (mm)")
    if title:
        ax.set_title(title, fontsize=9)
    return _finish(fig, path)
