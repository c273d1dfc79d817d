"""Momentum statistics: Bohmian-ensemble histograms vs the wave-function
momentum density.

The wave-function momentum density |c(p/hbar)|^2 / hbar never changes under
free flight; the Bohmian-ensemble transverse-momentum distribution starts
concentrated at zero (the initial state is real) and relaxes toward the
wave-function density as the motion straightens out.  The far-field identity
follows from the change of variables p = x m / t with d(p)/dx = m/t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamgrating import HBAR
from .errors import DomainError

__all__ = [
    "MomentumHistogram",
    "momentum_bins",
    "bohm_momentum_histogram",
    "quantum_momentum_density",
    "farfield_jacobian_density",
    "distribution_distance",
]

# Quadratic source-size phase below which the far-field form is trusted.
FARFIELD_PHASE_LIMIT = 0.1


@dataclass
class MomentumHistogram:
    """Normalized histogram of ensemble transverse momenta at one distance."""

    y: float
    bin_edges: np.ndarray
    density: np.ndarray
    sample_count: int
    excluded_count: int

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def mass(self):
        return float(np.sum(self.density * np.diff(self.bin_edges)))


def momentum_bins(grating, bins=81, spread_orders=4.0):
    """Symmetric bin edges spanning spread_orders grating orders of 2 pi hbar / d."""
    p_half = spread_orders * 2 * np.pi * HBAR / grating.d
    return np.linspace(-p_half, p_half, bins + 1)


def bohm_momentum_histogram(ensemble, vf, y, bins=81):
    """Histogram of m v_x over the ensemble at distance y.

    Momenta are the stored velocity-field evaluations at the station time
    (never differenced positions).  Node-stalled trajectories are excluded
    and tallied in ``excluded_count``.
    """
    t_y = y / ensemble.v_y
    idx = ensemble.station_index(t_y)
    mass = vf.field.beam.mass
    ok = ~ensemble.stalled
    p = mass * ensemble.vs[ok, idx]
    edges = bins if isinstance(bins, np.ndarray) else momentum_bins(vf.field.grating, bins)
    counts, edges = np.histogram(p, bins=edges)
    widths = np.diff(edges)
    total = counts.sum()
    if total == 0:
        raise DomainError("no trajectories fall inside the momentum bins")
    density = counts / (total * widths)
    return MomentumHistogram(
        y=float(y),
        bin_edges=edges,
        density=density,
        sample_count=int(total),
        excluded_count=int(ensemble.n_traj - ok.sum()),
    )


def quantum_momentum_density(spectrum, p_grid):
    """Wave-function momentum density |c(p/hbar)|^2 / hbar; distance-free."""
    p = np.asarray(p_grid, dtype=float)
    return spectrum.density_at(p / HBAR) / HBAR


def farfield_jacobian_density(field, t, p_grid):
    """Momentum density from |psi|^2 via the far-field Jacobian m/t.

    Evaluates (t/m) |psi(p t / m, t)|^2; equal to the wave-function momentum
    density once the far-field form holds.  Returns (density, farfield_ok);
    the flag is False where the position-to-momentum map cannot be trusted
    (the quadratic source phase is still large).
    """
    if t <= 0:
        raise DomainError("need t > 0")
    p = np.asarray(p_grid, dtype=float)
    m = field.beam.mass
    x = p * t / m
    psi = field.psi_and_dpsi(x, t)[0]
    dens = (t / m) * np.abs(psi) ** 2
    ok = field.farfield_phase_error(t) < FARFIELD_PHASE_LIMIT
    return dens, bool(ok)


def distribution_distance(a, b, dx):
    """L1 distance of two unit-normalized densities on a common grid, in [0, 2]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("densities must share a grid")
    ma = a.sum() * dx
    mb = b.sum() * dx
    if ma <= 0 or mb <= 0:
        raise ValueError("densities must carry positive mass")
    return float(np.abs(a / ma - b / mb).sum() * dx)
