"""Transverse wave field behind the grating.

Three evaluation routes are provided and cross-validated against each other:

* ``closed`` -- the propagation integral done exactly per slit: sums of
  Fresnel integrals for the square window, complex-width Gaussians for the
  gaussian window.  Valid at every (x, t > 0), cheap, and the route the
  trajectory integrator uses.
* ``spectral`` -- quadrature of the plane-wave synthesis over a uniform
  k grid, either directly at arbitrary points (bounded by the grid's alias
  window) or on uniform profile grids via the chirp-z transform with a
  per-call grid matched to the requested window and distance.
* ``farfield`` -- the stationary-phase closed form proportional to
  c(x m / hbar t), valid once the quadratic source-size phase is small.

Intensity profiles integrate to 1 over all x; over a finite window the
missing mass is the momentum-density tail beyond the mapped cutoff, which
``probability_mass`` accounts for in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np
from scipy.signal import czt as _czt

from . import _kernels
from .beamgrating import (
    HBAR,
    GratingSpec,
    MomentumSpectrum,
    ParticleBeam,
    _gaussian_norm,
    build_initial_wavefunction,
    spectrum_analytic,
    square_tail_mass,
)
from .errors import DomainError

__all__ = [
    "WaveField",
    "IntensityProfile",
    "psi_spectral",
    "psi_spectral_grid",
    "psi_fresnel",
    "psi_farfield",
    "intensity_profile",
    "carpet",
    "probability_mass",
    "default_profile_grid",
]


@dataclass
class WaveField:
    """Immutable bundle of beam, grating and momentum spectrum.

    ``y_to_t`` maps detector distance to propagation time through the
    classical longitudinal motion y = v t.
    """

    beam: ParticleBeam
    grating: GratingSpec
    spectrum: MomentumSpectrum = dfield(default=None)

    def __post_init__(self):
        if self.spectrum is None:
            self.spectrum = spectrum_analytic(self.grating, self.beam)

    def y_to_t(self, y):
        return y / self.beam.speed

    def t_to_y(self, t):
        return t * self.beam.speed

    def psi(self, x, t, method="closed"):
        if method == "closed":
            return self.psi_and_dpsi(x, t)[0]
        if method == "spectral":
            return psi_spectral(self, x, t)
        if method == "farfield":
            return psi_farfield(self, x, t)
        raise ValueError(f"unknown method {method!r}")

    def psi_closed(self, x, t):
        """Closed-form psi alone (skips the derivative work)."""
        g = self.grating
        if g.window == "square":
            if t <= 0:
                raise DomainError("closed-form square-window field needs t > 0")
            raw, _ = _kernels.square_psi_dpsi_ref(
                x, t, g.edges_interleaved, HBAR, self.beam.mass, want_dpsi=False
            )
            return raw * (np.exp(-1j * np.pi / 4) / np.sqrt(2 * g.n * g.delta))
        return self.psi_and_dpsi(x, t)[0]

    def density_closed(self, x, t):
        """|psi|^2 from the compiled closed-form kernels (fast, ~1e-9 accurate)."""
        g = self.grating
        m = self.beam.mass
        x = np.ascontiguousarray(x, dtype=float)
        if g.window == "square":
            if t <= 0:
                raise DomainError("closed-form square-window field needs t > 0")
            _, dens = _kernels.square_velocity(x, t, g.edges_interleaved, HBAR, m)
            return dens / (2 * g.n * g.delta)
        if t < 0:
            raise DomainError("need t >= 0")
        _, dens = _kernels.gaussian_velocity(x, t, g.centers, g.a, HBAR, m)
        tau = 2 * HBAR * t / (m * g.a**2)
        return dens * _gaussian_norm(g) ** 2 / np.sqrt(1 + tau * tau)

    def psi_and_dpsi(self, x, t):
        """Closed-form psi and d(psi)/dx at arbitrary positions."""
        g = self.grating
        if g.window == "square":
            if t <= 0:
                raise DomainError("closed-form square-window field needs t > 0")
            raw, draw = _kernels.square_psi_dpsi_ref(
                x, t, g.edges_interleaved, HBAR, self.beam.mass
            )
            amp = np.exp(-1j * np.pi / 4) / np.sqrt(2 * g.n * g.delta)
            return amp * raw, amp * draw
        if t < 0:
            raise DomainError("need t >= 0")
        raw, draw = _kernels.gaussian_psi_dpsi_ref(x, t, g.centers, g.a, HBAR, self.beam.mass)
        tau = 2 * HBAR * t / (self.beam.mass * g.a**2)
        amp = _gaussian_norm(g) / np.sqrt(1 + 1j * tau)
        return amp * raw, amp * draw

    def farfield_phase_error(self, t):
        """Largest neglected quadratic source phase m x'^2 / 2 hbar t (rad)."""
        return self.beam.mass * (self.grating.span / 2) ** 2 / (2 * HBAR * t)


@dataclass
class IntensityProfile:
    """|psi|^2 on a transverse grid at one detector distance."""

    y: float
    x_grid: np.ndarray
    density: np.ndarray
    md_density: np.ndarray | None = None

    def window_mass(self):
        return float(np.trapezoid(self.density, self.x_grid))


def psi_spectral(field, x, t):
    """Plane-wave synthesis over the stored k grid at arbitrary points.

    The synthesized field is periodic with period 2 pi / dk; positions
    outside that alias-safe window are refused.
    """
    if t < 0:
        raise DomainError("need t >= 0")
    spec = field.spectrum
    dk = spec.dk
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    half = np.pi / dk
    if np.any(np.abs(x) > half):
        raise DomainError(
            f"|x| exceeds the alias-safe half window {half:.3e} m of the k grid"
        )
    phase_t = HBAR * t / (2 * field.beam.mass)
    a = spec.c_values * np.exp(-1j * phase_t * spec.k_grid**2)
    out = np.empty(len(x), dtype=complex)
    chunk = max(1, int(4e6 / len(spec.k_grid)))
    for i in range(0, len(x), chunk):
        xs = x[i : i + chunk]
        out[i : i + chunk] = np.exp(1j * np.outer(xs, spec.k_grid)) @ a
    out *= dk / np.sqrt(2 * np.pi)
    return out[0] if scalar else out


def psi_fresnel(field, x, t):
    """Closed-form evaluation of the propagation integral over the openings.

    Mathematically identical to the spectral synthesis with the full
    (untruncated) spectrum; exact at any t > 0.
    """
    if t <= 0:
        raise DomainError("Fresnel kernel is singular at t = 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    psi, _ = field.psi_and_dpsi(np.atleast_1d(x), t)
    return psi[0] if scalar else psi


def psi_farfield(field, x, t):
    """Stationary-phase form sqrt(m/hbar t) e^{-i pi/4} e^{i x^2 m/2 hbar t} c(x m/hbar t).

    The prefactor is fixed by unitarity (change of variables k = x m/hbar t
    maps |psi|^2 onto the momentum density), giving |psi|^2 = (m/hbar t) |c|^2.
    """
    if t <= 0:
        raise DomainError("need t > 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    alpha = field.beam.mass / (HBAR * t)
    c = field.spectrum.c_at(x * alpha)
    out = np.sqrt(alpha) * np.exp(-1j * np.pi / 4) * np.exp(1j * alpha * x**2 / 2) * c
    return out[0] if scalar else out


def default_profile_grid(field, y, n_points=4096):
    """Symmetric grid spanning max(3 n d, y k_max / k) on both sides."""
    g = field.grating
    half = max(3 * g.n * g.d, y * field.spectrum.k_max / field.beam.wavenumber)
    return np.linspace(-half, half, n_points)


def _spectral_profile(field, x_grid, t):
    """Uniform-grid spectral synthesis via the chirp-z transform.

    Builds a fresh k grid wide enough that every mode reaching the window at
    time t is present (geometric mapping plus an envelope margin) and fine
    enough that the synthesis period exceeds the occupied region, so no
    aliased copy folds back in.  Falls back to the stored grid for numeric
    spectra, whose analytic form is unknown.
    """
    m = field.beam.mass
    g = field.grating
    spec = field.spectrum
    x = np.asarray(x_grid, dtype=float)
    x_max = float(np.max(np.abs(x)))
    if spec.analytic and t > 0:
        k_hi = m * (x_max + g.span) / (HBAR * t)
        if g.window == "square":
            k_hi += 16 * np.pi / g.delta
            j = max(1, int(np.ceil(k_hi * g.delta / (2 * np.pi))))
            k_hi = j * 2 * np.pi / g.delta
        else:
            k_hi = max(k_hi, 10.0 / g.a)
        period = 2.6 * ((HBAR * t / m) * k_hi + g.span + x_max)
        dk = 2 * np.pi / period
        n_half = int(np.ceil(k_hi / dk))
        if n_half > 3e7:
            raise DomainError("spectral profile grid would exceed 3e7 modes")
        kg = np.linspace(-k_hi, k_hi, 2 * n_half + 1)
        c = spec.c_at(kg)
    else:
        kg = spec.k_grid
        c = spec.c_values
        dk = spec.dk
        if x_max > np.pi / dk:
            raise DomainError("profile window exceeds the stored grid's alias window")
    dk = kg[1] - kg[0]
    a_j = c * np.exp(-1j * (HBAR * t / (2 * m)) * kg**2)
    if len(x) > 1:
        dxp = x[1] - x[0]
        if not np.allclose(np.diff(x), dxp, rtol=1e-6, atol=abs(dxp) * 1e-6):
            raise DomainError("profile grid must be uniform")
    else:
        dxp = 1.0
    out = _czt(a_j, m=len(x), w=np.exp(1j * dk * dxp), a=np.exp(-1j * dk * x[0]))
    out *= np.exp(1j * kg[0] * x)
    out *= dk / np.sqrt(2 * np.pi)
    return out


def psi_spectral_grid(field, x_grid, t):
    """Spectral synthesis on a uniform grid via the chirp-z transform.

    Unlike ``psi_spectral`` this rebuilds the k grid per call (analytic
    spectra), so it stays locally accurate at any distance and window.
    """
    if t < 0:
        raise DomainError("need t >= 0")
    return _spectral_profile(field, x_grid, t)


def intensity_profile(field, y, x_grid=None, method="spectral"):
    """Particle distribution |psi|^2 at distance y on a transverse grid."""
    if y < 0:
        raise DomainError("need y >= 0")
    t = field.y_to_t(y)
    if x_grid is None:
        x_grid = default_profile_grid(field, y)
    x_grid = np.asarray(x_grid, dtype=float)
    if t == 0:
        psi = build_initial_wavefunction(field.grating, x_grid)
        return IntensityProfile(y=y, x_grid=x_grid, density=np.abs(psi) ** 2)
    if method == "spectral":
        psi = _spectral_profile(field, x_grid, t)
    elif method == "closed":
        psi = field.psi_and_dpsi(x_grid, t)[0]
    elif method == "farfield":
        psi = psi_farfield(field, x_grid, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return IntensityProfile(y=y, x_grid=x_grid, density=np.abs(psi) ** 2)


def carpet(field, y_list, x_grid=None, method="spectral"):
    """Intensity profiles at a list of distances, sharing one grid."""
    if x_grid is None:
        x_grid = default_profile_grid(field, max(y_list))
    return [intensity_profile(field, y, x_grid=x_grid, method=method) for y in y_list]


def probability_mass(field, t):
    """Total probability at time t: window quadrature plus exact tail.

    Splits the line into a finite window resolved down to the intensity beat
    scale (set by the aperture span) and the remainder, whose mass equals the
    momentum-density tail beyond the mapped cutoff K = m s / hbar t.  The
    window margin s is chosen so the mapping ambiguity (of order span/s) is
    negligible at the 1e-7 level.  Returns (total, window_mass, tail_mass).
    """
    if t == 0:
        return 1.0, 1.0, 0.0
    if t < 0:
        raise DomainError("need t >= 0")
    g = field.grating
    m = field.beam.mass
    w_span = g.span
    if g.window == "square":
        c_t = 2 * HBAR * t / (np.pi * g.delta * m)
        s_margin = max(1.5 * w_span, np.sqrt(w_span * c_t / 3e-7))
        half = s_margin + w_span / 2
        dx = min(g.delta / 16, np.pi * HBAR * t / (8 * m * w_span))
        n = int(2 * half / dx) + 1
        if n > 2**24:
            raise DomainError("mass window would need too many samples")
        x = np.linspace(-half, half, n)
        window = float(np.trapezoid(field.density_closed(x, t), x))
        tail = square_tail_mass(g, m * s_margin / (HBAR * t))
        return window + tail, window, tail
    tau = 2 * HBAR * t / (m * g.a**2)
    width = (g.a / 2) * np.sqrt(1 + tau**2)
    half = abs(g.centers[-1]) + 9 * width
    dx = min(width / 8, np.pi * HBAR * t / (8 * m * w_span)) if t > 0 else width / 8
    n = min(int(2 * half / dx) + 1, 2**22)
    x = np.linspace(-half, half, n)
    window = float(np.trapezoid(field.density_closed(x, t), x))
    return window, window, 0.0
