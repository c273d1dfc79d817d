"""Guidance-condition velocity field and trajectory ensembles.

The transverse velocity is (hbar/m) Im[d_x psi / psi], evaluated from the
closed-form psi and d_x psi of the wave field (no finite differencing).
Trajectories integrate it with RK4 on a deterministic schedule: logarithmic
steps near the launch (the edge-diffraction field is self-similar in
sqrt(t)), uniform steps through the revival region, geometric stretch far
beyond it.  Near a node of |psi|^2, or when a neighbor gap contracts faster
than the flow allows, the step is halved recursively; a trajectory that
exhausts the halving budget is flagged ``stalled`` and kept.

Longitudinal motion is classical, y = (hbar k / m) t, so distances and times
are interchangeable through the beam speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .beamgrating import HBAR, _gaussian_norm, sample_initial_positions, talbot_length
from .errors import DomainError

__all__ = [
    "StepPolicy",
    "VelocityField",
    "TrajectoryEnsemble",
    "velocity_x",
    "integrate_trajectory",
    "launch_ensemble",
    "order_violations",
]


@dataclass(frozen=True)
class StepPolicy:
    """Deterministic step schedule for the trajectory integrator.

    Near the launch the edge-diffraction field is self-similar in sqrt(t)
    and evolves on the time scale of t itself, so the early phases step
    logarithmically: dt = t / launch_factor until the neighbor-slit chirp
    (phase rate d^2 m / 2 hbar t^2 per unit time) is resolved at the milder
    log_factor, then dt = t / log_factor.  Once that exceeds the uniform
    step the schedule is fixed at ``steps_per_talbot`` per Talbot time out
    to ``stretch_after_talbots``; beyond, the step grows by
    ``stretch_factor`` per step up to ``max_step_fraction`` of a Talbot
    time.  ``start_fraction`` sets the launch time t_eps as a fraction of
    the Talbot time (the square-window velocity is ill-defined at t = 0).
    """

    steps_per_talbot: int = 4000
    launch_factor: float = 4096.0
    launch_until_talbots: float = 0.008
    log_factor: float = 1536.0
    stretch_after_talbots: float = 2.0
    stretch_factor: float = 1.02
    max_step_fraction: float = 1.0 / 150.0
    start_fraction: float = 1e-3
    max_halvings: int = 12


@dataclass
class VelocityField:
    """Bohmian velocity field of a wave field.

    ``epsilon_node`` is the density floor, relative to the instantaneous
    reference density scale, below which the node-proximity signal fires.
    ``k_cap`` bounds |v_x| at hbar k_cap / m (defaults to the spectrum
    cutoff).
    """

    field: object
    epsilon_node: float = 1e-7
    k_cap: float | None = None

    def __post_init__(self):
        if self.k_cap is None:
            self.k_cap = self.field.spectrum.k_max
        g = self.field.grating
        m = self.field.beam.mass
        self._edges = g.edges_interleaved
        self._mass = m
        self._v_cap = HBAR * self.k_cap / m
        if g.window == "square":
            self._rho0 = 1.0 / (g.n * g.delta)
        else:
            psi0, _ = self.field.psi_and_dpsi(np.array([g.centers[0]]), 0.0)
            self._rho0 = float(np.abs(psi0[0]) ** 2)
        self._cmax2 = self.field.spectrum.max_density()

    @property
    def v_cap(self):
        return self._v_cap

    def density_scale(self, t):
        """Instantaneous typical peak density; initial plateau or spread peak."""
        if t <= 0:
            return self._rho0
        return min(self._rho0, self._mass * self._cmax2 / (HBAR * t))

    def _raw(self, x, t):
        """Kernel velocity and density in kernel-relative units, with threshold."""
        g = self.field.grating
        m = self._mass
        if g.window == "square":
            v, dens = _kernels.square_velocity(x, t, self._edges, HBAR, m)
            amp2 = 1.0 / (2 * g.n * g.delta)
        else:
            v, dens = _kernels.gaussian_velocity(x, t, g.centers, g.a, HBAR, m)
            tau = 2 * HBAR * t / (m * g.a**2)
            amp2 = _gaussian_norm(g) ** 2 / np.sqrt(1 + tau * tau)
        thr = self.epsilon_node * self.density_scale(t) / amp2
        return v, dens, thr

    def velocity_and_flags(self, x, t):
        """Clamped velocity plus the node-proximity flags at these points."""
        x = np.asarray(x, dtype=float)
        if t == 0:
            return np.zeros_like(x), np.zeros(x.shape, dtype=bool)
        v, dens, thr = self._raw(x, t)
        flags = (dens < thr) | ~np.isfinite(v)
        v = np.where(np.isfinite(v), np.clip(v, -self._v_cap, self._v_cap), 0.0)
        return v, flags

    def velocity(self, x, t):
        return self.velocity_and_flags(x, t)[0]


def velocity_x(vf, x, t):
    """Transverse guidance velocity at (x, t); zero at t = 0 (real initial state)."""
    if t < 0:
        raise DomainError("need t >= 0")
    x_arr = np.asarray(x, dtype=float)
    v = vf.velocity(np.atleast_1d(x_arr), t)
    return float(v[0]) if x_arr.ndim == 0 else v


@dataclass
class TrajectoryEnsemble:
    """Trajectory positions and velocities sampled at common station times."""

    x0: np.ndarray
    times: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    stalled: np.ndarray
    seed: int | None
    v_y: float
    y0: float = 0.0

    @property
    def n_traj(self):
        return len(self.x0)

    def y_of(self, t):
        return self.v_y * np.asarray(t)

    @property
    def y_stations(self):
        return self.y_of(self.times)

    def station_index(self, t, rtol=1e-9):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > rtol * max(t, self.times[i]):
            raise DomainError(f"no stored station at t = {t:.6e} s")
        return i

    @property
    def records(self):
        """Per-trajectory view: list of dicts with x0 and (t, x, v) samples."""
        return [
            {
                "x0": float(self.x0[i]),
                "stalled": bool(self.stalled[i]),
                "samples": [
                    (float(t), float(x), float(v))
                    for t, x, v in zip(self.times, self.xs[i], self.vs[i])
                ],
            }
            for i in range(self.n_traj)
        ]


def _schedule(t_eps, t_final, t_talbot, policy, stations):
    """Step times from t_eps to t_final, landing exactly on every station.

    Returns (times, is_station) with stations marked; t_eps itself counts as
    a station (the launch sample).
    """
    anchors = np.unique(
        np.concatenate([[t_eps, t_final], np.asarray(stations, dtype=float)])
    )
    anchors = anchors[(anchors >= t_eps) & (anchors <= t_final)]
    station_set = set(float(s) for s in np.asarray(stations, dtype=float))
    station_set.add(float(t_eps))
    dt0 = t_talbot / policy.steps_per_talbot
    t_launch = policy.launch_until_talbots * t_talbot
    t_stretch = policy.stretch_after_talbots * t_talbot
    dt_max = policy.max_step_fraction * t_talbot
    times = [t_eps]
    marks = [True]
    dt = dt0
    t = t_eps
    for a in anchors[1:]:
        while True:
            if t < t_launch:
                dt = t / policy.launch_factor
            elif t / policy.log_factor < dt0:
                dt = t / policy.log_factor
            elif t < t_stretch:
                dt = dt0
            else:
                dt = min(dt * policy.stretch_factor, dt_max)
            if t + dt >= a - 1e-12 * a:
                times.append(a)
                marks.append(float(a) in station_set)
                t = a
                break
            t = t + dt
            times.append(t)
            marks.append(False)
    return np.asarray(times), np.asarray(marks)


def _rk4_batch(vf, x, t, dt):
    """One RK4 step for a batch; returns new positions and node flags."""
    v1, f1 = vf.velocity_and_flags(x, t)
    v2, f2 = vf.velocity_and_flags(x + 0.5 * dt * v1, t + 0.5 * dt)
    v3, f3 = vf.velocity_and_flags(x + 0.5 * dt * v2, t + 0.5 * dt)
    v4, f4 = vf.velocity_and_flags(x + dt * v3, t + dt)
    x_new = x + (dt / 6.0) * (v1 + 2 * v2 + 2 * v3 + v4)
    return x_new, f1 | f2 | f3 | f4


# Pairs closer than this are numerically fused; their sub-femtometer order
# carries no physics and re-resolving them would thrash on float noise.
_GAP_FLOOR = 1e-15


def _suspect_pairs(vf, x, x_new):
    """Trajectories whose neighbor gap contracted unphysically in one step.

    The true flow contracts a comoving interval only as fast as the local
    density grows — a few percent per step at these step sizes — so a >20%
    single-step contraction is discretization noise about to break the
    ordering.  Large gaps cannot close in one step at all (the velocity is
    capped), so only sub-slit-width gaps are examined.
    """
    guard = vf.field.grating.delta
    g_old = np.diff(x)
    g_new = np.diff(x_new)
    bad = (g_old < guard) & (g_old > _GAP_FLOOR) & (g_new < 0.8 * g_old)
    flags = np.zeros(x.shape, dtype=bool)
    if np.any(bad):
        flags[:-1] |= bad
        flags[1:] |= bad
    return flags


def _advance(vf, x, t, dt, policy, depth=0):
    """Advance a batch by dt, recursively halving where the step is suspect.

    A step is redone at half size for trajectories that either came close to
    a node of |psi|^2 or contracted against a neighbor faster than the flow
    allows.  Returns (x_new, stalled); stalled marks trajectories that still
    saw the node signal at the maximum halving depth (kept, flagged).
    """
    x_new, flagged = _rk4_batch(vf, x, t, dt)
    flagged = flagged | _suspect_pairs(vf, x, x_new)
    stalled = np.zeros(x.shape, dtype=bool)
    if not np.any(flagged):
        return x_new, stalled
    if depth >= policy.max_halvings:
        return x_new, flagged
    idx = np.nonzero(flagged)[0]
    x_half, st1 = _advance(vf, x[idx], t, 0.5 * dt, policy, depth + 1)
    x_full, st2 = _advance(vf, x_half, t + 0.5 * dt, 0.5 * dt, policy, depth + 1)
    x_new[idx] = x_full
    stalled[idx] = st1 | st2
    return x_new, stalled


def _integrate_batch(vf, x0, t_final, policy, stations):
    grating = vf.field.grating
    beam = vf.field.beam
    t_talbot = talbot_length(grating, beam) / beam.speed
    t_eps = policy.start_fraction * t_talbot
    stations = np.asarray(stations, dtype=float)
    if np.any(stations < t_eps - 1e-15 * t_eps):
        raise DomainError(f"stations must lie at or after t_eps = {t_eps:.3e} s")
    times, want = _schedule(t_eps, t_final, t_talbot, policy, stations)
    n_st = int(want.sum())
    x = np.array(x0, dtype=float)
    xs = np.empty((len(x0), n_st))
    vs = np.empty((len(x0), n_st))
    st_times = np.empty(n_st)
    stalled = np.zeros(len(x0), dtype=bool)
    j = 0
    if want[0]:
        xs[:, 0] = x
        vs[:, 0] = vf.velocity(x, times[0])
        st_times[0] = times[0]
        j = 1
    for i in range(len(times) - 1):
        t, t_next = times[i], times[i + 1]
        x, st = _advance(vf, x, t, t_next - t, policy)
        stalled |= st
        if want[i + 1]:
            xs[:, j] = x
            vs[:, j] = vf.velocity(x, t_next)
            st_times[j] = t_next
            j += 1
    return st_times, xs, vs, stalled


def integrate_trajectory(vf, x0, t_final, dt_policy=None, stations=None):
    """Integrate a single trajectory; returns its record dict."""
    policy = dt_policy or StepPolicy()
    if stations is None:
        stations = [t_final]
    times, xs, vs, stalled = _integrate_batch(vf, np.array([x0]), t_final, policy, stations)
    return {
        "x0": float(x0),
        "stalled": bool(stalled[0]),
        "samples": [(float(t), float(x), float(v)) for t, x, v in zip(times, xs[0], vs[0])],
    }


def launch_ensemble(
    vf,
    grating,
    n_traj,
    sampling="born",
    seed=0,
    t_final=None,
    stations=None,
    dt_policy=None,
):
    """Integrate an ensemble launched across the openings.

    Initial positions follow |psi(x, 0)|^2 (``born``) or a regular fan
    (``equispaced``); they are sorted ascending so the no-crossing property
    can be read off the stored samples directly.  Results are deterministic
    for a fixed seed.
    """
    if n_traj < 2:
        raise ValueError("need at least two trajectories")
    if t_final is None:
        raise ValueError("t_final is required")
    policy = dt_policy or StepPolicy()
    if stations is None:
        stations = [t_final]
    rng = np.random.default_rng(seed) if sampling == "born" else None
    x0 = sample_initial_positions(grating, n_traj, rng=rng, sampling=sampling)
    _kernels.warm_up()
    times, xs, vs, stalled = _integrate_batch(vf, x0, t_final, policy, stations)
    return TrajectoryEnsemble(
        x0=x0,
        times=times,
        xs=xs,
        vs=vs,
        stalled=stalled,
        seed=seed if sampling == "born" else None,
        v_y=vf.field.beam.speed,
    )


def order_violations(ensemble):
    """Count of adjacent-pair order violations over all stored stations."""
    diffs = np.diff(ensemble.xs, axis=0)
    return int(np.count_nonzero(diffs <= 0))
