import numpy as np
import pytest

from nslit import (
    HBAR,
    DomainError,
    GratingSpec,
    ParticleBeam,
    StepPolicy,
    TrajectoryEnsemble,
    VelocityField,
    WaveField,
    integrate_trajectory,
    launch_ensemble,
    order_violations,
    talbot_length,
    velocity_x,
)


@pytest.fixture(scope="module")
def gaussian_packet():
    beam = ParticleBeam.from_mass_speed(1.19e-24, 220.0)
    g = GratingSpec(n=1, d=1e-7, delta=5e-8, window="gaussian", a=2.5e-8)
    field = WaveField(beam=beam, grating=g)
    return VelocityField(field)


class TestVelocityField:
    def test_zero_on_symmetry_axis(self, fig1_vf, fig1):
        scale = HBAR / (fig1.beam.mass * fig1.grating.delta)
        for f in (0.01, 0.3, 2.0):
            t = f * fig1.talbot() / fig1.beam.speed
            assert abs(velocity_x(fig1_vf, 0.0, t)) < 1e-10 * scale

    def test_vanishes_at_zero_time(self, fig1_vf):
        assert velocity_x(fig1_vf, 1e-8, 0.0) == 0.0

    def test_vanishes_toward_launch_at_slit_center(self, fig1_vf, fig1):
        # the initial state is real, so the phase gradient dies as t -> 0;
        # at a slit center it is already at the noise floor at t_eps
        x_c = fig1.grating.centers[1]
        t_lt = fig1.talbot() / fig1.beam.speed
        scale = HBAR / (fig1.beam.mass * fig1.grating.delta)
        for f in (1e-3, 1e-4, 1e-5):
            assert abs(velocity_x(fig1_vf, x_c, f * t_lt)) < 1e-6 * scale

    def test_gaussian_analytic_velocity(self, gaussian_packet):
        vf = gaussian_packet
        beam = vf.field.beam
        a = vf.field.grating.a
        t = 0.7e-5
        tau = 2 * HBAR * t / (beam.mass * a**2)
        xs = np.linspace(-5e-8, 5e-8, 11)
        v_expected = xs * tau / (1 + tau**2) * (2 * HBAR / (beam.mass * a**2))
        v = vf.velocity(xs, t)
        assert np.abs(v - v_expected).max() < 1e-12 * np.abs(v_expected).max()

    def test_far_field_ratio_approaches_x_over_t(self, fig1_vf, fig1):
        # deep Fraunhofer regime: the guidance velocity is x/t on the
        # mass-carrying order cores
        field = fig1_vf.field
        t = 200 * fig1.talbot() / fig1.beam.speed
        order = fig1.beam.wavelength * field.t_to_y(t) / fig1.grating.d
        xs = np.concatenate([np.linspace(0.6, 2.4, 25), -np.linspace(0.6, 2.4, 25)]) * order
        dens = field.density_closed(xs, t)
        keep = dens > 0.02 * dens.max()
        v = fig1_vf.velocity(xs[keep], t)
        assert np.abs(v * t / xs[keep] - 1).max() < 1e-2

    def test_moderate_distance_ratio_still_biased(self, fig1_vf, fig1):
        # at 12.5 L_T the quadratic source phase is still order one and the
        # straight-ray law has tens-of-percent residuals
        field = fig1_vf.field
        t = 12.5 * fig1.talbot() / fig1.beam.speed
        order = fig1.beam.wavelength * field.t_to_y(t) / fig1.grating.d
        xs = np.concatenate([np.linspace(0.6, 2.4, 25), -np.linspace(0.6, 2.4, 25)]) * order
        dens = field.density_closed(xs, t)
        keep = dens > 0.02 * dens.max()
        dev = np.abs(fig1_vf.velocity(xs[keep], t) * t / xs[keep] - 1).max()
        assert 0.02 < dev < 0.5

    def test_speed_cap_is_enforced(self, fig1_vf, fig1):
        t = 0.5 * fig1.talbot() / fig1.beam.speed
        xs = np.linspace(-3e-7, 3e-7, 20001)
        v = fig1_vf.velocity(xs, t)
        assert np.abs(v).max() <= fig1_vf.v_cap * (1 + 1e-12)

    def test_negative_time_rejected(self, fig1_vf):
        with pytest.raises(DomainError):
            velocity_x(fig1_vf, 0.0, -1e-9)


class TestIntegration:
    def test_gaussian_packet_scaling_oracle(self, gaussian_packet):
        # Bohmian paths of a free gaussian packet ride the quantile lines:
        # x(t2)/x(t1) = s(t2)/s(t1) with s = sqrt(1 + tau^2)
        vf = gaussian_packet
        beam = vf.field.beam
        g = vf.field.grating
        t_lt = talbot_length(g, beam) / beam.speed
        t_final = 2.0 * t_lt
        ens = launch_ensemble(
            vf, g, 6, sampling="equispaced", t_final=t_final, stations=[t_final / 2, t_final]
        )
        # use the actual equispaced launch points of the ensemble
        tau = 2 * HBAR * ens.times / (beam.mass * g.a**2)
        s = np.sqrt(1 + tau**2)
        expected = ens.xs[:, :1] * (s / s[0])[None, :]
        rel = np.abs(ens.xs - expected) / np.abs(expected)
        assert rel.max() < 1e-6

    def test_symmetry_axis_is_invariant(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        rec = integrate_trajectory(fig1_vf, 0.0, 2 * t_lt)
        assert abs(rec["samples"][-1][1]) < 1e-12

    def test_no_crossing_small_ensemble(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        ens = launch_ensemble(
            fig1_vf,
            fig1.grating,
            300,
            seed=17,
            t_final=1.25 * t_lt,
            stations=[0.1 * t_lt, 0.5 * t_lt, 1.25 * t_lt],
        )
        assert order_violations(ens) == 0
        assert not ens.stalled.any()

    def test_bitwise_deterministic_for_fixed_seed(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        kw = dict(seed=23, t_final=0.1 * t_lt, stations=[0.1 * t_lt])
        a = launch_ensemble(fig1_vf, fig1.grating, 64, **kw)
        b = launch_ensemble(fig1_vf, fig1.grating, 64, **kw)
        assert np.array_equal(a.xs, b.xs) and np.array_equal(a.vs, b.vs)

    def test_stations_hit_exactly(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        stations = [0.037 * t_lt, 0.4 * t_lt]
        ens = launch_ensemble(
            fig1_vf, fig1.grating, 16, seed=1, t_final=0.4 * t_lt, stations=stations
        )
        # launch sample + the two stations
        assert len(ens.times) == 3
        assert ens.times[1] == stations[0] and ens.times[2] == stations[1]
        assert ens.station_index(stations[0]) == 1

    def test_stations_before_launch_time_rejected(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        with pytest.raises(DomainError, match="t_eps"):
            launch_ensemble(
                fig1_vf, fig1.grating, 8, seed=1, t_final=t_lt, stations=[t_lt / 1e6]
            )

    def test_node_floor_flags_and_keeps_trajectories(self, fig1_field, fig1):
        # an absurd density floor forces the node signal everywhere: the
        # halving budget runs out and trajectories come back flagged, kept
        vf = VelocityField(fig1_field, epsilon_node=1e6)
        t_lt = fig1.talbot() / fig1.beam.speed
        policy = StepPolicy(max_halvings=2)
        ens = launch_ensemble(
            vf,
            fig1.grating,
            8,
            seed=5,
            t_final=t_lt / 100,
            stations=[t_lt / 100],
            dt_policy=policy,
        )
        assert ens.stalled.all()
        assert len(ens.records) == 8

    def test_longitudinal_motion_is_classical(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        ens = launch_ensemble(
            fig1_vf, fig1.grating, 8, seed=2, t_final=0.05 * t_lt, stations=[0.05 * t_lt]
        )
        assert np.allclose(ens.y_stations, fig1.beam.speed * ens.times, rtol=1e-15)

    def test_records_view(self, fig1_vf, fig1):
        t_lt = fig1.talbot() / fig1.beam.speed
        ens = launch_ensemble(
            fig1_vf, fig1.grating, 4, seed=3, t_final=0.02 * t_lt, stations=[0.02 * t_lt]
        )
        rec = ens.records[0]
        assert rec["x0"] == ens.x0[0]
        assert len(rec["samples"]) == len(ens.times)
        t, x, v = rec["samples"][1]
        assert (t, x, v) == (ens.times[1], ens.xs[0, 1], ens.vs[0, 1])


class TestOrderViolations:
    def test_counts_synthetic_crossings(self):
        xs = np.array([[0.0, 0.0], [1.0, -1.0], [2.0, 2.0]])
        ens = TrajectoryEnsemble(
            x0=xs[:, 0],
            times=np.array([0.0, 1.0]),
            xs=xs,
            vs=np.zeros_like(xs),
            stalled=np.zeros(3, dtype=bool),
            seed=None,
            v_y=1.0,
        )
        assert order_violations(ens) == 1
