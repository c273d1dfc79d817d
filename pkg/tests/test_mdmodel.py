import numpy as np
import pytest

from nslit import (
    HBAR,
    DomainError,
    GratingSpec,
    MDTrajectory,
    arrival_probability,
    build_initial_wavefunction,
    distribution_distance,
    near_field_discrepancy,
    sample_md_ensemble,
    spectrum_analytic,
    talbot_length,
)
from nslit.beamgrating import square_tail_mass


@pytest.fixture(scope="module")
def fig1_parts(fig1):
    return fig1.grating, fig1.beam, spectrum_analytic(fig1.grating, fig1.beam)


class TestArrivalProbability:
    def test_early_time_limit_is_initial_density(self, fig1_parts):
        g, beam, spec = fig1_parts
        t_lt = talbot_length(g, beam) / beam.speed
        x = np.linspace(-3e-7, 3e-7, 1201)
        arr = arrival_probability(spec, g, beam, 1e-9 * t_lt, x)
        d0 = np.abs(build_initial_wavefunction(g, x)) ** 2
        interior = d0 > 0.5 * d0.max()
        assert np.abs(arr.total[interior] - d0[interior]).max() < 2e-6 * d0.max()
        outside = d0 == 0.0
        assert arr.total[outside].max() < 1e-6 * d0.max()

    def test_per_slit_additivity_is_exact(self, fig1_parts):
        g, beam, spec = fig1_parts
        t = talbot_length(g, beam) / beam.speed
        x = np.linspace(-2e-6, 2e-6, 2001)
        arr = arrival_probability(spec, g, beam, t, x)
        assert np.abs(arr.total - arr.per_slit.sum(axis=0)).max() <= 1e-12 * arr.total.max()
        assert (arr.per_slit >= 0).all()

    def test_unit_mass_with_tail_accounting(self, fig1_parts):
        g, beam, spec = fig1_parts
        lt = talbot_length(g, beam)
        t = 1.25 * lt / beam.speed
        half = 5e-4
        x = np.linspace(-half, half, 400001)
        arr = arrival_probability(spec, g, beam, t, x)
        mass = np.trapezoid(arr.total, x)
        tail = square_tail_mass(g, beam.mass * (half - g.span / 2) / (HBAR * t))
        assert mass + tail == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_window_transport(self, fig1):
        g = GratingSpec(n=3, d=0.1e-6, delta=0.05e-6, window="gaussian")
        beam = fig1.beam
        spec = spectrum_analytic(g, beam)
        t = 0.5 * talbot_length(g, beam) / beam.speed
        x = np.linspace(-4e-6, 4e-6, 40001)
        arr = arrival_probability(spec, g, beam, t, x)
        assert np.abs(arr.total - arr.per_slit.sum(axis=0)).max() <= 1e-12 * arr.total.max()
        # per-slit transport carries n/S of the mass: the gaussian overlap
        # cross terms are excluded by construction
        expected = g.n / g.gaussian_overlap_sum()
        assert np.trapezoid(arr.total, x) == pytest.approx(expected, abs=1e-6)

    def test_rejects_nonpositive_time(self, fig1_parts):
        g, beam, spec = fig1_parts
        with pytest.raises(DomainError):
            arrival_probability(spec, g, beam, 0.0, np.linspace(-1e-6, 1e-6, 11))


class TestMDEnsemble:
    def test_straight_lines(self, fig1_parts):
        g, beam, spec = fig1_parts
        md = sample_md_ensemble(spec, g, beam, 32, seed=7)
        for traj in md[:5]:
            t1, t2 = 1e-6, 3e-6
            assert traj.position(t2) - traj.position(t1) == pytest.approx(
                traj.v_x * (t2 - t1), rel=1e-12
            )
            assert traj.v_x == pytest.approx(HBAR * traj.k_x / beam.mass, rel=1e-12)

    def test_crossing_pair_from_different_slits(self, fig1_parts):
        # straight lines aimed at one screen point arrive together: pick the
        # wavenumbers by inverting the kinematics from two distinct slits
        g, beam, spec = fig1_parts
        t = 1e-5
        x_star = 3.3e-7
        x0_a, x0_b = g.centers[0], g.centers[3]
        k_a = beam.mass * (x_star - x0_a) / (HBAR * t)
        k_b = beam.mass * (x_star - x0_b) / (HBAR * t)
        traj_a = MDTrajectory(x0=x0_a, k_x=k_a, v_x=HBAR * k_a / beam.mass)
        traj_b = MDTrajectory(x0=x0_b, k_x=k_b, v_x=HBAR * k_b / beam.mass)
        assert x0_a != x0_b
        assert traj_a.position(t) == pytest.approx(traj_b.position(t), rel=1e-12)
        assert traj_a.position(t) == pytest.approx(x_star, rel=1e-12)

    def test_histogram_converges_to_quadrature(self, fig1_parts):
        g, beam, spec = fig1_parts
        lt = talbot_length(g, beam)
        t = 1.25 * lt / beam.speed
        md = sample_md_ensemble(spec, g, beam, 10_000, seed=5)
        xs = np.array([m.position(t) for m in md])
        lo, hi = np.quantile(xs, [0.005, 0.995])
        half = 1.02 * max(abs(lo), abs(hi))
        edges = np.linspace(-half, half, 65)
        h, _ = np.histogram(xs, bins=edges, density=True)
        fine = np.linspace(-half, half, 64 * 64 + 1)
        arr = arrival_probability(spec, g, beam, t, fine)
        cum = np.concatenate(
            [[0.0], np.cumsum((arr.total[1:] + arr.total[:-1]) / 2 * np.diff(fine))]
        )
        q = np.diff(np.interp(edges, fine, cum)) / np.diff(edges)
        l1 = distribution_distance(h, q, edges[1] - edges[0])
        assert l1 < 0.08

    def test_mean_wavenumber_consistent_with_even_density(self, fig1_parts):
        g, beam, spec = fig1_parts
        md = sample_md_ensemble(spec, g, beam, 10_000, seed=11)
        ks = np.array([m.k_x for m in md])
        assert abs(ks.mean()) < 4 * ks.std() / np.sqrt(len(ks))

    def test_seeded_determinism(self, fig1_parts):
        g, beam, spec = fig1_parts
        a = sample_md_ensemble(spec, g, beam, 100, seed=3)
        b = sample_md_ensemble(spec, g, beam, 100, seed=3)
        assert all(p.x0 == q.x0 and p.k_x == q.k_x for p, q in zip(a, b))


class TestNearFieldDiscrepancy:
    def test_far_field_agreement(self, fig1_parts, fig1_field, fig1):
        g, beam, spec = fig1_parts
        val = near_field_discrepancy(spec, g, fig1_field, 12.5 * fig1.talbot())
        assert val < 0.05

    def test_near_field_exceeds_far_field(self, fig1_parts, fig1_field, fig1):
        g, beam, spec = fig1_parts
        near = near_field_discrepancy(spec, g, fig1_field, fig1.talbot() / 4)
        far = near_field_discrepancy(spec, g, fig1_field, 12.5 * fig1.talbot())
        assert near > far

    def test_carpet_region_disagreement_peaks(self, fig1_parts, fig1_field, fig1):
        # the d/2-shifted sub-images around 0.6 L_T cannot be reproduced by
        # straight-line transport; the discrepancy has a hump there
        g, beam, spec = fig1_parts
        hump = near_field_discrepancy(spec, g, fig1_field, 0.665 * fig1.talbot())
        quarter = near_field_discrepancy(spec, g, fig1_field, 0.25 * fig1.talbot())
        assert hump > quarter

    def test_needs_positive_distance(self, fig1_parts, fig1_field):
        g, beam, spec = fig1_parts
        with pytest.raises(DomainError):
            near_field_discrepancy(spec, g, fig1_field, 0.0)

    def test_window_shape_changes_only_densities(self, fig1):
        # square and gaussian windows share the straight-line trajectory
        # model; the arrival pattern differs only through |c|^2 and |psi0|^2
        beam = fig1.beam
        gs = GratingSpec(n=3, d=0.1e-6, delta=0.05e-6)
        gg = GratingSpec(n=3, d=0.1e-6, delta=0.05e-6, window="gaussian")
        t = 0.5 * talbot_length(gs, beam) / beam.speed
        x = np.linspace(-2e-6, 2e-6, 8001)
        arr_s = arrival_probability(spectrum_analytic(gs, beam), gs, beam, t, x)
        arr_g = arrival_probability(spectrum_analytic(gg, beam), gg, beam, t, x)
        dx = x[1] - x[0]
        assert distribution_distance(arr_s.total, arr_g.total, dx) > 1e-3
        md_s = sample_md_ensemble(spectrum_analytic(gs, beam), gs, beam, 16, seed=1)
        md_g = sample_md_ensemble(spectrum_analytic(gg, beam), gg, beam, 16, seed=1)
        for traj in md_s + md_g:
            assert traj.position(2e-5) == pytest.approx(
                traj.x0 + traj.v_x * 2e-5, rel=1e-15
            )
