"""Scenario execution: artifact files, figures, and the run manifest.

A run resolves every parameter first (manifest-ready), then produces the
requested artifact kinds.  On any numerical failure the partially written
files are removed and the error re-raised, so an output directory either
holds a complete, checksummed run or nothing.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .beamgrating import HBAR
from .bohm import StepPolicy, VelocityField, launch_ensemble
from .config import scenario_to_config
from .errors import NslitError
from .figures import (
    save_carpet_figure,
    save_intensity_figure,
    save_momentum_figure,
    save_trajectory_figure,
)
from .mdmodel import arrival_probability
from .momstats import bohm_momentum_histogram, momentum_bins
from .report import format_float, sha256_of, write_csv, write_manifest
from .wavefield import default_profile_grid, intensity_profile

__all__ = ["RunResult", "run_scenario"]


@dataclass
class RunResult:
    outdir: Path
    files: list
    manifest: Path
    summary: dict


def _traj_csv(path, ensemble):
    n_st = len(ensemble.times)
    ids = np.repeat(np.arange(ensemble.n_traj), n_st)
    t = np.tile(ensemble.times, ensemble.n_traj)
    x = ensemble.xs.reshape(-1)
    y = np.tile(ensemble.y_stations, ensemble.n_traj)
    v = ensemble.vs.reshape(-1)
    return write_csv(
        path, ["traj_id", "t_s", "x_m", "y_m", "vx_m_per_s"], [ids, t, x, y, v]
    )


def run_scenario(scenario, outdir, make_figures=True, policy=None, epsilon_node=1e-7):
    """Execute a scenario; returns the artifact inventory.

    Deterministic for a fixed seed: identical reruns produce byte-identical
    CSV files and manifest.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    created = []
    try:
        return _run(scenario, outdir, created, make_figures, policy, epsilon_node)
    except (NslitError, ValueError, FloatingPointError, ArithmeticError):
        for f in created:
            try:
                Path(f).unlink()
            except OSError:
                pass
        raise


def _run(scenario, outdir, created, make_figures, policy, epsilon_node):
    sc = scenario
    policy = policy or StepPolicy()
    field = sc.make_field()
    beam, grating, spec = field.beam, field.grating, field.spectrum
    lt = sc.talbot()
    y_list = sc.y_targets()
    t_talbot = lt / beam.speed
    t_eps = policy.start_fraction * t_talbot
    summary = {}

    manifest = {}
    for line in scenario_to_config(sc).strip().splitlines():
        key, _, value = line.partition(" = ")
        manifest[f"scenario.{key}"] = value
    manifest["derived.wavenumber_per_m"] = format_float(beam.wavenumber)
    manifest["derived.wavelength_m"] = format_float(beam.wavelength)
    manifest["derived.speed_m_per_s"] = format_float(beam.speed)
    manifest["derived.omega_per_s"] = format_float(beam.omega)
    manifest["derived.talbot_length_m"] = format_float(lt)
    manifest["derived.t_talbot_s"] = format_float(t_talbot)
    manifest["resolved.y_m"] = ", ".join(format_float(y) for y in y_list)
    manifest["spectrum.k_max_per_m"] = format_float(spec.k_max)
    manifest["spectrum.dk_per_m"] = format_float(spec.dk)
    manifest["spectrum.grid_points"] = str(len(spec.k_grid))
    manifest["spectrum.tail_mass"] = format_float(spec.tail_mass())
    manifest["policy.steps_per_talbot"] = str(policy.steps_per_talbot)
    manifest["policy.stretch_after_talbots"] = format_float(policy.stretch_after_talbots)
    manifest["policy.stretch_factor"] = format_float(policy.stretch_factor)
    manifest["policy.max_step_fraction"] = format_float(policy.max_step_fraction)
    manifest["policy.start_fraction"] = format_float(policy.start_fraction)
    manifest["policy.max_halvings"] = str(policy.max_halvings)
    manifest["velocity.epsilon_node"] = format_float(epsilon_node)
    manifest["version.nslit"] = __version__
    manifest["version.python"] = sys.version.split()[0]
    manifest["version.numpy"] = np.__version__
    manifest["version.scipy"] = scipy.__version__

    def register(path):
        created.append(path)
        return path

    ensemble = None
    if "trajectories" in sc.outputs or "momentum" in sc.outputs:
        t_final = max(field.y_to_t(max(y_list)), t_eps * 2)
        stations = sorted(
            set(np.linspace(t_eps, t_final, 33)).union(
                max(field.y_to_t(y), t_eps) for y in y_list
            )
        )
        vf = VelocityField(field, epsilon_node=epsilon_node)
        ensemble = launch_ensemble(
            vf,
            grating,
            sc.n_traj,
            sampling="born",
            seed=sc.seed,
            t_final=t_final,
            stations=stations,
            dt_policy=policy,
        )
        manifest["resolved.stations_t_s"] = ", ".join(
            format_float(t) for t in ensemble.times
        )
        manifest["ensemble.n_traj"] = str(ensemble.n_traj)
        manifest["ensemble.stalled"] = str(int(ensemble.stalled.sum()))
        manifest["velocity.k_cap_per_m"] = format_float(vf.k_cap)

    if "spectrum" in sc.outputs:
        path = register(outdir / "spectrum.csv")
        write_csv(
            path,
            ["k_per_m", "re_c", "im_c", "abs2_c"],
            [
                spec.k_grid,
                spec.c_values.real,
                spec.c_values.imag,
                np.abs(spec.c_values) ** 2,
            ],
        )

    if "intensity" in sc.outputs:
        for i, y in enumerate(y_list):
            prof = intensity_profile(field, y, x_grid=default_profile_grid(field, y, sc.n_grid))
            path = register(outdir / f"intensity_{i:03d}.csv")
            write_csv(path, ["x_m", "density_per_m"], [prof.x_grid, prof.density])
            manifest[f"output.{path.name}.y_m"] = format_float(y)
            if make_figures:
                fig = register(outdir / f"intensity_{i:03d}.png")
                save_intensity_figure(fig, prof, title=f"{sc.name}: y = {y:.3e} m")

    if "carpet" in sc.outputs:
        y_max = max(y_list)
        ys = np.linspace(0.0, y_max, sc.carpet_ny)
        grid = default_profile_grid(field, y_max, sc.n_grid)
        profiles = [intensity_profile(field, y, x_grid=grid) for y in ys]
        for i, prof in enumerate(profiles):
            path = register(outdir / f"carpet_{i:03d}.csv")
            write_csv(path, ["x_m", "density_per_m"], [prof.x_grid, prof.density])
            manifest[f"output.{path.name}.y_m"] = format_float(prof.y)
        if make_figures:
            fig = register(outdir / "carpet.png")
            save_carpet_figure(fig, profiles, title=f"{sc.name}: carpet")

    if "trajectories" in sc.outputs:
        path = register(outdir / "trajectories.csv")
        _traj_csv(path, ensemble)
        if make_figures:
            fig = register(outdir / "trajectories.png")
            save_trajectory_figure(fig, ensemble, title=f"{sc.name}: trajectories")

    if "momentum" in sc.outputs:
        vf = VelocityField(field, epsilon_node=epsilon_node)
        edges = momentum_bins(grating, sc.bins)
        centers = 0.5 * (edges[1:] + edges[:-1])
        # bin-averaged via the momentum cumulative, not point samples: the
        # order peaks of |c|^2 are narrower than typical bins
        qdens = (spec.cumulative(edges[1:] / HBAR) - spec.cumulative(edges[:-1] / HBAR)) / np.diff(
            edges
        )
        for i, y in enumerate(y_list):
            hist = bohm_momentum_histogram(ensemble, vf, max(y, field.t_to_y(t_eps)), bins=edges)
            path = register(outdir / f"momentum_{i:03d}.csv")
            write_csv(
                path,
                ["bin_center_kgm_s", "bohm_density", "quantum_density"],
                [centers, hist.density, qdens],
            )
            manifest[f"output.{path.name}.y_m"] = format_float(y)
            manifest[f"output.{path.name}.excluded"] = str(hist.excluded_count)
            if make_figures:
                fig = register(outdir / f"momentum_{i:03d}.png")
                save_momentum_figure(fig, hist, centers, qdens, title=f"{sc.name}: y = {y:.3e} m")

    if "md" in sc.outputs:
        for i, y in enumerate(y_list):
            t = max(field.y_to_t(y), t_eps)
            grid = default_profile_grid(field, y, sc.n_grid)
            arr = arrival_probability(spec, grating, beam, t, grid)
            prof = intensity_profile(field, y, x_grid=grid, method="closed")
            path = register(outdir / f"md_{i:03d}.csv")
            head = ["x_m", "p_total_per_m"] + [f"p_slit_{j + 1}" for j in range(grating.n)]
            write_csv(path, head, [grid, arr.total] + [arr.per_slit[j] for j in range(grating.n)])
            cpath = register(outdir / f"mdcompare_{i:03d}.csv")
            write_csv(
                cpath,
                ["x_m", "p_md_per_m", "density_qm_per_m"],
                [grid, arr.total, prof.density],
            )
            dx = grid[1] - grid[0]
            p = arr.total / (arr.total.sum() * dx)
            q = prof.density / (prof.density.sum() * dx)
            l1 = float(np.abs(p - q).sum() * dx)
            summary[f"md_l1_{i:03d}"] = l1
            manifest[f"output.{path.name}.y_m"] = format_float(y)
            manifest[f"md.l1_distance.{i:03d}"] = format_float(l1)
            if make_figures:
                fig = register(outdir / f"md_{i:03d}.png")
                save_intensity_figure(
                    fig, prof, md_density=arr.total, title=f"{sc.name}: y = {y:.3e} m"
                )

    for f in sorted(created):
        manifest[f"output.{Path(f).name}.sha256"] = sha256_of(f)
    manifest_path = outdir / "manifest.txt"
    write_manifest(manifest_path, manifest)
    return RunResult(
        outdir=outdir, files=sorted(Path(f) for f in created), manifest=manifest_path, summary=summary
    )
