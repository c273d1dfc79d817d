import hashlib
from pathlib import Path

import numpy as np
import pytest

from nslit import ConfigError, parse_config, presets, scenario_to_config
from nslit.cli import main
from nslit.config import parse_config_file
from nslit.runner import run_scenario


def sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


TINY = dict(
    n_traj=24,
    y_spec=((0.05, "LT"),),
    seed=42,
    k_points=2**12,
    n_grid=512,
    bins=21,
)


class TestPresets:
    def test_all_five_named(self):
        assert set(presets()) == {"fig1", "fig2", "fig3", "fig5", "fig6"}

    def test_fig1_caption_parameters(self):
        sc = presets()["fig1"]
        assert sc.grating.n == 5
        assert sc.grating.d == pytest.approx(0.1e-6)
        assert sc.grating.delta == pytest.approx(0.05e-6)
        assert sc.beam.mass == pytest.approx(1.19e-24)
        assert sc.beam.speed == pytest.approx(220.0)
        # caption wavelength is the 3-digit rounding of the derived value
        assert sc.beam.wavelength == pytest.approx(2.53e-12, rel=5e-4)
        assert sc.talbot() == pytest.approx(3.953e-3, rel=1e-3)

    def test_fig2_differs_from_fig1_only_in_distance(self):
        f1, f2 = presets()["fig1"], presets()["fig2"]
        assert f1.grating == f2.grating and f1.beam == f2.beam
        assert f2.y_spec == ((12.5, "LT"),)

    def test_fig3_caption_parameters(self):
        sc = presets()["fig3"]
        assert sc.grating.n == 30
        assert sc.grating.delta == pytest.approx(sc.grating.d / 2)  # Ronchi layout
        assert sc.beam.wavenumber == pytest.approx((np.pi / 8) * 1e12, rel=1e-12)
        assert sc.beam.speed == pytest.approx(1084.0, rel=1e-3)
        assert sc.talbot() == pytest.approx(2.5e-3, rel=1e-12)

    def test_fig5_station_list(self):
        sc = presets()["fig5"]
        assert sc.y_spec == ((1 / 40, "LT"), (0.25, "LT"), (1.25, "LT"), (12.5, "LT"))
        assert sc.n_traj == 10_000

    def test_fig6_station_list(self):
        sc = presets()["fig6"]
        assert sc.grating.n == 30
        assert sc.y_spec == ((0.25, "LT"), (0.5, "LT"), (0.75, "LT"), (1.0, "LT"))

    def test_talbot_never_hardcoded(self):
        # changing the period rescales the resolved distances quadratically
        sc = presets()["fig1"]
        wider = sc.with_overrides(
            grating=type(sc.grating)(n=5, d=0.2e-6, delta=0.05e-6)
        )
        assert wider.y_targets()[0] == pytest.approx(4 * sc.y_targets()[0])


class TestConfig:
    def test_round_trip_is_idempotent(self):
        text = scenario_to_config(presets()["fig1"])
        once = scenario_to_config(parse_config(text))
        twice = scenario_to_config(parse_config(once))
        assert once == text and twice == once

    def test_preset_base_with_overrides(self):
        sc = parse_config("preset = fig1\nn_traj = 7\ny = 0.3 LT, 2 mm\n")
        assert sc.n_traj == 7
        assert sc.y_spec == ((0.3, "LT"), (0.002, "m"))
        assert sc.grating == presets()["fig1"].grating

    def test_unknown_key_has_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("preset = fig1\ny = 1 LT\nwhatever = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("preset = fig1\nseed = 1\nseed = 2\n")

    def test_missing_unit_rejected(self):
        with pytest.raises(ConfigError, match="unit"):
            parse_config("preset = fig1\ny = 1.25\n")

    def test_beam_requires_exactly_one_primary(self):
        base = "n = 5\nd = 0.1 um\ndelta = 0.05 um\nmass = 1.19e-24 kg\ny = 1 LT\n"
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(base + "speed = 220 m/s\nwavelength = 2.53 pm\n")
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(base)

    def test_bad_grating_geometry_reported(self):
        with pytest.raises(ConfigError, match="delta"):
            parse_config(
                "n = 5\nd = 0.1 um\ndelta = 0.2 um\nmass = 1e-24 kg\n"
                "speed = 10 m/s\ny = 1 LT\n"
            )

    def test_unknown_output_rejected(self):
        with pytest.raises(ConfigError, match="output"):
            parse_config("preset = fig1\noutputs = plots\n")

    def test_file_loader(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(scenario_to_config(presets()["fig3"]), encoding="utf-8")
        assert parse_config_file(cfg).grating.n == 30


class TestRunner:
    @pytest.fixture(scope="class")
    def tiny_run(self, tmp_path_factory):
        sc = presets()["fig1"].with_overrides(
            outputs=("spectrum", "intensity", "trajectories", "momentum", "md"), **TINY
        )
        out = tmp_path_factory.mktemp("run")
        return sc, run_scenario(sc, out)

    def test_expected_artifacts(self, tiny_run):
        _, res = tiny_run
        names = {f.name for f in res.files}
        assert {
            "spectrum.csv",
            "intensity_000.csv",
            "trajectories.csv",
            "momentum_000.csv",
            "md_000.csv",
            "mdcompare_000.csv",
        } <= names
        assert any(n.endswith(".png") for n in names)
        assert res.manifest.exists()

    def test_csv_format_contract(self, tiny_run):
        _, res = tiny_run
        path = res.outdir / "intensity_000.csv"
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x_m,density_per_m"
        x, d = lines[1].split(",")
        # 17 significant digits round-trip exactly
        assert float(x) == float(f"{float(x):.17g}")
        assert len(lines) == TINY["n_grid"] + 1

    def test_trajectory_csv_columns(self, tiny_run):
        _, res = tiny_run
        head = (res.outdir / "trajectories.csv").read_text().splitlines()[0]
        assert head == "traj_id,t_s,x_m,y_m,vx_m_per_s"

    def test_md_csv_columns(self, tiny_run):
        sc, res = tiny_run
        head = (res.outdir / "md_000.csv").read_text().splitlines()[0]
        cols = head.split(",")
        assert cols[:2] == ["x_m", "p_total_per_m"]
        assert cols[2:] == [f"p_slit_{j + 1}" for j in range(sc.grating.n)]

    def test_manifest_records_everything(self, tiny_run):
        sc, res = tiny_run
        text = res.manifest.read_text(encoding="utf-8")
        entries = dict(
            line.split(" = ", 1) for line in text.splitlines() if " = " in line
        )
        assert entries["scenario.seed"] == str(sc.seed)
        assert entries["scenario.n_traj"] == str(sc.n_traj)
        assert "derived.talbot_length_m" in entries
        assert "policy.steps_per_talbot" in entries
        assert "version.numpy" in entries
        for f in res.files:
            if f.suffix == ".csv":
                assert entries[f"output.{f.name}.sha256"] == sha(f)

    def test_reruns_are_byte_identical(self, tiny_run, tmp_path):
        sc, res = tiny_run
        res2 = run_scenario(sc, tmp_path / "again")
        for a, b in zip(res.files, res2.files):
            assert a.name == b.name
            if a.suffix == ".csv":
                assert sha(a) == sha(b)
        assert sha(res.manifest) == sha(res2.manifest)

    def test_numerical_failure_removes_partial_outputs(self, tmp_path):
        # an absurd detector distance overflows the spectral profile grid;
        # the run must fail loudly and leave no partial artifacts behind
        sc = presets()["fig1"].with_overrides(
            outputs=("intensity",), y_spec=((1e5, "LT"),), n_traj=8, k_points=2**12
        )
        out = tmp_path / "broken"
        with pytest.raises(Exception):
            run_scenario(sc, out)
        assert list(out.glob("*.csv")) == []


class TestCli:
    def test_preset_subcommand(self, tmp_path, capsys):
        code = main(
            [
                "intensity",
                "--preset",
                "fig1",
                "--y",
                "0.05 LT",
                "--out",
                str(tmp_path),
                "--no-figures",
                "--seed",
                "7",
            ]
        )
        assert code == 0
        assert (tmp_path / "intensity_000.csv").exists()
        assert not list(tmp_path.glob("*.png"))

    def test_missing_scenario_is_config_error(self, capsys):
        assert main(["spectrum"]) == 2

    def test_unknown_preset_is_config_error(self, capsys):
        assert main(["spectrum", "--preset", "fig9"]) == 2

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        code = main(
            [
                "intensity",
                "--preset",
                "fig1",
                "--y",
                "100000 LT",
                "--out",
                str(tmp_path),
                "--no-figures",
            ]
        )
        assert code == 3

    def test_md_compare_subcommand(self, tmp_path, capsys):
        code = main(
            [
                "md-compare",
                "--preset",
                "fig1",
                "--y",
                "0.05 LT",
                "--n-traj",
                "8",
                "--out",
                str(tmp_path),
                "--no-figures",
            ]
        )
        assert code == 0
        assert (tmp_path / "md_000.csv").exists()
        assert (tmp_path / "mdcompare_000.csv").exists()
