"""Command-line surface: parsing, validation, outputs, determinism."""

import json

import numpy as np
import pytest

from loschmidt.cli import UsageError, main, parse_config, run


def config_for(tmp_path, *argv):
    return parse_config([*argv, "--output-dir", str(tmp_path)])


class TestParseConfig:
    def test_valid_ff_config(self):
        cfg = parse_config(
            ["tfim-ff", "--g0", "0.5", "--gf", "2.0", "--L", "12", "--t-max", "10", "--points", "2001"]
        )
        assert cfg.subcommand == "tfim-ff"
        assert cfg.params["L"] == 12 and cfg.params["g0"] == 0.5
        assert cfg.grid.n_points == 2001 and cfg.grid.t_end == 10.0

    def test_dense_cap_suggests_krylov(self):
        with pytest.raises(UsageError, match="krylov"):
            parse_config(["tfim-ed", "--L", "20", "--g0", "0.5", "--gf", "2.0"])

    def test_dense_cap_lifted_by_krylov_flag(self):
        cfg = parse_config(["tfim-ed", "--L", "16", "--g0", "0.5", "--gf", "2.0", "--krylov"])
        assert cfg.params["krylov"]

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            parse_config(["tfim-ff", "--L", "8", "--g0", "1", "--gf", "2", "--bogus", "1"])
        assert exc.value.code == 2

    def test_out_of_range_parameters(self):
        with pytest.raises(UsageError, match="even"):
            parse_config(["tfim-ff", "--L", "7", "--g0", "0.5", "--gf", "2.0"])
        with pytest.raises(UsageError, match="nodes"):
            parse_config(["thermo", "--g0", "0.5", "--gf", "2.0", "--nodes", "16"])
        with pytest.raises(UsageError, match="weight"):
            parse_config(["rabi", "--g", "2.0", "--weight", "1.5"])
        with pytest.raises(UsageError, match="points"):
            parse_config(["rabi", "--g", "2.0", "--points", "1"])

    def test_threads_env_fallback(self, monkeypatch):
        monkeypatch.setenv("LOSCHMIDT_THREADS", "2")
        assert parse_config(["rabi", "--g", "1.0"]).threads == 2
        monkeypatch.setenv("LOSCHMIDT_THREADS", "banana")
        with pytest.raises(UsageError, match="LOSCHMIDT_THREADS"):
            parse_config(["rabi", "--g", "1.0"])

    def test_usage_error_exit_code(self, capsys):
        code = main(["tfim-ed", "--L", "20", "--g0", "0.5", "--gf", "2.0"])
        assert code == 2
        assert "dense cap" in capsys.readouterr().err


class TestRunOutputs:
    def test_manifest_lists_existing_files(self, tmp_path):
        cfg = config_for(tmp_path, "tfim-ff", "--L", "8", "--g0", "0.5", "--gf", "2.0", "--points", "101")
        manifest = run(cfg)
        rundir = next(tmp_path.iterdir())
        for name in manifest.files:
            assert (rundir / name).exists()
        on_disk = json.loads((rundir / "manifest.json").read_text())
        assert on_disk["subcommand"] == "tfim-ff"
        assert on_disk["version"]
        assert on_disk["checks"]["echo_in_unit_interval"]

    def test_scar_runs_are_byte_identical(self, tmp_path):
        argv = ("scars", "--tower", "4", "--background", "64", "--points", "201", "--seed", "7")
        run(config_for(tmp_path / "a", *argv))
        run(config_for(tmp_path / "b", *argv))
        dir_a = next((tmp_path / "a").iterdir())
        dir_b = next((tmp_path / "b").iterdir())
        for name in ("trace.csv", "overlaps.csv"):
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()

    def test_rabi_rate_spikes_at_odd_half_pi(self, tmp_path):
        cfg = config_for(tmp_path, "rabi", "--g", "2.0", "--t-max", "8.0", "--points", "1601")
        run(cfg)
        rundir = next(tmp_path.iterdir())
        rows = np.loadtxt(rundir / "trace.csv", delimiter=",", skiprows=1)
        t, rate = rows[:, 0], rows[:, 2]
        spikes = (2 * np.arange(3) + 1) * np.pi / 2.0
        near = np.min(np.abs(t[:, None] - spikes[None, :]), axis=1) < 0.05
        assert rate[near].max() > 5.0
        far = np.min(np.abs(t[:, None] - spikes[None, :]), axis=1) > 1.0
        assert rate[far].max() < 0.5
        cusps = json.loads((rundir / "cusps.json").read_text())
        assert len(cusps["cusp_times"]) == 3

    def test_thermo_error_decreases_with_nodes(self, tmp_path):
        checks = {}
        for nodes in (64, 128):
            cfg = config_for(
                tmp_path / str(nodes), "thermo", "--g0", "0.5", "--gf", "2.0",
                "--nodes", str(nodes), "--points", "41", "--t-max", "4.0",
            )
            checks[nodes] = run(cfg).checks
        assert checks[128]["quadrature_max_error"] < checks[64]["quadrature_max_error"]
        assert checks[128]["quadrature_nodes"] > checks[64]["quadrature_nodes"]

    def test_krylov_trace_matches_spectral(self, tmp_path):
        base = ("tfim-ed", "--L", "6", "--g0", "0.5", "--gf", "2.0", "--points", "51", "--t-max", "5")
        run(config_for(tmp_path / "spectral", *base))
        run(config_for(tmp_path / "lanczos", *base, "--krylov"))
        a = np.loadtxt(next((tmp_path / "spectral").iterdir()) / "trace.csv", delimiter=",", skiprows=1)
        b = np.loadtxt(next((tmp_path / "lanczos").iterdir()) / "trace.csv", delimiter=",", skiprows=1)
        np.testing.assert_allclose(b[:, 1], a[:, 1], atol=1e-8)

    def test_json_format(self, tmp_path):
        cfg = config_for(tmp_path, "bose-site", "--points", "101", "--format", "json")
        run(cfg)
        rundir = next(tmp_path.iterdir())
        payload = json.loads((rundir / "trace.json").read_text())
        assert set(payload) == {"t", "echo", "rate", "size_L"}
        assert len(payload["t"]) == 101

    def test_ladder_run(self, tmp_path):
        cfg = config_for(tmp_path, "ladder", "--levels", "6", "--points", "301")
        manifest = run(cfg)
        assert manifest.checks["echo_one_at_t0"]

    def test_deep_quench_cli_route(self, tmp_path):
        cfg = config_for(
            tmp_path, "tfim-ed", "--L", "4", "--g0", "0.0", "--gf", "3.0",
            "--coupling", "0.0", "--initial", "z+", "--points", "101", "--t-max", "4",
        )
        run(cfg)
        rows = np.loadtxt(next(tmp_path.iterdir()) / "trace.csv", delimiter=",", skiprows=1)
        np.testing.assert_allclose(rows[:, 1], np.cos(0.5 * 3.0 * rows[:, 0]) ** 8, atol=1e-10)
