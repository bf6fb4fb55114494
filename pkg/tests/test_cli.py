import numpy as np
import pytest

from tempered_ldg.cli import main, parse_args


def run_cli(args):
    return main(list(args))


class TestParsing:
    def test_no_arguments_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            parse_args([])
        assert exc.value.code == 2

    def test_central_flux_weight_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            parse_args(["solve", "--delta", "0.5"])
        assert exc.value.code == 2
        assert "1/2" in capsys.readouterr().err

    def test_alpha_range_enforced(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["solve", "--alpha", "1.0"])
        assert exc.value.code == 2

    def test_non_divisible_tau_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            parse_args(["time-order", "--tau", "0.4,0.3", "--T", "1"])
        assert exc.value.code == 2
        assert "integer multiple" in capsys.readouterr().err

    def test_table_5_sweep_configuration(self):
        ns = parse_args([
            "time-order", "--alpha", "0.5", "--delta", "0.1", "--N", "100",
            "--T", "1", "--tau", "0.04,0.02,0.01,0.005",
        ])
        assert ns.alpha == 0.5 and ns.delta == 0.1 and ns.N == 100
        assert ns.tau == [0.04, 0.02, 0.01, 0.005]

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["solve", "--frobnicate", "3"])
        assert exc.value.code == 2

    def test_domain_only_for_pulse_problem(self):
        with pytest.raises(SystemExit):
            parse_args(["solve", "--problem", "ex4.1", "--domain", "0,2"])


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_win(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# settings\nalpha = 0.3\nN = 12\n")
        ns = parse_args(["solve", "--config", str(cfg)])
        assert ns.alpha == 0.3 and ns.N == 12
        ns = parse_args(["solve", "--config", str(cfg), "--alpha", "0.4"])
        assert ns.alpha == 0.4 and ns.N == 12

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("frobnicate = 1\n")
        with pytest.raises(SystemExit) as exc:
            parse_args(["solve", "--config", str(cfg)])
        assert exc.value.code == 2
        assert "frobnicate" in capsys.readouterr().err

    def test_invalid_config_value_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("delta = 0.5\n")
        with pytest.raises(SystemExit) as exc:
            parse_args(["solve", "--config", str(cfg)])
        assert exc.value.code == 2

    def test_hyphenated_keys_accepted(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("quad-order = 8\n")
        ns = parse_args(["solve", "--config", str(cfg)])
        assert ns.quad_order == 8


class TestRunners:
    def test_solve_reports_errors_and_writes_files(self, tmp_path, capsys):
        out = tmp_path / "u.csv"
        mesh_csv = tmp_path / "mesh.csv"
        code = run_cli([
            "solve", "--problem", "ex4.1", "--alpha", "0.5", "--k", "1",
            "--N", "8", "--M", "10", "--out", str(out), "--dump-mesh", str(mesh_csv),
        ])
        assert code == 0
        text = capsys.readouterr().out
        assert "L2 error" in text and "Linf error" in text
        assert out.exists() and mesh_csv.exists()
        assert len(mesh_csv.read_text().splitlines()) == 9

    def test_space_order_writes_table(self, tmp_path, capsys):
        out = tmp_path / "space.csv"
        code = run_cli([
            "space-order", "--problem", "ex4.1", "--alpha", "0.5", "--k", "1",
            "--N", "4,8", "--M", "20", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert "param,l2_error,l2_order,linf_error,linf_order,wall_time_s" in lines
        data = [ln for ln in lines if not ln.startswith(("#", "param"))]
        assert len(data) == 2

    def test_time_order_writes_table(self, tmp_path):
        out = tmp_path / "time.csv"
        code = run_cli([
            "time-order", "--alpha", "0.5", "--k", "1", "--N", "8",
            "--tau", "0.25,0.125", "--T", "1", "--out", str(out),
        ])
        assert code == 0
        assert out.exists()

    def test_stability_sweep(self, tmp_path, capsys):
        out = tmp_path / "stab.csv"
        code = run_cli([
            "stability", "--alpha", "0.3,0.8", "--gamma", "0,2", "--delta",
            "0,0.3", "--tau", "0.1,10", "--k", "1", "--N", "6",
            "--steps", "8", "--out", str(out),
        ])
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_stability_byte_reproducible(self, tmp_path):
        args = ["stability", "--alpha", "0.5", "--gamma", "2", "--delta", "0.2",
                "--tau", "0.5", "--k", "1", "--N", "6", "--steps", "5", "--seed", "9"]
        p1, p2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert run_cli(args + ["--out", str(p1)]) == 0
        assert run_cli(args + ["--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_demo_writes_finite_snapshots(self, tmp_path, capsys):
        prefix = tmp_path / "demo"
        code = run_cli([
            "demo", "--alpha", "0.3", "--gamma", "2", "--k", "1",
            "--tau", "0.05", "--h", "0.5", "--times", "0,0.1,0.2",
            "--out-prefix", str(prefix),
        ])
        assert code == 0
        for t in ("0", "0.1", "0.2"):
            path = tmp_path / f"demo_t{t}.csv"
            assert path.exists(), path
            rows = [ln.split(",") for ln in path.read_text().splitlines()[1:]]
            values = np.array([[float(a), float(b)] for a, b in rows])
            assert np.all(np.isfinite(values))

    def test_demo_h_must_divide_domain(self):
        with pytest.raises(SystemExit) as exc:
            parse_args(["demo", "--h", "0.7"])
        assert exc.value.code == 2
