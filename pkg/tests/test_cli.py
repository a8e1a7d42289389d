import json
import math
from pathlib import Path

import pytest

import optexec as ox
from optexec.cli import main
from optexec.config import ConfigError, load_config, parse_config


def tiny_config(tmp_path: Path, kind="log_quadratic", phi0=1.0, n=16, **overrides) -> Path:
    data = {
        "schema_version": 1,
        "name": "tiny",
        "market": {"mu": 0.05, "sigma": 0.0, "s0": 1.0, "phi0": phi0, "horizon": 1.0},
        "impact": {"kind": kind, "alpha": 0.01},
        "dp": {"n": n, "phi_grid_size": 64, "psi_grid_size": 128},
        "mc": {"paths": 64, "seed": 11, "dt_fine": 0.01},
    }
    data.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = load_config(tiny_config(tmp_path))
        assert cfg.name == "tiny"
        assert cfg.dp.n == 16
        reparsed = parse_config(cfg.to_dict())
        assert reparsed == cfg

    def test_all_errors_reported_at_once(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "schema_version": 99,
            "name": "",
            "market": {"mu": 0.05, "sigma": 0.0, "s0": 1.0, "phi0": 1.0, "mystery": 1},
            "impact": {"kind": "log_linear", "alpha": 0.01},
            "dp": {"n": 8, "surprise": True},
            "extra_top": {},
        }))
        with pytest.raises(ConfigError) as err:
            load_config(bad)
        text = str(err.value)
        assert "schema_version" in text
        assert "name" in text
        assert "mystery" in text
        assert "surprise" in text
        assert "extra_top" in text

    def test_invalid_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_missing_sections(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"schema_version": 1, "name": "x"})
        assert "market" in str(err.value)
        assert "impact" in str(err.value)


class TestSolveCommand:
    def test_outputs_and_value(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "out"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "value_grid.csv").exists()
        assert (out / "policy.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        cfg = load_config(cfg_path)
        grid = ox.solve_backward(cfg.market, cfg.impact, n=16, phi_grid=64,
                                 psi_search=ox.PsiSearch(scan_points=128))
        assert summary["value"] == pytest.approx(ox.value_at(grid, 16, 0.0, 1.0, 1.0), rel=1e-12)
        assert summary["config"]["dp"]["n"] == 16
        assert "runtime_seconds" in summary
        assert summary["version"].startswith("optexec-")

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["solve", "--config", str(cfg_path), "--out", str(out2)]) == 0
        for name in ("value_grid.csv", "policy.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_threads_flag(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out1, out2 = tmp_path / "t1", tmp_path / "t2"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out1), "--threads", "1"]) == 0
        assert main(["solve", "--config", str(cfg_path), "--out", str(out2), "--threads", "2"]) == 0
        assert (out1 / "value_grid.csv").read_bytes() == (out2 / "value_grid.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema_version": 1, "name": "x", "whatever": 1}))
        assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert "whatever" in capsys.readouterr().err

    def test_missing_out_dir(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        assert main(["solve", "--config", str(cfg_path)]) == 2

    def test_outputs_field_used(self, tmp_path):
        out = tmp_path / "from_config"
        cfg_path = tiny_config(tmp_path, outputs=str(out))
        assert main(["solve", "--config", str(cfg_path)]) == 0
        assert (out / "value_grid.csv").exists()

    def test_zero_layer_solve_is_valid(self, tmp_path):
        cfg_path = tiny_config(tmp_path, dp={"n": 8, "k_max": 0, "phi_grid_size": 16, "psi_grid_size": 32})
        out = tmp_path / "zero"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "value_grid.csv").read_text().splitlines()
        assert lines[0] == "k,phi,F,psi_hat"
        assert len(lines) == 18  # one layer, 17 grid points
        assert all(line.split(",")[2] == "0.0" for line in lines[1:])
        assert json.loads((out / "summary.json").read_text())["value"] == 0.0


class TestFiguresCommand:
    def test_files_and_analytic_column(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "fig"
        assert main(["figures", "--config", str(cfg_path), "--out", str(out), "--phi-list", "0.5,1"]) == 0
        strat = (out / "strategy_phi1.csv").read_text().splitlines()
        assert strat[0] == "r,zeta,zeta_analytic"
        # small holdings sit in the early-finish region: analytic column filled
        first = strat[1].split(",")
        assert first[2] != ""
        assert float(first[2]) == pytest.approx(math.sqrt(5.0), rel=1e-12)
        hold = (out / "holdings_phi0.5.csv").read_text().splitlines()
        assert hold[0] == "r,phi_r"
        assert float(hold[1].split(",")[1]) == 0.5
        surface = (out / "f_surface.csv").read_text().splitlines()
        assert surface[0] == "t,phi,f"
        regions = (out / "regions.csv").read_text().splitlines()
        assert regions[0] == "t,phi,region,boundary_a,boundary_c,value_closed_form"
        assert any(",A," in line for line in regions[1:]) is False  # phi0=1 stays out of region A
        assert any(",C," in line for line in regions[1:])

    def test_region_b_blank_value(self, tmp_path):
        cfg_path = tiny_config(tmp_path, phi0=10.0)
        out = tmp_path / "fig"
        assert main(["figures", "--config", str(cfg_path), "--out", str(out), "--phi-list", "5"]) == 0
        rows = [l.split(",") for l in (out / "regions.csv").read_text().splitlines()[1:]]
        b_rows = [r for r in rows if r[2] == "B"]
        assert b_rows and all(r[5] == "" for r in b_rows)
        strat = (out / "strategy_phi5.csv").read_text().splitlines()
        assert all(line.endswith(",") for line in strat[1:])  # no analytic schedule in region B

    def test_phi_outside_grid(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        assert main(["figures", "--config", str(cfg_path), "--out", str(tmp_path / "x"),
                     "--phi-list", "2.0"]) == 2


class TestConvergeCommand:
    def test_output_schema(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "conv"
        assert main(["converge", "--config", str(cfg_path), "--out", str(out),
                     "--n-list", "4,8,16", "--phi", "1.0"]) == 0
        lines = (out / "convergence.csv").read_text().splitlines()
        assert lines[0] == "n,value,reference,abs_gap"
        assert len(lines) == 4
        gaps = [float(l.split(",")[3]) for l in lines[1:]]
        assert gaps[0] > gaps[2]

    def test_singleton_n_list(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "conv1"
        assert main(["converge", "--config", str(cfg_path), "--out", str(out),
                     "--n-list", "8", "--phi", "1.0"]) == 0
        assert len((out / "convergence.csv").read_text().splitlines()) == 2


class TestMcCommand:
    def test_continuous_mode(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "mc"
        assert main(["mc", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "outcomes.csv").read_text().splitlines()
        assert lines[0] == "path_id,terminal_w,terminal_phi,terminal_s"
        assert len(lines) == 65
        summary = json.loads((out / "mc_summary.json").read_text())
        assert summary["strategy_source"] == "closed_form"
        assert summary["mean"] == pytest.approx(summary["reference"], abs=2e-3)

    def test_discrete_mode_with_dp_fallback(self, tmp_path):
        cfg_path = tiny_config(tmp_path, kind="log_linear")
        out = tmp_path / "mc"
        assert main(["mc", "--config", str(cfg_path), "--out", str(out), "--mode", "discrete"]) == 0
        summary = json.loads((out / "mc_summary.json").read_text())
        assert summary["strategy_source"] == "dp_playout"
        assert summary["mode"] == "discrete"


class TestHjbCheckCommand:
    def test_residual_sweep(self, tmp_path):
        cfg_path = tiny_config(tmp_path, phi0=10.0, n=32)
        out = tmp_path / "hjb"
        assert main(["hjb-check", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "hjb_residuals.csv").read_text().splitlines()
        assert lines[0] == "t,phi,region,residual,delta_t,delta_phi"
        assert len(lines) > 4
        summary = json.loads((out / "hjb_summary.json").read_text())
        assert summary["max_closed_form_residual"] <= 1e-6

    def test_wrong_kind_rejected(self, tmp_path):
        cfg_path = tiny_config(tmp_path, kind="log_linear")
        assert main(["hjb-check", "--config", str(cfg_path), "--out", str(tmp_path / "x")]) == 2


class TestSelloutCompareCommand:
    def test_sandwich_holds(self, tmp_path):
        cfg_path = tiny_config(tmp_path)
        out = tmp_path / "so"
        assert main(["sellout-compare", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "sellout_compare.csv").read_text().splitlines()
        assert lines[0] == "k,phi,F_prev,F_sellout,F"
        summary = json.loads((out / "sellout_summary.json").read_text())
        assert summary["max_sandwich_violation"] <= 0.0
