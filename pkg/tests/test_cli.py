"""Command-line surface: config handling, commands, files, exit codes."""

import json

import numpy as np
import pytest

from monotone_wfi.cli import (
    SCHEMAS,
    ConfigError,
    emit_config_text,
    main,
    parse_config_text,
)
from monotone_wfi.estimator import StepEstimate


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _step_from_csv(path):
    rows = _read(path).splitlines()[1:]
    if not rows:
        return StepEstimate(np.array([]), np.array([]))
    parts = np.array([[float(c) for c in row.split(",")] for row in rows])
    return StepEstimate(parts[:, 0], parts[:, 1])


class TestConfig:
    @pytest.mark.parametrize("command", sorted(SCHEMAS))
    def test_emit_parse_emit_fixed_point(self, command):
        text = emit_config_text(command)
        cfg = parse_config_text(command, text)
        assert emit_config_text(command, cfg) == text

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text("rate-study", "study.bogus = 3\n")

    def test_bad_line_rejected(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("rate-study", "# fine\nnot a pair\n")

    def test_comments_and_overrides(self):
        cfg = parse_config_text("rate-study", "seed = 5  # inline comment\n")
        assert cfg["seed"] == 5
        assert cfg["scenario.link"] == "logistic"

    def test_value_parsing(self):
        cfg = parse_config_text(
            "rate-study", "study.n_list = 64,128\nstudy.gammas = 0.1,0.9\n"
        )
        assert cfg["study.n_list"] == (64, 128)
        assert cfg["study.gammas"] == (0.1, 0.9)
        with pytest.raises(ConfigError, match="cannot parse"):
            parse_config_text("rate-study", "seed = pi\n")


class TestFitCommand:
    def test_worked_example(self, tmp_path, capsys):
        data = tmp_path / "data.csv"
        _write(data, "x,y\n1,0\n2,1\n3,0\n4,1\n")
        prefix = tmp_path / "fit"
        assert main(["fit", "--input", str(data), "--output-prefix", str(prefix)]) == 0
        step = _step_from_csv(f"{prefix}.steps.csv")
        assert np.allclose(step(np.array([1.0, 2.0, 3.0, 4.0])), [0, 0.5, 0.5, 1.0])
        meta = json.loads(_read(f"{prefix}.meta.json"))
        assert meta["n"] == 4
        assert "right-continuous" in meta["extension"]

    def test_empty_sample(self, tmp_path, capsys):
        data = tmp_path / "empty.csv"
        _write(data, "x,y\n")
        code = main(["fit", "--input", str(data), "--output-prefix", str(tmp_path / "o")])
        assert code == 2
        assert "empty sample" in capsys.readouterr().err

    def test_non_binary_label_names_line(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        _write(data, "x,y\n1,0\n2,0.7\n")
        code = main(["fit", "--input", str(data), "--output-prefix", str(tmp_path / "o")])
        assert code == 2
        assert "line 3" in capsys.readouterr().err

    def test_malformed_row_names_line(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        _write(data, "x,y\n1,0\noops\n")
        code = main(["fit", "--input", str(data), "--output-prefix", str(tmp_path / "o")])
        assert code == 2
        assert "line 3" in capsys.readouterr().err

    def test_header_required(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        _write(data, "a,b\n1,0\n")
        assert main(["fit", "--input", str(data), "--output-prefix", str(tmp_path / "o")]) == 2


class TestSimulateLimit:
    def test_deterministic_outputs(self, tmp_path):
        args = [
            "simulate-limit",
            "--out", str(tmp_path / "a"),
            "--seed", "42",
            "--set", "limit.draws=500",
            "--set", "grid.step=0.04",
            "--set", "grid.half_width=4.0",
        ]
        assert main(args) == 0
        first = _read(tmp_path / "a" / "limit_batch.csv")
        args[2] = str(tmp_path / "b")
        assert main(args) == 0
        assert _read(tmp_path / "b" / "limit_batch.csv") == first
        meta = json.loads(_read(tmp_path / "a" / "limit_batch.meta.json"))
        assert meta["law_tag"] == "scaled_chernoff"
        assert meta["draws"] == 500

    def test_l1_fast_draws_nonnegative(self, tmp_path):
        code = main([
            "simulate-limit",
            "--out", str(tmp_path),
            "--set", "limit.law_tag=l1_fast_maxA",
            "--set", "limit.draws=400",
            "--set", "grid.half_width=1.0",
            "--set", "grid.step=0.002",
            "--set", "grid.two_sided=0",
        ])
        assert code == 0
        draws = [float(v) for v in _read(tmp_path / "limit_batch.csv").splitlines()[1:]]
        assert all(v >= 0 for v in draws)

    def test_interior_point_violation(self, tmp_path, capsys):
        code = main([
            "simulate-limit",
            "--out", str(tmp_path),
            "--set", "limit.law_tag=boundary_gbc",
            "--set", "limit.x0=1.0",
            "--set", "grid.half_width=1.0",
            "--set", "grid.step=0.002",
            "--set", "grid.two_sided=0",
        ])
        assert code == 2
        assert "interior" in capsys.readouterr().err

    def test_unknown_tag(self, tmp_path, capsys):
        code = main([
            "simulate-limit", "--out", str(tmp_path), "--set", "limit.law_tag=bogus",
        ])
        assert code == 2


class TestStudyCommands:
    def test_rate_study_files_and_manifest(self, tmp_path):
        out = tmp_path / "rate"
        args = [
            "rate-study",
            "--out", str(out),
            "--seed", "7",
            "--set", "study.gammas=0.8",
            "--set", "study.n_list=64,128,256",
            "--set", "study.replicates=50",
        ]
        assert main(args) == 0
        csv_text = _read(out / "rate_study.csv")
        assert csv_text.splitlines()[0] == "gamma,n,replicate,err_pointwise,err_l1"
        assert len(csv_text.splitlines()) == 1 + 3 * 50
        manifest = json.loads(_read(out / "rate_study.manifest.json"))
        per_gamma = manifest["per_gamma"]["0.8"]
        assert per_gamma["target_slope"] == -0.5
        svg = _read(out / "rate_study.pointwise.svg")
        assert svg.startswith("<svg")
        assert "slope" in svg

    def test_svg_reruns_byte_identical(self, tmp_path):
        outs = []
        for name in ("p", "q"):
            out = tmp_path / name
            main([
                "rate-study", "--out", str(out), "--seed", "7",
                "--set", "study.gammas=0.8",
                "--set", "study.n_list=64,128,256",
                "--set", "study.replicates=50",
            ])
            outs.append(_read(out / "rate_study.pointwise.svg"))
        assert outs[0] == outs[1]

    def test_lower_bound_audit_manifest(self, tmp_path):
        out = tmp_path / "audit"
        assert main(["lower-bound-audit", "--out", str(out), "--check"]) == 0
        manifest = json.loads(_read(out / "lower_bound_audit.manifest.json"))
        assert manifest["alpha"]["fast"] == pytest.approx(0.64)
        assert any("<= " in s and "< 2" in s for s in manifest["inequalities"])
        assert (out / "lower_bound_audit.hypotheses.svg").exists()

    def test_constants_command(self, tmp_path):
        out = tmp_path / "const"
        args = [
            "constants",
            "--out", str(out),
            "--seed", "5",
            "--set", "constants.abs_mean_draws=10000",
            "--set", "constants.cov_draws=500",
            "--set", "grid.step=0.04",
        ]
        assert main(args) == 0
        rows = _read(out / "constants.csv").splitlines()
        assert rows[0] == "name,estimate,se"
        names = [r.split(",")[0] for r in rows[1:]]
        assert names == ["chernoff_abs_mean", "cov_integral"]
        for r in rows[1:]:
            cells = r.split(",")
            assert float(cells[1]) > 0 and float(cells[2]) > 0

    def test_check_mode_failure_exit(self, tmp_path):
        # an acceptance-style run with an absurd tolerance must exit 4
        out = tmp_path / "rate"
        code = main([
            "rate-study", "--out", str(out), "--seed", "7", "--check",
            "--set", "study.gammas=0.8",
            "--set", "study.n_list=64,128,256",
            "--set", "study.replicates=50",
            "--set", "tolerances.slope=0.0001",
        ])
        assert code == 4

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MONOTONE_WFI_SEED", "999")
        out = tmp_path / "env"
        main([
            "simulate-limit", "--out", str(out),
            "--set", "limit.draws=50", "--set", "grid.step=0.04",
        ])
        meta = json.loads(_read(out / "limit_batch.meta.json"))
        assert meta["seed"] == 999

    def test_emit_config_command(self, capsys):
        assert main(["emit-config", "rate-study"]) == 0
        text = capsys.readouterr().out
        assert "study.gammas" in text
        assert parse_config_text("rate-study", text)["study.replicates"] == 400

    def test_config_file_plus_set_overrides(self, tmp_path):
        cfg_path = tmp_path / "cfg"
        _write(cfg_path, "study.n_list = 64,128,256\nstudy.replicates = 50\nstudy.gammas = 0.8\n")
        out = tmp_path / "o"
        code = main([
            "rate-study", "--config", str(cfg_path), "--out", str(out),
            "--seed", "3", "--set", "study.replicates=60",
        ])
        assert code == 0
        assert len(_read(out / "rate_study.csv").splitlines()) == 1 + 3 * 60


class TestNumericalFailureExit:
    def test_quadrature_exhaustion_maps_to_exit_3(self, tmp_path, capsys):
        # a tolerance below machine precision exhausts the adaptive rule
        code = main([
            "lower-bound-audit",
            "--out", str(tmp_path),
            "--set", "audit.quad_tol=1e-30",
        ])
        assert code == 3
        assert "numerical failure" in capsys.readouterr().err
