import json

import numpy as np
import pytest

from fracfam.cli import (
    EXIT_ERROR,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_USAGE,
    ConfigFile,
    ValidationError,
    build_problem,
    main,
    parse_config,
    run_solve,
    run_verify,
    write_csv,
)
from fracfam.families import FamilyKind, family_symbol_table
from fracfam.fracalc import TimeGrid
from fracfam.solver import SolveResult


def _write_config(tmp_path, name="cfg.json", **overrides):
    payload = {"alpha": 1.5, "T": 1.0, "n_steps": 128, "n_modes": 8}
    payload.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestParseConfig:
    def test_minimal_defaults(self, tmp_path):
        cfg = parse_config(_write_config(tmp_path))
        assert cfg.beta == 0.5
        assert cfg.tol == 1e-8
        assert cfg.max_iter == 200
        assert cfg.damping == 1.0
        assert cfg.m_collocation == 16

    def test_alpha_out_of_range(self, tmp_path):
        with pytest.raises(ValidationError, match=r"alpha must lie in \(1,2\]"):
            parse_config(_write_config(tmp_path, alpha=2.5))

    def test_missing_required_field_named(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"alpha": 1.5, "n_steps": 64, "n_modes": 4}))
        with pytest.raises(ValidationError, match="'T'"):
            parse_config(str(path))

    def test_unknown_field_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="frobnicate"):
            parse_config(_write_config(tmp_path, frobnicate=1))

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\n  \"alpha\": 1.5,\n}")
        with pytest.raises(ValidationError, match="line"):
            parse_config(str(path))

    def test_round_trip(self, tmp_path):
        cfg = parse_config(
            _write_config(
                tmp_path,
                initial_x=[{"mode": 1, "scale": 1.0}],
                h={"name": "cubic", "scale": 0.5},
                tol=1e-9,
            )
        )
        path = tmp_path / "echo.json"
        path.write_text(cfg.to_json())
        cfg2 = parse_config(str(path))
        assert cfg == cfg2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            parse_config(str(tmp_path / "nope.json"))


class TestRunSolve:
    def test_linear_eigenmode_csv(self, tmp_path):
        cfg = parse_config(
            _write_config(tmp_path, n_steps=256, initial_x=[{"mode": 1, "scale": 1.0}])
        )
        out = tmp_path / "out.csv"
        assert run_solve(cfg, str(out)) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "t,res_fp,res_volterra," + ",".join(f"c_{j}" for j in range(1, 9))
        assert len(lines) == 258
        data = np.loadtxt(str(out), delimiter=",", skiprows=1)
        grid = TimeGrid(1.0, 256)
        want = family_symbol_table(1.5, FamilyKind.COSINE, -1.0, grid.nodes)
        assert np.abs(data[:, 3] - want).max() <= 1e-3

    def test_zero_data_all_zero(self, tmp_path):
        cfg = parse_config(_write_config(tmp_path, n_steps=64))
        out = tmp_path / "zero.csv"
        assert run_solve(cfg, str(out)) == EXIT_OK
        data = np.loadtxt(str(out), delimiter=",", skiprows=1)
        assert np.abs(data[:, 1:]).max() == 0.0

    def test_forced_nonconvergence_exit_code(self, tmp_path):
        cfg = parse_config(
            _write_config(
                tmp_path,
                n_steps=64,
                initial_x=[{"mode": 1, "scale": 2.0}],
                h={"name": "cubic", "scale": 40.0},
                tol=1e-12,
                max_iter=1,
            )
        )
        out = tmp_path / "stiff.csv"
        assert run_solve(cfg, str(out)) == EXIT_NONCONVERGENCE
        assert out.exists()  # partial result still written

    def test_determinism_bit_identical(self, tmp_path):
        cfg_path = _write_config(
            tmp_path,
            n_steps=128,
            initial_x=[{"mode": 2, "scale": 0.4}],
            f=[{"poly_t": [0.1, 0.2], "shape": [{"mode": 1, "scale": 1.0}]}],
            h={"name": "sin", "scale": 0.3},
        )
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["solve", "--config", cfg_path, "--out", str(out1)]) == EXIT_OK
        assert main(["solve", "--config", cfg_path, "--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_nodal_columns(self, tmp_path):
        cfg = parse_config(_write_config(tmp_path, n_steps=16, n_modes=4))
        out = tmp_path / "nodal.csv"
        assert run_solve(cfg, str(out), nodal=True) == EXIT_OK
        header = out.read_text().splitlines()[0].split(",")
        assert header[-1] == "u_8"
        assert len(header) == 3 + 4 + 8


class TestWriteCsv:
    def test_small_result_shape(self, tmp_path):
        grid = TimeGrid(1.0, 3)
        result = SolveResult(
            grid=grid,
            beta=0.5,
            trajectory=np.arange(8.0).reshape(4, 2),
            iterations=1,
            converged=True,
            fixed_point_residual=0.0,
            volterra_residual=0.0,
            fp_residual_per_node=np.zeros(4),
            volterra_residual_per_node=np.zeros(4),
            beta_excursion_per_node=np.zeros(4),
        )
        cfg = ConfigFile(alpha=1.5, T=1.0, n_steps=3, n_modes=2)
        path = tmp_path / "small.csv"
        write_csv(result, cfg, str(path))
        lines = path.read_text().splitlines()
        assert len(lines) == 5
        assert len(lines[1].split(",")) == 5  # t, res_fp, res_volterra, c_1, c_2

    def test_empty_trajectory_header_only(self, tmp_path):
        grid = TimeGrid(1.0, 3)
        result = SolveResult(
            grid=grid,
            beta=0.5,
            trajectory=np.zeros((0, 2)),
            iterations=0,
            converged=True,
            fixed_point_residual=0.0,
            volterra_residual=0.0,
            fp_residual_per_node=np.zeros(0),
            volterra_residual_per_node=np.zeros(0),
            beta_excursion_per_node=np.zeros(0),
        )
        cfg = ConfigFile(alpha=1.5, T=1.0, n_steps=3, n_modes=2)
        path = tmp_path / "empty.csv"
        write_csv(result, cfg, str(path))
        lines = path.read_text().splitlines()
        assert lines == ["t,res_fp,res_volterra,c_1,c_2"]

    def test_seventeen_significant_digits(self, tmp_path):
        grid = TimeGrid(1.0, 1)
        value = 1.0 / 3.0
        result = SolveResult(
            grid=grid,
            beta=0.5,
            trajectory=np.array([[value], [value]]),
            iterations=1,
            converged=True,
            fixed_point_residual=0.0,
            volterra_residual=0.0,
            fp_residual_per_node=np.zeros(2),
            volterra_residual_per_node=np.zeros(2),
            beta_excursion_per_node=np.zeros(2),
        )
        cfg = ConfigFile(alpha=1.5, T=1.0, n_steps=1, n_modes=1)
        path = tmp_path / "digits.csv"
        write_csv(result, cfg, str(path))
        cell = path.read_text().splitlines()[1].split(",")[-1]
        assert float(cell) == value  # lossless round trip


class TestVerifyCommand:
    def test_unknown_suite_usage_exit(self):
        assert main(["verify", "--suite", "foo"]) == EXIT_USAGE

    def test_chenli_suite_passes(self, capsys):
        cfg = ConfigFile(alpha=1.5, T=1.0, n_steps=2048, n_modes=8)
        report, code = run_verify("chenli", cfg)
        assert code == EXIT_OK
        assert report.passed
        out = capsys.readouterr().out
        assert "chenli_default_matrix" in out and "overall: pass" in out

    def test_specfun_suite_passes_and_writes_csv(self, tmp_path):
        cfg = ConfigFile(alpha=1.5, T=1.0, n_steps=128, n_modes=4)
        out = tmp_path / "report.csv"
        report, code = run_verify("specfun", cfg, str(out))
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "check,residual,tolerance,pass"
        assert len(lines) == len(report.rows) + 1

    def test_validation_error_exit(self, tmp_path):
        bad = _write_config(tmp_path, alpha=2.5)
        assert main(["solve", "--config", bad, "--out", str(tmp_path / "x.csv")]) == EXIT_ERROR

    def test_missing_command_usage(self):
        assert main([]) == EXIT_USAGE


def test_build_problem_applies_profiles(tmp_path):
    cfg = parse_config(
        _write_config(
            tmp_path,
            initial_x=[{"mode": 2, "scale": 1.5}],
            initial_y=[{"mode": 1, "scale": -0.5}],
            f=[{"poly_t": [1.0, 2.0], "shape": [{"mode": 3, "scale": 1.0}]}],
            h={"name": "linear_memory", "kernel_poly_t": [0.0, 1.0], "kernel_poly_s": [1.0]},
        )
    )
    spec, grid = build_problem(cfg)
    assert spec.x.coeffs[1] == 1.5
    assert spec.y.coeffs[0] == -0.5
    assert np.abs(spec.f.value(0.5)[2] - 2.0).max() <= 1e-15
    assert spec.f.derivative(0.5)[2] == pytest.approx(2.0)
    w = np.array([1.0])
    assert spec.h.apply(2.0, 0.3, w)[0] == pytest.approx(2.0)
    assert grid.n_steps == cfg.n_steps
