import json
import re

import numpy as np
import pytest

from shearfront.cli import main
from shearfront.sweeps import read_records
from _references import CSTAR_REFERENCE_32


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def machine_value(out, key):
    match = re.search(rf"{key}=([-\d.e+]+)", out)
    assert match, f"no {key}= line in output:\n{out}"
    return float(match.group(1))


class TestSpeedCommand:
    def test_zero_shear_baseline(self, capsys):
        code, out, _ = run_cli(
            capsys, "speed", "--delta", "0", "--freq", "0", "--fprime0", "1",
            "--grid", "16x16",
        )
        assert code == 0
        assert machine_value(out, "c_star") == pytest.approx(-2.0, abs=1e-8)

    def test_quadruple_reaction(self, capsys):
        code, out, _ = run_cli(
            capsys, "speed", "--delta", "0", "--fprime0", "4", "--grid", "16x16"
        )
        assert code == 0
        assert machine_value(out, "c_star") == pytest.approx(-4.0, abs=1e-8)

    def test_sheared_regression(self, capsys):
        # 16x16 agrees with the frozen 32x32 scan value to ~1e-12
        code, out, _ = run_cli(
            capsys, "speed", "--delta", "1", "--freq", "1", "--fprime0", "1",
            "--grid", "16x16",
        )
        assert code == 0
        assert machine_value(out, "c_star") == pytest.approx(
            CSTAR_REFERENCE_32, abs=1e-6
        )

    def test_config_file_overridden_by_flags(self, capsys, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"delta": 1.0, "freq": 1, "grid": "16x16"}))
        code, out, _ = run_cli(
            capsys, "speed", "--config", str(config), "--delta", "0"
        )
        assert code == 0
        assert machine_value(out, "c_star") == pytest.approx(-2.0, abs=1e-8)
        assert '"delta": 0.0' in out  # effective config echoed

    def test_invalid_grid_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "speed", "--grid", "9x9")
        assert code == 64
        assert "grid" in err

    def test_invalid_fprime0_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "speed", "--fprime0", "-1", "--grid", "16x16")
        assert code == 64


class TestCurveCommand:
    def test_rows_match_unsheared_closed_form(self, capsys):
        code, out, _ = run_cli(
            capsys, "curve", "--delta", "0", "--grid", "16x16",
            "--lambda-min", "1", "--lambda-max", "2", "--steps", "3",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "lambda,mu,h"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        assert [r[0] for r in rows] == sorted(r[0] for r in rows)
        for lam, mu, h in rows:
            assert mu == pytest.approx(lam**2 + 1.0, abs=1e-9)
            assert h == pytest.approx(mu / lam, abs=1e-12)

    def test_curve_minimum_bounds_speed(self, capsys, tmp_path):
        out_path = tmp_path / "curve.csv"
        code, _, _ = run_cli(
            capsys, "curve", "--delta", "1", "--freq", "1", "--grid", "16x16",
            "--lambda-min", "0.3", "--lambda-max", "3", "--steps", "12",
            "--out", str(out_path),
        )
        assert code == 0
        rows = np.loadtxt(out_path, delimiter=",", skiprows=1)
        code, out, _ = run_cli(
            capsys, "speed", "--delta", "1", "--freq", "1", "--grid", "16x16"
        )
        h_star = -machine_value(out, "c_star")
        assert rows[:, 2].min() >= h_star - 1e-6

    def test_sampled_curve_is_unimodal(self, tmp_path, capsys):
        out_path = tmp_path / "curve.csv"
        code, _, _ = run_cli(
            capsys, "curve", "--delta", "1", "--freq", "1", "--grid", "16x16",
            "--lambda-min", "0.3", "--lambda-max", "3", "--steps", "12",
            "--out", str(out_path),
        )
        assert code == 0
        h = np.loadtxt(out_path, delimiter=",", skiprows=1)[:, 2]
        drops = np.diff(h) < 0
        assert drops[0] and not drops[-1]
        flips = np.count_nonzero(np.diff(drops.astype(int)))
        assert flips == 1

    def test_bad_range_is_usage_error(self, capsys):
        code, _, _ = run_cli(
            capsys, "curve", "--lambda-min", "2", "--lambda-max", "1", "--grid", "8x8"
        )
        assert code == 64


class TestSweepAndFitCommands:
    def test_sweep_writes_readable_records(self, capsys, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(
            json.dumps({"deltas": [0.5, 1.0], "freqs": [1], "grid": "16x16"})
        )
        out_path = tmp_path / "records.csv"
        code, out, _ = run_cli(
            capsys, "sweep", "--config", str(config), "--out", str(out_path)
        )
        assert code == 0
        records = read_records(out_path)
        assert [r.delta for r in records] == [0.5, 1.0]
        assert (tmp_path / "records.csv.meta.json").exists()

    def test_sweep_without_out_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "sweep")
        assert code == 64

    def test_fit_on_synthetic_square_law(self, capsys, tmp_path):
        path = tmp_path / "records.csv"
        lines = ["delta,freq,lambda_star,c_star,enhancement,iterations,residual"]
        for d in (0.1, 0.2, 0.4, 0.8):
            lines.append(f"{d},1,1.0,{-2 - d * d},{d * d},3,1e-13")
        path.write_text("\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "fit", str(path), "--range", "0.05:1")
        assert code == 0
        assert machine_value(out, "slope") == pytest.approx(2.0, abs=1e-9)

    def test_fit_bad_range_is_usage_error(self, capsys, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text("delta,freq,lambda_star,c_star,enhancement,iterations,residual\n")
        code, _, _ = run_cli(capsys, "fit", str(path), "--range", "nope")
        assert code == 64

    def test_fit_missing_file_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "fit", "/no/such/file.csv", "--range", "0.1:1")
        assert code == 64

    def test_fit_insufficient_data_is_numerical_failure(self, capsys, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text(
            "delta,freq,lambda_star,c_star,enhancement,iterations,residual\n"
            "0.1,1,1.0,-2.01,0.01,3,1e-13\n"
        )
        code, _, err = run_cli(capsys, "fit", str(path), "--range", "0.05:1")
        assert code == 2
        assert "numerical failure" in err


class TestOracleCommand:
    def test_short_run_writes_trace(self, capsys, tmp_path):
        out_path = tmp_path / "trace.csv"
        code, out, _ = run_cli(
            capsys, "oracle", "--delta", "0", "--fprime0", "1",
            "--domain-length", "100", "--nx", "1000", "--ny", "1",
            "--t-final", "10", "--out", str(out_path),
        )
        assert code == 0
        speed = machine_value(out, "speed")
        assert -2.2 < speed < -1.3
        lines = out_path.read_text().splitlines()
        assert lines[0] == "time,position"
        assert len(lines) > 50
        meta = json.loads((tmp_path / "trace.csv.meta.json").read_text())
        assert "dt" in meta and "effective_config" in meta

    def test_reaction_off_drifts_nowhere(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "--delta", "0", "--fprime0", "0",
            "--domain-length", "50", "--nx", "500", "--ny", "1", "--t-final", "8",
        )
        assert code == 0
        assert abs(machine_value(out, "speed")) < 0.1

    def test_cfl_violation_is_numerical_failure(self, capsys):
        code, _, err = run_cli(
            capsys, "oracle", "--delta", "2", "--freq", "1", "--ny", "8",
            "--nx", "200", "--domain-length", "50", "--dt", "1.0", "--t-final", "5",
        )
        assert code == 2
        assert "numerical failure" in err


class TestUsage:
    def test_unknown_command(self, capsys):
        assert run_cli(capsys, "bogus")[0] == 64

    def test_unknown_flag(self, capsys):
        assert run_cli(capsys, "speed", "--nope", "1")[0] == 64

    def test_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["speed", "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in ("--delta", "--freq", "--fprime0", "--grid", "--config"):
            assert flag in out
