import json

import numpy as np
import pytest

from shearfront.errors import InsufficientDataError, RecordParseError
from shearfront.grid import GridSpec
from shearfront.sweeps import (
    SweepConfig,
    SweepRecord,
    default_grid,
    fit_loglog_slope,
    read_records,
    run_sweep,
    write_records,
)


def synthetic_records(deltas, exponent=2.0, coeff=1.0):
    return [
        SweepRecord(
            delta=d,
            freq=1,
            lambda_star=1.0,
            c_star=-2.0 - coeff * d**exponent,
            enhancement=coeff * d**exponent,
            iterations=3,
            residual=1e-13,
        )
        for d in deltas
    ]


class TestConfigValidation:
    def test_requires_nonempty(self):
        with pytest.raises(ValueError):
            SweepConfig(deltas=(), freqs=(1,))

    def test_requires_sorted(self):
        with pytest.raises(ValueError):
            SweepConfig(deltas=(1.0, 0.5), freqs=(0,))
        with pytest.raises(ValueError):
            SweepConfig(deltas=(0.5,), freqs=(2, 1))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SweepConfig(deltas=(-1.0,), freqs=(0,))
        with pytest.raises(ValueError):
            SweepConfig(deltas=(1.0,), freqs=(-1,))

    def test_rejects_bad_fprime0(self):
        with pytest.raises(ValueError):
            SweepConfig(deltas=(1.0,), freqs=(0,), fprime0=0.0)


class TestDefaultGrid:
    def test_floor(self):
        grid = default_grid(0.5, 0)
        assert grid.n_y >= 32 and grid.n_tau >= 32

    def test_scales_with_frequency(self):
        assert default_grid(1.0, 5).n_tau >= 40

    def test_respects_matrix_cap(self):
        grid = default_grid(10000.0, 12)
        assert grid.size <= 4096


class TestRunSweep:
    def test_zero_pair_reproduces_baseline(self):
        config = SweepConfig(deltas=(0.0,), freqs=(0,), grid=GridSpec(16, 16))
        records = run_sweep(config)
        assert len(records) == 1
        assert records[0].c_star == pytest.approx(-2.0, abs=1e-8)
        assert abs(records[0].enhancement) < 1e-10

    def test_oscillation_beats_time_independent(self):
        config = SweepConfig(deltas=(1.0,), freqs=(0, 1), grid=GridSpec(16, 16))
        records = run_sweep(config)
        gains = {r.freq: r.enhancement for r in records}
        assert gains[1] >= gains[0]

    def test_enhancement_grows_with_amplitude(self):
        config = SweepConfig(deltas=(0.25, 0.5, 1.0), freqs=(1,), grid=GridSpec(16, 16))
        records = run_sweep(config)
        gains = [r.enhancement for r in records]
        assert gains[0] < gains[1] < gains[2]
        assert all(g > 0 for g in gains)

    def test_records_invariant(self):
        config = SweepConfig(deltas=(0.5, 1.0), freqs=(1,), grid=GridSpec(16, 16))
        for r in run_sweep(config):
            assert r.enhancement == pytest.approx(-2.0 - r.c_star, abs=1e-12)
            assert r.enhancement >= -1e-10

    def test_writes_output_and_metadata(self, tmp_path):
        out = tmp_path / "records.csv"
        config = SweepConfig(
            deltas=(0.5,), freqs=(1,), grid=GridSpec(16, 16), output_path=str(out)
        )
        records = run_sweep(config)
        assert read_records(out) == records
        meta = json.loads((tmp_path / "records.csv.meta.json").read_text())
        assert meta["fprime0"] == 1.0
        assert meta["warm_start"] is True
        assert "grids" in meta and "tolerances" in meta


class TestFitLoglogSlope:
    def test_exact_square_law(self):
        records = synthetic_records([0.1, 0.2, 0.5, 1.0], exponent=2.0)
        slope = fit_loglog_slope(records, (0.05, 2.0))
        assert slope == pytest.approx(2.0, abs=1e-12)

    def test_exact_linear_law(self):
        records = synthetic_records([10.0, 20.0, 50.0], exponent=1.0)
        assert fit_loglog_slope(records, (5.0, 100.0)) == pytest.approx(1.0, abs=1e-12)

    def test_range_filters_records(self):
        records = synthetic_records([0.1, 0.2, 0.5, 1.0, 10.0], exponent=2.0)
        records[-1] = SweepRecord(10.0, 1, 1.0, -32.0, 30.0, 3, 1e-13)  # off the law
        assert fit_loglog_slope(records, (0.05, 1.0)) == pytest.approx(2.0, abs=1e-12)

    def test_insufficient_data(self):
        records = synthetic_records([0.1, 0.2])
        with pytest.raises(InsufficientDataError):
            fit_loglog_slope(records, (0.05, 1.0))

    def test_nonpositive_enhancement_excluded_with_warning(self):
        records = synthetic_records([0.1, 0.2, 0.5, 1.0])
        records.append(SweepRecord(0.3, 1, 1.0, -2.0, 0.0, 1, 1e-13))
        with pytest.warns(UserWarning, match="nonpositive"):
            slope = fit_loglog_slope(records, (0.05, 1.0))
        assert slope == pytest.approx(2.0, abs=1e-12)


class TestPersistence:
    def test_empty_records_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_records([], path)
        assert path.read_text() == (
            "delta,freq,lambda_star,c_star,enhancement,iterations,residual\n"
        )
        assert read_records(path) == []

    def test_single_record_round_trip(self, tmp_path):
        record = SweepRecord(
            delta=0.1,
            freq=3,
            lambda_star=1.0000000000000002,
            c_star=-2.0001234567890123,
            enhancement=1.234567890123456e-4,
            iterations=7,
            residual=3.141592653589793e-13,
        )
        path = tmp_path / "one.csv"
        write_records([record], path)
        assert read_records(path) == [record]

    def test_sweep_round_trip_25_records(self, tmp_path):
        config = SweepConfig(
            deltas=(0.1, 0.2, 0.4, 0.8, 1.6),
            freqs=(0, 1, 2, 3, 4),
            grid=GridSpec(8, 8),
        )
        records = run_sweep(config)
        assert len(records) == 25
        path = tmp_path / "sweep.csv"
        write_records(records, path)
        assert read_records(path) == records

    def test_deterministic_bytes(self, tmp_path):
        config = SweepConfig(deltas=(0.5, 1.0), freqs=(1,), grid=GridSpec(8, 8))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records(run_sweep(config), p1)
        write_records(run_sweep(config), p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert b"\r" not in p1.read_bytes()

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("delta,freq\n")
        with pytest.raises(RecordParseError) as err:
            read_records(path)
        assert err.value.line_number == 1

    def test_malformed_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "delta,freq,lambda_star,c_star,enhancement,iterations,residual\n"
            "0.1,1,1.0,-2.0,0.0,3,1e-13\n"
            "0.2,one,1.0,-2.0,0.0,3,1e-13\n"
        )
        with pytest.raises(RecordParseError) as err:
            read_records(path)
        assert err.value.line_number == 3

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "delta,freq,lambda_star,c_star,enhancement,iterations,residual\n0.1,1\n"
        )
        with pytest.raises(RecordParseError) as err:
            read_records(path)
        assert err.value.line_number == 2
