"""Orchestration: single runs, sweeps, report emission, calibration."""

import json

import pytest

from ponqkd.errors import CalibrationError, ConfigError
from ponqkd.runner import (
    SWEEP_COLUMNS,
    VERSION,
    calibrate,
    emit_report,
    run_scenario,
    run_sweep,
    sweep_csv,
    sweep_rows,
)
from ponqkd.scenario import parse_scenario
from ponqkd.scenarios import CAL_RAMAN_SCALE, CAL_VISIBILITY, bundled_scenario


def scenario(name):
    return parse_scenario(bundled_scenario(name))


def monte_carlo_raw(duration_s=0.5, seed=3):
    raw = bundled_scenario("pon-baseline")
    raw["run"] = {"mode": "monte_carlo", "duration_s": duration_s, "seed": seed}
    return raw


def test_oracle_baseline_hits_calibration_anchors():
    res = run_scenario(scenario("pon-baseline"))
    assert res.mode == "oracle"
    assert res.seed is None
    assert res.path_loss_db == pytest.approx(17.998199826559247, rel=1e-12)
    assert res.raman.total_at_receiver == 0.0
    assert res.qber_report.raw_rate == pytest.approx(2700.0, rel=1e-9)
    assert res.qber_report.qber == pytest.approx(0.0377, abs=1e-9)
    assert res.keyrate_report.secure_rate == pytest.approx(486.934762258637, rel=1e-9)
    assert res.dark_rate_hz == 520.0
    assert len(res.config_hash) == 16


def test_oracle_single_upstream_hits_raman_anchor():
    res = run_scenario(scenario("pon-us-1"))
    assert res.raman.total_at_receiver == pytest.approx(360.0, rel=1e-9)
    assert res.raman.upstream_copropagating > 0.0


def test_mode_override_wins_over_config():
    res = run_scenario(parse_scenario(monte_carlo_raw()), mode="oracle")
    assert res.mode == "oracle"
    assert res.seed is None


def test_monte_carlo_bit_identical_per_seed():
    scn = parse_scenario(monte_carlo_raw(duration_s=1.0, seed=5))
    first = run_scenario(scn)
    second = run_scenario(scn)
    assert first.seed == second.seed == 5
    assert first.qber_report == second.qber_report
    other = run_scenario(scn, seed=6)
    assert other.qber_report != first.qber_report


def test_run_sweep_uses_config_sweep_in_order():
    scn = scenario("b2b-budget-sweep")
    values = scn.sweep["values"]
    results = run_sweep(scn)
    assert len(results) == len(values)
    assert [r.path_loss_db for r in results] == list(values)


def test_run_sweep_explicit_axis_overrides():
    scn = scenario("pon-baseline")
    results = run_sweep(scn, axis="topology.splitter.port_count", values=[8, 16, 32])
    # splitter loss steps by 3.01 dB per doubling
    losses = [r.path_loss_db for r in results]
    assert losses[1] - losses[0] == pytest.approx(3.0102999566398116, rel=1e-9)
    assert losses[2] - losses[1] == pytest.approx(3.0102999566398116, rel=1e-9)


def test_run_sweep_scheduling_independent():
    raw = monte_carlo_raw(duration_s=0.2, seed=11)
    scn = parse_scenario(raw)
    values = [14.0, 16.0, 18.0]
    serial = run_sweep(scn, axis="topology.reach_km", values=values, workers=1)
    threaded = run_sweep(scn, axis="topology.reach_km", values=values, workers=3)
    assert [r.qber_report for r in serial] == [r.qber_report for r in threaded]


def test_run_sweep_without_sweep_section():
    scn = scenario("pon-baseline")
    with pytest.raises(ConfigError):
        run_sweep(scn)
    with pytest.raises(ConfigError):
        run_sweep(scn, axis="topology.reach_km", values=[])


def test_sweep_table_rendering():
    scn = scenario("pon-baseline")
    values = [10.0, 16.0]
    results = run_sweep(scn, axis="topology.reach_km", values=values)
    rows = sweep_rows(values, results)
    assert [row["axis_value"] for row in rows] == values
    assert all(set(row) == set(SWEEP_COLUMNS) for row in rows)
    text = sweep_csv(values, results)
    lines = text.splitlines()
    assert lines[0] == "axis_value,path_loss_db,raman_counts_s,dark_counts_s,raw_rate_bs,qber,secure_rate_bs,secure_bits_per_pulse"
    assert len(lines) == 1 + len(values)
    assert lines[1].split(",")[0] == repr(10.0)
    assert text.endswith("\n")


def test_emit_report_deterministic():
    res = run_scenario(scenario("pon-baseline"))
    first = emit_report(res)
    assert first == emit_report(res)
    payload = json.loads(first)
    assert payload["toolkit_version"] == VERSION
    assert payload["scenario"] == "pon-baseline"
    assert payload["qber"]["raw_rate"] == pytest.approx(2700.0, rel=1e-9)
    assert payload["link"]["total_rate"] > 0.0
    pair = json.loads(emit_report([res, res]))
    assert isinstance(pair, list) and len(pair) == 2


def test_emit_report_csv_and_bad_format():
    res = run_scenario(scenario("pon-baseline"))
    lines = emit_report(res, fmt="csv").splitlines()
    assert lines[0] == "scenario,mode,path_loss_db,raw_rate_bs,qber,secure_rate_bs"
    assert lines[1].startswith("pon-baseline,oracle,")
    with pytest.raises(ValueError):
        emit_report(res, fmt="yaml")
    with pytest.raises(ValueError):
        emit_report([], fmt="json")


def test_calibrate_recovers_raman_scale():
    raw = bundled_scenario("pon-us-1")
    raw["raman"]["scale"] = 1.0
    result, fitted = calibrate(raw, "raman.scale", "raman_total", 360.0)
    assert result.value == pytest.approx(CAL_RAMAN_SCALE, rel=1e-6)
    assert abs(result.residual) < 1e-6
    assert result.observable == "raman_total"
    assert result.target == 360.0
    assert result.iterations >= 1
    assert fitted["raman"]["scale"] == result.value


def test_calibrate_recovers_visibility():
    raw = bundled_scenario("pon-baseline")
    raw["transmitter"]["visibility"] = 0.95
    result, fitted = calibrate(raw, "transmitter.visibility", "qber", 0.0377)
    assert result.value == pytest.approx(CAL_VISIBILITY, rel=1e-6)
    assert fitted["transmitter"]["visibility"] == result.value


def test_calibrate_unreachable_target_reports_bracket():
    raw = bundled_scenario("pon-baseline")
    with pytest.raises(CalibrationError) as exc:
        calibrate(raw, "transmitter.visibility", "qber", 0.9)
    message = str(exc.value)
    assert "no sign change" in message
    assert "transmitter.visibility" in message
    assert "0.9" in message


def test_calibrate_rejects_unknown_names():
    raw = bundled_scenario("pon-baseline")
    with pytest.raises(ConfigError):
        calibrate(raw, "detector.efficiency", "qber", 0.03)
    with pytest.raises(ConfigError):
        calibrate(raw, "raman.scale", "secure_rate", 400.0)
