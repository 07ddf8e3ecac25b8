"""Config schema round trips, validation error collection, sweep axes."""

import copy

import pytest

from ponqkd.errors import ConfigError
from ponqkd.scenario import SWEEP_AXES, apply_axis, config_hash, parse_scenario
from ponqkd.scenarios import (
    CAL_EXCESS_LOSS_DB,
    CAL_VISIBILITY,
    bundled_names,
    bundled_scenario,
    downstream_c_channels,
    upstream_c_channels,
)
from ponqkd.topology import path_loss_db


def test_parse_bundled_baseline_fields():
    scn = parse_scenario(bundled_scenario("pon-baseline"))
    assert scn.name == "pon-baseline"
    assert scn.budget_db is None
    assert scn.topology.splitter.port_count == 16
    assert scn.topology.feeder_down.length_km == 13.2
    assert scn.topology.feeder_up.length_km == 15.1
    assert scn.topology.drop.length_km == 1.0
    assert scn.plan.quantum_center_nm == 1310.0
    assert scn.plan.channels == ()
    assert scn.transmitter.visibility == CAL_VISIBILITY
    assert scn.detector.excess_loss_db == CAL_EXCESS_LOSS_DB
    assert scn.detector.monitored_ports == "one"
    assert scn.gate.gate_fraction == 0.30
    assert scn.gate.symbol_period_s == 1e-9
    assert scn.f_ec == 1.45
    assert (scn.run.mode, scn.run.duration_s, scn.run.seed) == ("oracle", 30.0, 7)


def test_quantum_path_loss_property():
    scn = parse_scenario(bundled_scenario("pon-baseline"))
    assert scn.quantum_path_loss_db == pytest.approx(
        path_loss_db(scn.topology, 1310.0), rel=1e-15
    )
    assert scn.quantum_path_loss_db == pytest.approx(17.998199826559247, rel=1e-12)


def test_parse_attenuator_topology():
    raw = bundled_scenario("pon-baseline")
    raw["topology"] = {"kind": "attenuator", "budget_db": 21.5}
    scn = parse_scenario(raw)
    assert scn.topology is None
    assert scn.budget_db == 21.5
    assert scn.quantum_path_loss_db == 21.5


def test_parse_collects_every_error():
    raw = {
        "schema": 99,
        "bogus": {},
        "topology": {"kind": "odn", "port_count": 12},
        "detector": {"efficiency": "high"},
        "run": {"mode": "sideways"},
    }
    with pytest.raises(ConfigError) as exc:
        parse_scenario(raw)
    text = "; ".join(exc.value.errors)
    assert len(exc.value.errors) >= 5
    for fragment in ("schema", "bogus", "port", "efficiency", "mode"):
        assert fragment in text


def test_parse_rejects_non_object():
    with pytest.raises(ConfigError):
        parse_scenario(["schema", 1])


def test_slot_phase_auto_and_null():
    raw = bundled_scenario("pon-baseline")
    raw["gate"]["slot_phase_s"] = "auto"
    assert parse_scenario(raw).gate.slot_phase_s is None
    raw["gate"]["slot_phase_s"] = None
    assert parse_scenario(raw).gate.slot_phase_s is None
    raw["gate"]["slot_phase_s"] = 2.5e-10
    assert parse_scenario(raw).gate.slot_phase_s == 2.5e-10
    raw["gate"]["slot_phase_s"] = "later"
    with pytest.raises(ConfigError):
        parse_scenario(raw)


def test_config_hash_key_order_independent():
    raw = bundled_scenario("pon-baseline")
    reordered = {key: raw[key] for key in reversed(list(raw))}
    assert config_hash(raw) == config_hash(reordered)
    changed = copy.deepcopy(raw)
    changed["detector"]["dark_rate_hz"] = 521.0
    assert config_hash(changed) != config_hash(raw)


def test_apply_axis_budget_db():
    raw = bundled_scenario("b2b-budget-sweep")
    out = apply_axis(raw, "topology.budget_db", 26)
    assert out["topology"]["budget_db"] == 26.0
    assert raw["topology"]["budget_db"] == 18.0  # input dict untouched
    with pytest.raises(ConfigError):
        apply_axis(bundled_scenario("pon-baseline"), "topology.budget_db", 26)


def test_apply_axis_reach_sets_both_feeders():
    out = apply_axis(bundled_scenario("pon-baseline"), "topology.reach_km", 16.0)
    assert out["topology"]["feeder_down_km"] == 15.0
    assert out["topology"]["feeder_up_km"] == 15.0
    with pytest.raises(ConfigError):
        apply_axis(bundled_scenario("pon-baseline"), "topology.reach_km", 0.5)


def test_apply_axis_port_count():
    out = apply_axis(bundled_scenario("pon-baseline"), "topology.splitter.port_count", 32)
    assert parse_scenario(out).topology.splitter.port_count == 32


def test_apply_axis_upstream_count_keeps_plan_order():
    raw = bundled_scenario("pon-baseline")
    raw["channels"]["classical"] = downstream_c_channels()[:2] + upstream_c_channels(4)
    out = apply_axis(raw, "channels.upstream_count", 2)
    kept = out["channels"]["classical"]
    directions = [spec["direction"] for spec in kept]
    assert directions == ["downstream", "downstream", "upstream", "upstream"]
    # first two upstream entries of the original plan survive
    assert [spec["center_nm"] for spec in kept[2:]] == [
        spec["center_nm"] for spec in upstream_c_channels(2)
    ]
    with pytest.raises(ConfigError):
        apply_axis(raw, "channels.upstream_count", 8)


def test_apply_axis_unknown_axis():
    with pytest.raises(ConfigError):
        apply_axis(bundled_scenario("pon-baseline"), "detector.efficiency", 0.2)


def test_sweep_block_validation():
    raw = bundled_scenario("pon-baseline")
    raw["sweep"] = {"axis": "topology.reach_km", "values": [5.0, 10.0]}
    assert parse_scenario(raw).sweep == raw["sweep"]
    raw["sweep"] = {"axis": "detector.efficiency", "values": [0.1]}
    with pytest.raises(ConfigError):
        parse_scenario(raw)
    raw["sweep"] = {"axis": "topology.reach_km", "values": []}
    with pytest.raises(ConfigError):
        parse_scenario(raw)


def test_bundled_library_parses_clean():
    names = bundled_names()
    assert "pon-baseline" in names
    for name in names:
        scn = parse_scenario(bundled_scenario(name))
        assert scn.name == name
    sweep_axes = {
        parse_scenario(bundled_scenario(name)).sweep["axis"]
        for name in names
        if parse_scenario(bundled_scenario(name)).sweep
    }
    assert sweep_axes <= set(SWEEP_AXES)


def test_bundled_scenarios_are_isolated_copies():
    first = bundled_scenario("pon-baseline")
    first["detector"]["dark_rate_hz"] = 0.0
    second = bundled_scenario("pon-baseline")
    assert second["detector"]["dark_rate_hz"] == 520.0
    with pytest.raises(KeyError):
        bundled_scenario("no-such-scenario")
