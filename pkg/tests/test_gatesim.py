from datetime import datetime, timedelta, timezone
from types import SimpleNamespace

import pytest

import gate_scenario
from parkplate.config import GateConfig
from parkplate.gatesim import (LCD_FAILED, LCD_GRANTED, Gate, GateDeps, GateState, Inbound, Phase,
                               ScriptError, StubRecognizer, Tick, parse_script, run_script, step)
from parkplate.inventory import FixedClock, Journal, Tariff, report
from parkplate.platetype import PlateType

CFG = GateConfig()
GOOD = SimpleNamespace(text="12A34567", plate_type=PlateType.YELLOW)


def deps_for(table, **kw):
    return GateDeps(StubRecognizer(table), Tariff.from_config(), **kw)


def drive(deps, events, state=GateState(), cfg=CFG):
    out = []
    for e in events:
        state, lines = step(state, e, deps, cfg)
        out += lines
    return state, out


def test_successful_cycle_emits_the_exact_sequence():
    deps = deps_for({"a.ppm": GOOD})
    state, out = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE a.ppm")])
    assert out == ["CAPTURE", "BARRIER OPEN 5000", "LCD You Have Permission to go", "SEG7 2.00",
                   "RECEIPT 1"]
    assert state.phase is Phase.BARRIER_OPEN and state.remaining == 5000 and state.accepted == 1
    assert len(deps.receipts) == 1 and deps.receipts[0].record.cost == 200


def test_unreadable_image_is_rejected_without_barrier():
    deps = deps_for({})
    state, out = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE nothing.ppm")])
    assert out == ["CAPTURE", f"LCD {LCD_FAILED}"]
    assert state.phase is Phase.REJECTED and state.remaining == CFG.reject_cooldown_ms
    assert deps.receipts == []


def test_empty_reading_text_is_rejected():
    deps = deps_for({"a.ppm": SimpleNamespace(text="", plate_type=PlateType.WHITE)})
    _, out = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE a.ppm")])
    assert out[-1] == f"LCD {LCD_FAILED}" and deps.diagnostics


def test_recognizer_exceptions_become_rejections():
    def broken(path):
        raise OSError("camera offline")
    deps = GateDeps(broken, Tariff.from_config())
    state, out = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE a.ppm")])
    assert state.phase is Phase.REJECTED and "camera offline" in deps.diagnostics[0]


def test_barrier_expires_back_to_idle():
    deps = deps_for({"a.ppm": GOOD})
    state, _ = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE a.ppm")])
    state, _ = step(state, Tick(4999), deps, CFG)
    assert state.phase is Phase.BARRIER_OPEN and state.remaining == 1
    state, out = step(state, Tick(1), deps, CFG)
    assert state.phase is Phase.IDLE and out == []


def test_reject_cooldown_expires():
    deps = deps_for({})
    state, _ = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE x")])
    state, _ = step(state, Tick(CFG.reject_cooldown_ms), deps, CFG)
    assert state.phase is Phase.IDLE


def test_vehicle_while_busy_is_ignored():
    deps = deps_for({"a.ppm": GOOD})
    state, _ = drive(deps, [Inbound("SENSOR VEHICLE"), Inbound("IMAGE a.ppm")])
    again, out = step(state, Inbound("SENSOR VEHICLE"), deps, CFG)
    assert out == ["ERR BUSY"] and again == state and deps.diagnostics


def test_unexpected_and_malformed_lines():
    deps = deps_for({})
    assert step(GateState(), Inbound("IMAGE a.ppm"), deps, CFG)[1] == ["ERR UNEXPECTED"]
    for line in ("HELLO", "IMAGE", "sensor vehicle", ""):
        assert step(GateState(), Inbound(line), deps, CFG)[1] == ["ERR SYNTAX"]
    with pytest.raises(ValueError):
        step(GateState(), Tick(-1), deps, CFG)


def test_barrier_opens_only_after_a_recognition():
    deps = deps_for({"cars/v01.ppm": GOOD})
    gate = Gate(deps)
    events = ["IMAGE cars/v01.ppm", "SENSOR VEHICLE", "SENSOR VEHICLE", "IMAGE cars/v01.ppm",
              "IMAGE cars/v01.ppm"]
    opened = 0
    for t, e in enumerate(events):
        out = gate.feed(t * 10, e)
        opened += sum(line.startswith("BARRIER OPEN") for line in out)
    assert opened == 1 == len(deps.receipts)


def test_count_display_mode_counts_per_day():
    clock = FixedClock(datetime(2026, 5, 1, 23, 59, 58, tzinfo=timezone.utc), timedelta(seconds=1))
    deps = deps_for({"a": GOOD}, clock=clock)
    cfg = GateConfig(seg7_mode="count", open_ms=10)
    gate = Gate(deps, cfg)
    shown = []
    for i in range(3):
        out = gate.feed(i * 100, "SENSOR VEHICLE") + gate.feed(i * 100 + 1, "IMAGE a")
        shown += [line for line in out if line.startswith("SEG7")]
    assert shown == ["SEG7 1", "SEG7 2", "SEG7 1"]  # the third car arrives after midnight


def test_script_parsing():
    lines = ["# comment", "", "0 SENSOR VEHICLE", "10 IMAGE a b.ppm"]
    assert list(parse_script(lines)) == [(0, "SENSOR VEHICLE"), (10, "IMAGE a b.ppm")]
    with pytest.raises(ScriptError) as info:
        list(parse_script(["5 SENSOR VEHICLE", "4 SENSOR VEHICLE"]))
    assert info.value.line == 2
    with pytest.raises(ScriptError):
        list(parse_script(["SENSOR VEHICLE"]))


def test_golden_scenario_transcript(tmp_path):
    text, deps = gate_scenario.run(tmp_path / "journal.log")
    assert text == gate_scenario.TRANSCRIPT.read_text(encoding="utf-8")
    assert text.count(f"LCD {LCD_GRANTED}\n") == 15 and text.count(f"LCD {LCD_FAILED}\n") == 5
    records = Journal(tmp_path / "journal.log").read_all()
    assert len(records) == 15 == len(deps.receipts)
    assert [r.serial for r in deps.receipts] == list(range(1, 16))
    assert [r.record for r in deps.receipts] == records
    start, end = gate_scenario.EPOCH, gate_scenario.EPOCH + timedelta(days=1)
    assert report(records, start, end).revenue == sum(r.cost for r in records)


def test_replay_is_bit_identical():
    assert gate_scenario.run()[0] == gate_scenario.run()[0]


def test_record_times_follow_logical_ticks():
    deps = deps_for({"a": GOOD})
    epoch = datetime(2026, 1, 1, tzinfo=timezone.utc)
    run_script(["0 SENSOR VEHICLE", "61000 IMAGE a"], deps, epoch=epoch)
    assert deps.receipts[0].record.timestamp == epoch + timedelta(seconds=61)
