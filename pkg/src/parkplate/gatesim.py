"""Simulated parking gate: sensor, camera trigger, barrier, LCD and 7-segment display.

The gate is a state machine over logical milliseconds. Inbound protocol lines
are ``SENSOR VEHICLE`` and ``IMAGE <path>``; outbound lines are ``CAPTURE``,
``BARRIER OPEN <ms>``, ``LCD <text>``, ``SEG7 <amount>``, ``RECEIPT <serial>``
and ``ERR <code>``. Scenario scripts put a tick before each inbound line.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Callable, Iterable, Iterator

from .config import GateConfig
from .errors import ParkplateError, RejectedReading
from .inventory import (Journal, ReceiptPrinter, Tariff, format_cents, record_entry)

LCD_GRANTED = "You Have Permission to go"
LCD_FAILED = "Recognition Failed"


class Phase(enum.Enum):
    IDLE = "IDLE"
    CAPTURING = "CAPTURING"
    RECOGNIZING = "RECOGNIZING"
    BARRIER_OPEN = "BARRIER_OPEN"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class GateState:
    phase: Phase = Phase.IDLE
    remaining: int = 0  # ms left on the barrier or the reject cooldown
    accepted: int = 0  # vehicles let through so far
    daily: tuple[str, int] = ("", 0)  # (UTC date, vehicles that day) for the count display


@dataclass(frozen=True)
class Tick:
    ms: int


@dataclass(frozen=True)
class Inbound:
    line: str


@dataclass
class GateDeps:
    """Everything a transition may touch besides the state itself."""

    recognizer: Callable[[str], object | None]
    tariff: Tariff
    journal: Journal | None = None
    printer: ReceiptPrinter = field(default_factory=ReceiptPrinter)
    clock: Callable[[], datetime] = lambda: datetime(2026, 1, 1, tzinfo=timezone.utc)
    receipts: list = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


_IMAGE = re.compile(r"^IMAGE (\S.*)$")


def _expire(state: GateState, ms: int) -> GateState:
    if state.phase in (Phase.BARRIER_OPEN, Phase.REJECTED):
        left = state.remaining - ms
        if left <= 0:
            return replace(state, phase=Phase.IDLE, remaining=0)
        return replace(state, remaining=left)
    return state


def _recognize(state: GateState, path: str, deps: GateDeps, cfg: GateConfig
               ) -> tuple[GateState, list[str]]:
    try:
        reading = deps.recognizer(path)
    except (OSError, ParkplateError) as exc:
        deps.diagnostics.append(f"recognizer failed on {path}: {exc}")
        reading = None
    record = None
    if reading is not None:
        try:
            record = record_entry(reading, deps.tariff, deps.clock)
        except (RejectedReading, ValueError) as exc:
            deps.diagnostics.append(f"reading rejected for {path}: {exc}")
    if record is None:
        return (replace(state, phase=Phase.REJECTED, remaining=cfg.reject_cooldown_ms),
                [f"LCD {LCD_FAILED}"])
    if deps.journal is not None:
        deps.journal.append(record)
    receipt = deps.printer.issue(record)
    deps.receipts.append(receipt)
    day = record.timestamp.date().isoformat()
    today = state.daily[1] + 1 if state.daily[0] == day else 1
    seg7 = format_cents(record.cost) if cfg.seg7_mode == "cost" else str(today)
    new = GateState(Phase.BARRIER_OPEN, cfg.open_ms, state.accepted + 1, (day, today))
    return new, [f"BARRIER OPEN {cfg.open_ms}", f"LCD {LCD_GRANTED}", f"SEG7 {seg7}",
                 f"RECEIPT {receipt.serial}"]


def step(state: GateState, event: Tick | Inbound, deps: GateDeps,
         cfg: GateConfig | None = None) -> tuple[GateState, list[str]]:
    """One transition; returns the new state and the outbound lines it emits.

    Recognition runs synchronously, so RECOGNIZING is entered and left within
    the ``IMAGE`` step.
    """
    cfg = cfg or GateConfig()
    if isinstance(event, Tick):
        if event.ms < 0:
            raise ValueError("time cannot run backwards")
        return _expire(state, event.ms), []
    line = event.line.rstrip("\r\n")
    if line == "SENSOR VEHICLE":
        if state.phase is Phase.IDLE:
            return replace(state, phase=Phase.CAPTURING), ["CAPTURE"]
        deps.diagnostics.append(f"vehicle sensed while {state.phase.value}; ignored")
        return state, ["ERR BUSY"]
    m = _IMAGE.match(line)
    if m:
        if state.phase is not Phase.CAPTURING:
            deps.diagnostics.append(f"image while {state.phase.value}; ignored")
            return state, ["ERR UNEXPECTED"]
        return _recognize(replace(state, phase=Phase.RECOGNIZING), m.group(1), deps, cfg)
    deps.diagnostics.append(f"unparseable line {line!r}")
    return state, ["ERR SYNTAX"]


class Gate:
    """Stateful wrapper that tracks logical time between inbound lines."""

    def __init__(self, deps: GateDeps, cfg: GateConfig | None = None, start: int = 0):
        self.deps = deps
        self.cfg = cfg or GateConfig()
        self.state = GateState()
        self.now = start

    def advance_to(self, tick: int) -> None:
        if tick < self.now:
            raise ValueError(f"tick {tick} is earlier than current time {self.now}")
        self.state, _ = step(self.state, Tick(tick - self.now), self.deps, self.cfg)
        self.now = tick

    def feed(self, tick: int, line: str) -> list[str]:
        self.advance_to(tick)
        self.state, out = step(self.state, Inbound(line), self.deps, self.cfg)
        return out


class ScriptError(ParkplateError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"script line {line}: {message}")
        self.line = line


_SCRIPT_LINE = re.compile(r"^(\d+) (.+)$")


def parse_script(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    """``<tick> <event>`` lines; blank lines and ``#`` comments are skipped."""
    last = 0
    for n, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _SCRIPT_LINE.match(line)
        if not m:
            raise ScriptError("expected '<tick> <event>'", n)
        tick = int(m.group(1))
        if tick < last:
            raise ScriptError(f"tick {tick} goes backwards", n)
        last = tick
        yield tick, m.group(2)


def run_script(lines: Iterable[str], deps: GateDeps, cfg: GateConfig | None = None,
               epoch: datetime | None = None) -> list[tuple[int, str]]:
    """Replay a scenario; returns the outbound transcript as (tick, line) pairs.

    With ``epoch``, record timestamps are the logical tick after that instant.
    """
    gate = Gate(deps, cfg)
    if epoch is not None:
        deps.clock = tick_clock(gate, epoch)
    transcript = []
    for tick, event in parse_script(lines):
        transcript.extend((tick, out) for out in gate.feed(tick, event))
    return transcript


def format_transcript(transcript: Iterable[tuple[int, str]]) -> str:
    return "".join(f"{tick} {line}\n" for tick, line in transcript)


def tick_clock(gate: Gate, epoch: datetime) -> Callable[[], datetime]:
    """Clock reading the gate's logical time as milliseconds after ``epoch``."""
    return lambda: epoch + timedelta(milliseconds=gate.now)


class StubRecognizer:
    """Recognizer answering from a fixed table; unknown paths are unreadable."""

    def __init__(self, table: dict[str, object]):
        self.table = dict(table)
        self.calls: list[str] = []

    def __call__(self, path: str):
        self.calls.append(path)
        return self.table.get(path)
