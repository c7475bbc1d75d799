"""Parking records: entrance charges, the append-only journal, receipts, reports.

Money is held as integer minor units (cents) and only formatted with two
decimals at the edges, so no float ever touches a cost.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol

from .config import TariffConfig
from .errors import InvalidRange, JournalCorrupt, RejectedReading
from .platetype import PlateType

JOURNAL_VERSION = "v1"
TIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

_TIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_COST_RE = re.compile(r"^(0|[1-9]\d*)\.\d{2}$")
_FORBIDDEN = re.compile(r"[|\s]")


def to_cents(amount: Decimal | str | int) -> int:
    """Exact conversion of a currency amount with at most two decimals."""
    d = Decimal(str(amount)) if not isinstance(amount, Decimal) else amount
    cents = d * 100
    if cents != cents.to_integral_value():
        raise ValueError(f"amount {amount} has more than two decimals")
    return int(cents)


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def format_time(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(TIME_FORMAT)


def parse_time(text: str) -> datetime:
    if not _TIME_RE.match(text):
        raise ValueError(f"bad timestamp {text!r}")
    return datetime.strptime(text, TIME_FORMAT).replace(tzinfo=timezone.utc)


def _utc_seconds(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return ts.astimezone(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class ParkingRecord:
    plate_text: str
    plate_type: PlateType
    timestamp: datetime  # UTC, whole seconds
    cost: int  # minor units

    def __post_init__(self):
        if not self.plate_text or _FORBIDDEN.search(self.plate_text):
            raise ValueError(f"invalid plate text {self.plate_text!r}")
        if self.cost < 0:
            raise ValueError("cost must be non-negative")
        object.__setattr__(self, "plate_type", PlateType(self.plate_type))
        object.__setattr__(self, "timestamp", _utc_seconds(self.timestamp))

    @property
    def amount(self) -> Decimal:
        return Decimal(self.cost).scaleb(-2)


@dataclass(frozen=True)
class Tariff:
    costs: Mapping[PlateType, int]

    def __post_init__(self):
        costs = {PlateType(k): int(v) for k, v in self.costs.items()}
        missing = set(PlateType) - set(costs)
        if missing:
            raise ValueError(f"tariff lacks {sorted(t.value for t in missing)}")
        if any(v < 0 for v in costs.values()):
            raise ValueError("tariff costs must be non-negative")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_config(cls, cfg: TariffConfig | None = None) -> "Tariff":
        cfg = cfg or TariffConfig()
        return cls({PlateType.WHITE: to_cents(cfg.white), PlateType.YELLOW: to_cents(cfg.yellow),
                    PlateType.RED: to_cents(cfg.red)})

    def __getitem__(self, kind: PlateType) -> int:
        return self.costs[PlateType(kind)]


class Reading(Protocol):
    text: str
    plate_type: PlateType


def record_entry(reading: Reading, tariff: Tariff, clock: Callable[[], datetime]) -> ParkingRecord:
    """Charge one entrance; the clock is injected so records are reproducible."""
    text = getattr(reading, "text", "")
    if not text:
        raise RejectedReading("reading has no text")
    if _FORBIDDEN.search(text):
        raise RejectedReading(f"plate text {text!r} contains a separator or whitespace")
    kind = PlateType(reading.plate_type)
    return ParkingRecord(text, kind, clock(), tariff[kind])


class FixedClock:
    """Clock that starts at ``start`` and advances ``step`` on every call."""

    def __init__(self, start: datetime, step: timedelta = timedelta(0)):
        self._now = start
        self._step = step

    def __call__(self) -> datetime:
        now = self._now
        self._now = now + self._step
        return now

    def set(self, now: datetime) -> None:
        self._now = now


# -- journal --------------------------------------------------------------------

def format_record(record: ParkingRecord) -> str:
    return "|".join([JOURNAL_VERSION, format_time(record.timestamp), record.plate_text,
                     record.plate_type.value, format_cents(record.cost)])


def parse_record(line: str, lineno: int = 1) -> ParkingRecord:
    fields = line.split("|")
    if len(fields) != 5:
        raise JournalCorrupt(f"expected 5 fields, found {len(fields)}", lineno)
    version, stamp, text, kind, cost = fields
    if version != JOURNAL_VERSION:
        raise JournalCorrupt(f"unknown record version {version!r}", lineno)
    try:
        ts = parse_time(stamp)
    except ValueError as exc:
        raise JournalCorrupt(str(exc), lineno) from None
    try:
        ptype = PlateType(kind)
    except ValueError:
        raise JournalCorrupt(f"unknown plate type {kind!r}", lineno) from None
    if not _COST_RE.match(cost):
        raise JournalCorrupt(f"bad cost {cost!r}", lineno)
    try:
        return ParkingRecord(text, ptype, ts, to_cents(cost))
    except ValueError as exc:
        raise JournalCorrupt(str(exc), lineno) from None


class Journal:
    """Append-only record file, one LF-terminated UTF-8 line per record."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: ParkingRecord) -> None:
        with self.path.open("a", encoding="utf-8", newline="") as fh:
            fh.write(format_record(record) + "\n")

    def read_all(self) -> list[ParkingRecord]:
        if not self.path.exists():
            return []
        data = self.path.read_bytes()
        if not data:
            return []
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise JournalCorrupt("not valid UTF-8", data[: exc.start].count(b"\n") + 1) from None
        lines = text.split("\n")
        if lines[-1] != "":
            raise JournalCorrupt("last record is not LF-terminated (truncated?)", len(lines))
        return [parse_record(line, i) for i, line in enumerate(lines[:-1], start=1)]


def append_record(journal: Journal, record: ParkingRecord) -> None:
    journal.append(record)


def read_all(journal: Journal) -> list[ParkingRecord]:
    return journal.read_all()


# -- receipts -------------------------------------------------------------------

RECEIPT_TEMPLATE = (
    "PARKING ENTRANCE RECEIPT\n"
    "Serial: {serial:06d}\n"
    "Plate:  {plate}\n"
    "Type:   {kind} ({category})\n"
    "Time:   {time}\n"
    "Cost:   {cost}\n"
)


@dataclass(frozen=True)
class Receipt:
    record: ParkingRecord
    serial: int
    rendered: str


def render_receipt(record: ParkingRecord, serial: int) -> Receipt:
    text = RECEIPT_TEMPLATE.format(serial=serial, plate=record.plate_text, kind=record.plate_type.value,
                                   category=record.plate_type.category,
                                   time=format_time(record.timestamp), cost=format_cents(record.cost))
    return Receipt(record, serial, text)


class ReceiptPrinter:
    """Hands out receipts with serials increasing by one from ``first``."""

    def __init__(self, first: int = 1):
        self.next_serial = first

    def issue(self, record: ParkingRecord) -> Receipt:
        receipt = render_receipt(record, self.next_serial)
        self.next_serial += 1
        return receipt


# -- reports --------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    plate_type: PlateType
    count: int
    revenue: int


@dataclass(frozen=True)
class Summary:
    start: datetime
    end: datetime
    rows: tuple[SummaryRow, ...]

    @property
    def count(self) -> int:
        return sum(r.count for r in self.rows)

    @property
    def revenue(self) -> int:
        return sum(r.revenue for r in self.rows)

    def table(self) -> str:
        lines = [f"Records from {format_time(self.start)} to {format_time(self.end)}",
                 "type | category | count | revenue"]
        for r in self.rows:
            lines.append(f"{r.plate_type.value} | {r.plate_type.category} | {r.count} | "
                         f"{format_cents(r.revenue)}")
        lines.append(f"total | - | {self.count} | {format_cents(self.revenue)}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "from": format_time(self.start),
            "to": format_time(self.end),
            "rows": [{"type": r.plate_type.value, "count": r.count, "revenue": format_cents(r.revenue)}
                     for r in self.rows],
            "count": self.count,
            "revenue": format_cents(self.revenue),
        }


def report(records: Iterable[ParkingRecord], start: datetime, end: datetime) -> Summary:
    """Counts and revenue per plate type for timestamps in ``[start, end)``."""
    start, end = _utc_seconds(start), _utc_seconds(end)
    if start > end:
        raise InvalidRange(f"range start {format_time(start)} is after end {format_time(end)}")
    counts: dict[PlateType, list[int]] = {}
    for rec in records:
        if start <= rec.timestamp < end:
            acc = counts.setdefault(rec.plate_type, [0, 0])
            acc[0] += 1
            acc[1] += rec.cost
    rows = tuple(SummaryRow(t, *counts[t]) for t in PlateType if t in counts)
    return Summary(start, end, rows)
