"""The 20-vehicle gate scenario shared by the gate tests and the acceptance suite."""
from datetime import datetime, timezone
from pathlib import Path
from types import SimpleNamespace

from parkplate.gatesim import GateDeps, StubRecognizer, format_transcript, run_script
from parkplate.inventory import Journal, ReceiptPrinter, Tariff
from parkplate.platetype import PlateType

GOLDEN = Path(__file__).parent / "golden"
SCRIPT = GOLDEN / "gate_scenario.txt"
TRANSCRIPT = GOLDEN / "gate_transcript.txt"
EPOCH = datetime(2026, 1, 1, 8, 0, 0, tzinfo=timezone.utc)
UNREADABLE = {4, 8, 11, 15, 19}
KINDS = [PlateType.WHITE, PlateType.YELLOW, PlateType.RED]


def readings() -> dict[str, SimpleNamespace]:
    table = {}
    for i in range(1, 21):
        if i not in UNREADABLE:
            table[f"cars/v{i:02d}.ppm"] = SimpleNamespace(text=f"{i:02d}A{1000 + 37 * i:05d}",
                                                          plate_type=KINDS[i % 3])
    return table


def scenario_lines() -> list[str]:
    lines = ["# 20 vehicles, one every 6 s; v04 v08 v11 v15 v19 are unreadable"]
    for i in range(1, 21):
        t = (i - 1) * 6000
        lines += [f"{t} SENSOR VEHICLE", f"{t + 150} IMAGE cars/v{i:02d}.ppm"]
    return lines


def run(journal_path=None):
    """Replay the golden script; returns (transcript text, deps)."""
    deps = GateDeps(StubRecognizer(readings()), Tariff.from_config(),
                    Journal(journal_path) if journal_path else None, ReceiptPrinter())
    lines = SCRIPT.read_text(encoding="utf-8").splitlines()
    return format_transcript(run_script(lines, deps, epoch=EPOCH)), deps
