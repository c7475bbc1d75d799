"""Regenerate the frozen golden files under tests/golden/.

Run only when a format change is intended; the tests compare against these bytes.
"""
import sys
from datetime import datetime, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from gate_scenario import SCRIPT, TRANSCRIPT, run, scenario_lines  # noqa: E402
from parkplate.inventory import ParkingRecord, render_receipt  # noqa: E402
from parkplate.platetype import PlateType  # noqa: E402


def main():
    record = ParkingRecord("12A34567", PlateType.YELLOW,
                           datetime(2026, 3, 14, 9, 26, 53, tzinfo=timezone.utc), 200)
    (ROOT / "tests" / "golden" / "receipt.txt").write_text(render_receipt(record, 7).rendered,
                                                         encoding="utf-8")
    SCRIPT.write_text("\n".join(scenario_lines()) + "\n", encoding="utf-8")
    text, _ = run()
    TRANSCRIPT.write_text(text, encoding="utf-8")


if __name__ == "__main__":
    main()
