"""Regenerate the PBM font masters in src/parkplate/data/font/.

Glyphs are polylines in a unit box (x right, y down) stroked with a round pen.
Run from the repository root:  python3 tools/make_font.py
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from parkplate.imgfile import encode_pnm

ROWS, COLS = 120, 60
PEN = 6.5  # pen radius in master pixels
OUT = Path(__file__).resolve().parents[1] / "src" / "parkplate" / "data" / "font"


def arc(cx, cy, rx, ry, a0, a1, n=40):
    """Points on an ellipse; angles in degrees, 90 = top, counterclockwise on screen."""
    return [(cx + rx * math.cos(math.radians(a)), cy - ry * math.sin(math.radians(a)))
            for a in np.linspace(a0, a1, n)]


def line(*pts):
    return list(pts)


GLYPHS: dict[str, list[list[tuple[float, float]]]] = {
    "0": [arc(0.5, 0.5, 0.5, 0.5, 0, 360, 72)],
    "1": [line((0.2, 0.22), (0.6, 0.0), (0.6, 1.0)), line((0.2, 1.0), (1.0, 1.0))],
    "2": [arc(0.5, 0.27, 0.48, 0.27, 165, -40) + [(0.0, 1.0), (1.0, 1.0)]],
    "3": [arc(0.5, 0.25, 0.45, 0.25, 160, -90), arc(0.5, 0.74, 0.5, 0.26, 90, -160)],
    "4": [line((0.72, 1.0), (0.72, 0.0), (0.0, 0.7), (1.0, 0.7))],
    "5": [line((0.95, 0.0), (0.12, 0.0), (0.08, 0.44)) + arc(0.5, 0.68, 0.48, 0.32, 145, -150)],
    "6": [arc(0.5, 0.5, 0.48, 0.5, 55, 180) + [(0.02, 0.72)], arc(0.5, 0.72, 0.48, 0.28, 0, 360, 60)],
    "7": [line((0.0, 0.0), (1.0, 0.0), (0.35, 1.0))],
    "8": [arc(0.5, 0.22, 0.34, 0.22, 0, 360, 60), arc(0.5, 0.72, 0.5, 0.28, 0, 360, 60)],
    "9": [arc(0.5, 0.28, 0.48, 0.28, 0, 360, 60), [(0.98, 0.28), (0.98, 0.5)] + arc(0.5, 0.5, 0.48, 0.5, 0, -125)],
    "A": [line((0.0, 1.0), (0.5, 0.0), (1.0, 1.0)), line((0.22, 0.62), (0.78, 0.62))],
    "B": [line((0.0, 0.0), (0.0, 1.0)),
          [(0.0, 0.0), (0.35, 0.0)] + arc(0.35, 0.23, 0.42, 0.23, 90, -90) + [(0.0, 0.46)],
          [(0.0, 0.46), (0.4, 0.46)] + arc(0.4, 0.73, 0.6, 0.27, 90, -90) + [(0.0, 1.0)]],
    "C": [arc(0.55, 0.5, 0.55, 0.5, 50, 310)],
    "D": [line((0.0, 0.0), (0.0, 1.0)),
          [(0.0, 0.0), (0.35, 0.0)] + arc(0.35, 0.5, 0.65, 0.5, 90, -90) + [(0.0, 1.0)]],
    "E": [line((1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)), line((0.0, 0.5), (0.8, 0.5))],
    "F": [line((1.0, 0.0), (0.0, 0.0), (0.0, 1.0)), line((0.0, 0.5), (0.8, 0.5))],
    "H": [line((0.0, 0.0), (0.0, 1.0)), line((1.0, 0.0), (1.0, 1.0)), line((0.0, 0.5), (1.0, 0.5))],
    "J": [line((0.3, 0.0), (1.0, 0.0)), [(0.78, 0.0), (0.78, 0.68)] + arc(0.41, 0.68, 0.37, 0.32, 0, -180)],
    "K": [line((0.0, 0.0), (0.0, 1.0)), line((1.0, 0.0), (0.0, 0.58)), line((0.32, 0.4), (1.0, 1.0))],
    "L": [line((0.0, 0.0), (0.0, 1.0), (1.0, 1.0))],
    "M": [line((0.0, 1.0), (0.0, 0.0), (0.5, 0.62), (1.0, 0.0), (1.0, 1.0))],
    "N": [line((0.0, 1.0), (0.0, 0.0), (1.0, 1.0), (1.0, 0.0))],
    "P": [[(0.0, 1.0), (0.0, 0.0), (0.6, 0.0)] + arc(0.6, 0.27, 0.4, 0.27, 90, -90) + [(0.0, 0.54)]],
    "R": [[(0.0, 1.0), (0.0, 0.0), (0.6, 0.0)] + arc(0.6, 0.27, 0.4, 0.27, 90, -90) + [(0.0, 0.54)],
          line((0.45, 0.54), (1.0, 1.0))],
    "T": [line((0.0, 0.0), (1.0, 0.0)), line((0.5, 0.0), (0.5, 1.0))],
    "U": [[(0.0, 0.0)] + arc(0.5, 0.65, 0.5, 0.35, 180, 360) + [(1.0, 0.0)]],
    "V": [line((0.0, 0.0), (0.5, 1.0), (1.0, 0.0))],
    "W": [line((0.0, 0.0), (0.25, 1.0), (0.5, 0.35), (0.75, 1.0), (1.0, 0.0))],
    "X": [line((0.0, 0.0), (1.0, 1.0)), line((1.0, 0.0), (0.0, 1.0))],
    "Y": [line((0.0, 0.0), (0.5, 0.5), (1.0, 0.0)), line((0.5, 0.5), (0.5, 1.0))],
}


def _seg_dist(px, py, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / L2, 0, 1) if L2 else np.zeros_like(px)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def render(strokes) -> np.ndarray:
    ys, xs = np.mgrid[0:ROWS, 0:COLS] + 0.5
    ink = np.zeros((ROWS, COLS), dtype=bool)
    sx, sy = COLS - 2 * PEN, ROWS - 2 * PEN
    for poly in strokes:
        pts = [(PEN + x * sx, PEN + y * sy) for x, y in poly]
        for a, b in zip(pts, pts[1:]):
            ink |= _seg_dist(xs, ys, a, b) <= PEN
    return ink


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for label, strokes in GLYPHS.items():
        (OUT / f"{label}.pbm").write_bytes(encode_pnm(render(strokes)))
    print(f"wrote {len(GLYPHS)} masters to {OUT}")


if __name__ == "__main__":
    main()
