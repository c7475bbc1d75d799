"""Directional chain-code features of normalized character glyphs.

Each glyph (30 rows x 15 columns) is traced along the outer boundary of each of
its 8-connected components. Every chain move is tallied into one of 120 bins:
the 5x3 grid of 6x5-pixel zones times the 8 Freeman directions
(0=E, 1=NE, 2=N, 3=NW, 4=W, 5=SW, 6=S, 7=SE).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGlyph
from .imaging import Rect, connected_components

GLYPH_ROWS = 30
GLYPH_COLS = 15
ZONE_ROWS = 6
ZONE_COLS = 5
ZONES_DOWN = GLYPH_ROWS // ZONE_ROWS
ZONES_ACROSS = GLYPH_COLS // ZONE_COLS
N_DIRECTIONS = 8
N_FEATURES = ZONES_DOWN * ZONES_ACROSS * N_DIRECTIONS  # 120

# (dx, dy) with y growing downwards
DIRECTIONS = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))
_DIR_INDEX = {v: i for i, v in enumerate(DIRECTIONS)}
# After moving in direction d, the last background neighbor examined was at
# direction d + 1 of the old pixel; seen from the new pixel that is:
_BACKTRACK = tuple(
    _DIR_INDEX[(DIRECTIONS[(d + 1) % 8][0] - DIRECTIONS[d][0],
                DIRECTIONS[(d + 1) % 8][1] - DIRECTIONS[d][1])]
    for d in range(8)
)
_WEST = 4


@dataclass
class Contour:
    start: tuple[int, int]  # (x, y)
    moves: list[int] = field(default_factory=list)
    closed: bool = True

    def pixels(self) -> list[tuple[int, int]]:
        x, y = self.start
        out = [(x, y)]
        for d in self.moves:
            dx, dy = DIRECTIONS[d]
            x, y = x + dx, y + dy
            out.append((x, y))
        return out


def _bits(glyph) -> np.ndarray:
    return np.asarray(getattr(glyph, "bits", glyph), dtype=bool)


def bounding_box(glyph) -> Rect:
    bits = _bits(glyph)
    ys, xs = np.nonzero(bits)
    if len(xs) == 0:
        raise EmptyGlyph("glyph has no foreground pixels")
    x0, y0 = int(xs.min()), int(ys.min())
    return Rect(x0, y0, int(xs.max()) - x0 + 1, int(ys.max()) - y0 + 1)


def _next_move(mask: np.ndarray, x: int, y: int, back: int) -> int | None:
    h, w = mask.shape
    for i in range(1, 9):
        d = (back - i) % 8  # clockwise on screen
        dx, dy = DIRECTIONS[d]
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and mask[ny, nx]:
            return d
    return None


def trace_boundary(mask: np.ndarray, start: tuple[int, int]) -> Contour:
    """Moore-neighbor trace of the component containing ``start``.

    ``start`` must be the topmost-then-leftmost pixel of its component so its
    west neighbor is background. Tracing stops when the start pixel is re-entered
    in a state that would repeat the first move.
    """
    mask = np.asarray(mask, dtype=bool)
    x, y = start
    d = _next_move(mask, x, y, _WEST)
    contour = Contour(start=(x, y))
    if d is None:
        return contour
    first = d
    limit = 4 * int(mask.sum()) + 8
    while True:
        contour.moves.append(d)
        dx, dy = DIRECTIONS[d]
        x, y = x + dx, y + dy
        back = _BACKTRACK[d]
        d = _next_move(mask, x, y, back)
        if (x, y) == start and d == first:
            break
        if len(contour.moves) > limit:  # pragma: no cover - defensive
            contour.closed = False
            break
    return contour


def trace_contours(glyph) -> list[Contour]:
    """One clockwise outer contour per 8-connected component, in raster order."""
    bits = _bits(glyph)
    labeling = connected_components(bits)
    if labeling.count == 0:
        raise EmptyGlyph("glyph has no foreground pixels")
    contours = []
    for label, box in enumerate(labeling.boxes, start=1):
        mask = labeling.labels == label
        row = mask[box.y]
        x0 = int(np.argmax(row))
        contours.append(trace_boundary(mask, (x0, box.y)))
    return contours


def chain_code_features(glyph, normalize: bool = False) -> np.ndarray:
    """120-entry zone x direction histogram of chain moves.

    Raw integer counts by default; ``normalize=True`` divides by the total move
    count (a glyph with no moves stays all zero).
    """
    bits = _bits(glyph)
    if bits.shape != (GLYPH_ROWS, GLYPH_COLS):
        raise ValueError(f"glyph must be {GLYPH_ROWS}x{GLYPH_COLS}, got {bits.shape}")
    counts = np.zeros(N_FEATURES, dtype=np.int64)
    for contour in trace_contours(bits):
        x, y = contour.start
        for d in contour.moves:
            zone = (y // ZONE_ROWS) * ZONES_ACROSS + x // ZONE_COLS
            counts[zone * N_DIRECTIONS + d] += 1
            dx, dy = DIRECTIONS[d]
            x, y = x + dx, y + dy
    if normalize:
        total = counts.sum()
        return counts / total if total else counts.astype(np.float64)
    return counts


def format_feature_line(label: str, features: Sequence) -> str:
    return label + " " + " ".join(_fmt(v) for v in features)


def _fmt(v) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def dump_features(rows: Iterable[tuple[str, Sequence]]) -> str:
    """Debug dump: one line per glyph, label then the 120 values."""
    return "".join(format_feature_line(label, feats) + "\n" for label, feats in rows)
