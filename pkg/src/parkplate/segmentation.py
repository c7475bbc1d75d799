"""Character segmentation of a deskewed plate into normalized 30x15 glyphs."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .config import SegmentationConfig
from .errors import EmptyGlyph, NoCharacters, ParkplateError
from .features import GLYPH_COLS, GLYPH_ROWS
from .imaging import (ComponentLabeling, Rect, complement, connected_components,
                      luma, opening, threshold_binarize)
from .imgfile import decode_pnm, encode_pnm, ImageFormatError


@dataclass(frozen=True)
class CharacterGlyph:
    bits: np.ndarray  # (30, 15) bool
    index: int = 0
    source_box: Rect = Rect(0, 0, GLYPH_COLS, GLYPH_ROWS)

    def __post_init__(self):
        if self.bits.shape != (GLYPH_ROWS, GLYPH_COLS):
            raise ValueError(f"glyph must be {GLYPH_ROWS}x{GLYPH_COLS}, got {self.bits.shape}")
        if not self.bits.any():
            raise EmptyGlyph("glyph has no foreground pixels")


def clear_border(img: np.ndarray) -> np.ndarray:
    """Drop every foreground component that touches the canvas edge."""
    lab = connected_components(img)
    if lab.count == 0:
        return img.copy()
    edge = np.unique(np.concatenate([lab.labels[0], lab.labels[-1],
                                     lab.labels[:, 0], lab.labels[:, -1]]))
    edge = edge[edge > 0]
    return img & ~np.isin(lab.labels, edge)


def prepare_plate(region, cfg: SegmentationConfig | None = None) -> np.ndarray:
    """Binary image of the plate's character area with glyph strokes as foreground.

    ``region`` is a :class:`~parkplate.localization.PlateRegion` or a bare RGB
    raster. Columns covered by the blue strip are cut off first.
    """
    cfg = cfg or SegmentationConfig()
    pixels = getattr(region, "pixels", region)
    text_x0 = getattr(region, "text_x0", 0)
    crop = pixels[:, text_x0:]
    # the crop edge is not a real boundary: replicate it so the opening does not
    # erase thin background gaps between the edge and a glyph
    bright = np.pad(threshold_binarize(luma(crop)), 2, mode="edge")
    bright = opening(bright)[2:-2, 2:-2]
    strokes = complement(bright)
    if cfg.clear_border:
        strokes = clear_border(strokes)
    return strokes


def pick_glyph_regions(labeling: ComponentLabeling, cfg: SegmentationConfig | None = None
                       ) -> list[tuple[int, Rect]]:
    """(label, box) of character-sized components, ordered left to right."""
    cfg = cfg or SegmentationConfig()
    plate_h, plate_w = labeling.labels.shape
    min_area = cfg.min_char_area_frac * plate_h * plate_w
    min_height = cfg.min_char_height_frac * plate_h
    kept = [(label, box, area)
            for label, (box, area) in enumerate(zip(labeling.boxes, labeling.areas), start=1)
            if area >= min_area and box.h >= min_height]
    if not kept:
        raise NoCharacters("no character-sized component on the plate")
    if len(kept) > cfg.max_chars:
        kept.sort(key=lambda t: (-t[2], t[1].x, t[0]))
        kept = kept[: cfg.max_chars]
    kept.sort(key=lambda t: (t[1].x, t[1].y, t[0]))
    return [(label, box) for label, box, _ in kept]


def resize_nearest(bits: np.ndarray, rows: int = GLYPH_ROWS, cols: int = GLYPH_COLS) -> np.ndarray:
    """Center-aligned nearest-neighbor resampling: output i samples floor((i + .5) * h / rows).

    When shrinking, an edge row or column of the crop can fall between
    samples, so the result does not always touch every side of the frame.
    """
    h, w = bits.shape
    ri = ((2 * np.arange(rows) + 1) * h) // (2 * rows)
    ci = ((2 * np.arange(cols) + 1) * w) // (2 * cols)
    return bits[np.ix_(ri, ci)]


def normalize_glyph(plate: np.ndarray, box: Rect, index: int = 0) -> CharacterGlyph:
    """Crop ``box`` tight to its foreground and resample to 30 rows x 15 columns.

    ``plate`` should hold only the component being normalized; any other
    foreground inside the box would be carried along.
    """
    if box.w <= 0 or box.h <= 0:
        raise EmptyGlyph("empty glyph box")
    crop = np.asarray(plate, dtype=bool)[box.slices()]
    ys, xs = np.nonzero(crop)
    if len(ys) == 0:
        raise EmptyGlyph("glyph box holds no foreground")
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    tight = Rect(box.x + int(x0), box.y + int(y0), int(x1 - x0), int(y1 - y0))
    return CharacterGlyph(resize_nearest(crop[y0:y1, x0:x1]), index, tight)


def segment_binary(strokes: np.ndarray, cfg: SegmentationConfig | None = None,
                   x_offset: int = 0) -> list[CharacterGlyph]:
    labeling = connected_components(strokes)
    glyphs = []
    for i, (label, box) in enumerate(pick_glyph_regions(labeling, cfg)):
        g = normalize_glyph(labeling.labels == label, box, i)
        glyphs.append(CharacterGlyph(g.bits, i, g.source_box.shifted(x_offset, 0)))
    return glyphs


def segment_plate(region, cfg: SegmentationConfig | None = None) -> list[CharacterGlyph]:
    """Ordered glyphs of a plate region; source boxes are in region coordinates."""
    return segment_binary(prepare_plate(region, cfg), cfg, getattr(region, "text_x0", 0))


# -- glyph corpus on disk ---------------------------------------------------

_GLYPH_NAME = re.compile(r"^(?P<label>.+)_(?P<serial>\d+)\.pbm$")


class CorpusError(ParkplateError):
    def __init__(self, path: Path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def write_glyph_corpus(directory: str | Path, samples: Iterable[tuple[str, np.ndarray]]) -> list[Path]:
    """Write ``<label>_<serial>.pbm`` files (15 wide, 30 tall); serials count per label."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    serials: dict[str, int] = {}
    paths = []
    for label, bits in samples:
        n = serials.get(label, 0)
        serials[label] = n + 1
        path = directory / f"{label}_{n:04d}.pbm"
        path.write_bytes(encode_pnm(np.asarray(bits, dtype=bool)))
        paths.append(path)
    return paths


def read_glyph_corpus(directory: str | Path) -> list[tuple[str, np.ndarray]]:
    """Load every glyph file in sorted filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(directory, "not a directory")
    out = []
    for path in sorted(directory.iterdir()):
        if path.is_dir():
            continue
        m = _GLYPH_NAME.match(path.name)
        if not m:
            raise CorpusError(path, "expected <label>_<serial>.pbm")
        try:
            bits = decode_pnm(path.read_bytes())
        except ImageFormatError as exc:
            raise CorpusError(path, str(exc)) from None
        if bits.dtype != bool or bits.shape != (GLYPH_ROWS, GLYPH_COLS):
            raise CorpusError(path, f"expected a {GLYPH_COLS}x{GLYPH_ROWS} P4 bitmap")
        if not bits.any():
            raise CorpusError(path, "glyph is empty")
        out.append((m.group("label"), bits))
    if not out:
        raise CorpusError(directory, "no glyph files")
    return out
