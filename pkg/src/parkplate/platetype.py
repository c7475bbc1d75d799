"""Plate category from background color votes (public / government / private)."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import HueBand, PlateTypeConfig
from .errors import UnknownPlateType
from .imaging import as_raster, rgb_to_hsv_image


class PlateType(str, Enum):
    RED = "Red"
    YELLOW = "Yellow"
    WHITE = "White"

    @property
    def category(self) -> str:
        return {"Red": "Government", "Yellow": "Public", "White": "Private"}[self.value]


@dataclass(frozen=True)
class PlateTypeHistogram:
    red_votes: int
    yellow_votes: int
    white_votes: int
    unmatched: int

    @property
    def total(self) -> int:
        return self.red_votes + self.yellow_votes + self.white_votes + self.unmatched


def _in_bands(h: np.ndarray, bands: HueBand) -> np.ndarray:
    hit = np.zeros(h.shape, dtype=bool)
    for lo, hi in bands:
        hit |= (h >= lo) & (h <= hi)
    return hit


def vote_masks(plate: np.ndarray, cfg: PlateTypeConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel votes; a pixel goes to the first matching class in red, yellow, white order."""
    h, s, v = rgb_to_hsv_image(plate)
    red = (s >= cfg.red_s_min) & (v >= cfg.red_v_min) & _in_bands(h, cfg.red_h)
    yellow = (s >= cfg.yellow_s_min) & (v >= cfg.yellow_v_min) & _in_bands(h, cfg.yellow_h) & ~red
    white = (s <= cfg.white_s_max) & (v >= cfg.white_v_min) & ~red & ~yellow
    return red, yellow, white


def classify_plate_type(plate: np.ndarray, cfg: PlateTypeConfig | None = None
                        ) -> tuple[PlateType, PlateTypeHistogram]:
    cfg = cfg or PlateTypeConfig()
    plate = as_raster(plate)
    red, yellow, white = vote_masks(plate, cfg)
    r, y, w = int(red.sum()), int(yellow.sum()), int(white.sum())
    hist = PlateTypeHistogram(r, y, w, plate.shape[0] * plate.shape[1] - r - y - w)
    if r == y == w == 0:
        raise UnknownPlateType("no pixel matched any plate color band")
    # max() with ties going to red, then yellow, then white
    kind = max(((r, 2, PlateType.RED), (y, 1, PlateType.YELLOW), (w, 0, PlateType.WHITE)))[2]
    return kind, hist
