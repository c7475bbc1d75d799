"""Plate localization anchored on the blue strip at the plate's left edge.

Stage one collects every blue component whose shape looks like the strip and
projects a plate rectangle to its right. Stage two keeps the candidates whose
crop shows enough dark/light alternation across the character band. Tilt comes
from a line fit through the strip's per-row centroids.

Angles follow :func:`parkplate.imaging.rotate`: positive tilt means the plate
is turned clockwise on screen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import LocalizationConfig
from .imaging import (Rect, as_raster, connected_components, luma, opening,
                      otsu_threshold, rgb_to_hsv_image, rotate)


@dataclass(frozen=True)
class PlateCandidate:
    box: Rect
    blue_box: Rect
    tilt: float
    score: int
    strip_center: tuple[float, float]
    strip_length: float
    strip_width: float
    width_factor: float = 9.0
    clipped: bool = False

    @property
    def plate_width(self) -> float:
        return self.strip_width * (1 + self.width_factor)

    @property
    def plate_height(self) -> float:
        return self.strip_length

    @property
    def plate_center(self) -> tuple[float, float]:
        off = self.strip_width * self.width_factor / 2
        return (self.strip_center[0] + off * math.cos(self.tilt),
                self.strip_center[1] + off * math.sin(self.tilt))

    def with_score(self, score: int) -> "PlateCandidate":
        return PlateCandidate(self.box, self.blue_box, self.tilt, score, self.strip_center,
                              self.strip_length, self.strip_width, self.width_factor, self.clipped)


@dataclass(frozen=True)
class PlateRegion:
    pixels: np.ndarray
    origin: tuple[int, int]  # scene coordinates of the candidate box corner
    tilt_applied: float
    text_x0: int  # first column right of the blue strip
    clipped: bool = False

    @property
    def aspect(self) -> float:
        h, w = self.pixels.shape[:2]
        return w / h


def blue_mask(img: np.ndarray, cfg: LocalizationConfig | None = None) -> np.ndarray:
    cfg = cfg or LocalizationConfig()
    h, s, v = rgb_to_hsv_image(img)
    mask = (h >= cfg.blue_h_min) & (h <= cfg.blue_h_max) & (s >= cfg.blue_s_min) & (v >= cfg.blue_v_min)
    return opening(mask)


def _fit_tilt(ys: np.ndarray, xs: np.ndarray) -> float:
    """Strip axis angle from a least-squares line x = a + b*y through per-row centroids.

    A first fit over the full-width rows gives the slope; the rows within
    ``width * |slope| + 1`` of either end, which the slanted strip ends cut
    short, are then dropped and the line refit.
    """
    rows, inverse, counts = np.unique(ys, return_inverse=True, return_counts=True)
    if len(rows) < 2:
        return 0.0
    centroids = np.bincount(inverse, weights=xs) / counts
    full = counts >= 0.75 * np.median(counts)
    if full.sum() < 2:
        full[:] = True
    slope = np.polyfit(rows[full].astype(np.float64), centroids[full], 1)[0]
    trim = int(math.ceil(np.median(counts) * abs(slope))) + 1
    inner = (rows >= rows[0] + trim) & (rows <= rows[-1] - trim)
    if inner.sum() >= 2:
        slope = np.polyfit(rows[inner].astype(np.float64), centroids[inner], 1)[0]
    tilt = math.atan(-slope)
    return max(-math.pi / 4, min(math.pi / 4, tilt))


def estimate_tilt(cand: PlateCandidate, mask: np.ndarray) -> float:
    """Tilt of the largest blue component inside the candidate's strip box."""
    sub = np.asarray(mask, dtype=bool)[cand.blue_box.slices()]
    lab = connected_components(sub)
    if lab.count == 0:
        return 0.0
    biggest = int(np.argmax(lab.areas)) + 1
    ys, xs = np.nonzero(lab.labels == biggest)
    return _fit_tilt(ys, xs)


def _corners(cx: float, cy: float, w: float, h: float, theta: float) -> list[tuple[float, float]]:
    c, s = math.cos(theta), math.sin(theta)
    return [(cx + c * du - s * dv, cy + s * du + c * dv)
            for du, dv in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2))]


def _outer_box(points) -> Rect:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, y0 = math.floor(min(xs) + 1e-6), math.floor(min(ys) + 1e-6)
    x1, y1 = math.ceil(max(xs) - 1e-6), math.ceil(max(ys) - 1e-6)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def _clamp(box: Rect, width: int, height: int) -> tuple[Rect, bool]:
    x0, y0 = max(box.x, 0), max(box.y, 0)
    x1, y1 = min(box.x1, width), min(box.y1, height)
    clamped = Rect(x0, y0, max(x1 - x0, 0), max(y1 - y0, 0))
    return clamped, clamped != box


def strip_geometry(ys: np.ndarray, xs: np.ndarray) -> tuple[float, tuple[float, float], float, float]:
    """(tilt, center, length along the strip axis, width across it) of one blue component."""
    tilt = _fit_tilt(ys, xs)
    px, py = xs + 0.5, ys + 0.5
    c, s = math.cos(tilt), math.sin(tilt)
    along = -s * px + c * py
    # a run of n unit pixels has variance (n*n - 1) / 12; unlike the extent this
    # is not inflated by the stair-stepped corners of a tilted strip
    length = math.sqrt(12.0 * float(along.var()) + 1.0)
    width = len(xs) / length
    return tilt, (float(px.mean()), float(py.mean())), length, width


def extract_candidates(mask: np.ndarray, img: np.ndarray,
                       cfg: LocalizationConfig | None = None) -> list[PlateCandidate]:
    """One unscored candidate per blue component shaped like a plate strip."""
    cfg = cfg or LocalizationConfig()
    img = as_raster(img)
    if mask.shape != img.shape[:2]:
        raise ValueError("mask and image sizes differ")
    height, width = mask.shape
    lab = connected_components(mask)
    out = []
    for label, (bbox, area) in enumerate(zip(lab.boxes, lab.areas), start=1):
        if area < cfg.min_area:
            continue
        sub = lab.labels[bbox.slices()] == label
        ys, xs = np.nonzero(sub)
        tilt, (cx, cy), length, strip_w = strip_geometry(ys + bbox.y, xs + bbox.x)
        ratio = length / strip_w
        if not (cfg.strip_ratio_min <= ratio <= cfg.strip_ratio_max):
            continue
        cand = PlateCandidate(Rect(0, 0, 0, 0), bbox, tilt, 0, (cx, cy), length, strip_w,
                              cfg.plate_width_factor)
        pcx, pcy = cand.plate_center
        box, clipped = _clamp(_outer_box(_corners(pcx, pcy, cand.plate_width, cand.plate_height, tilt)),
                              width, height)
        if box.area == 0:
            continue
        out.append(PlateCandidate(box, bbox, tilt, 0, (cx, cy), length, strip_w,
                                  cfg.plate_width_factor, clipped))
    return out


def plate_patch(img: np.ndarray, cand: PlateCandidate, margin: float = 0.0
                ) -> tuple[np.ndarray, Rect, bool]:
    """Deskewed plate pixels, the scene neighborhood they came from, and a clipped flag.

    ``margin`` widens the crop on the right by that fraction of the plate width.
    """
    img = as_raster(img)
    height, width = img.shape[:2]
    extra = int(round(margin * cand.plate_width))
    pw = max(int(round(cand.plate_width)), 1)
    ph = max(int(round(cand.plate_height)), 1)
    pcx, pcy = cand.plate_center
    if cand.tilt == 0:
        hood, clipped = _clamp(Rect(int(round(pcx - pw / 2)), int(round(pcy - ph / 2)),
                                    pw + extra, ph), width, height)
        src = img[hood.slices()]
        cx, cy = pcx - hood.x, pcy - hood.y
    else:
        outer = _outer_box(_corners(pcx, pcy, pw + 2 * extra + 4, ph + 4, cand.tilt))
        hood, clipped = _clamp(outer, width, height)
        crop = img[hood.slices()]
        src = rotate(crop, -cand.tilt)
        # plate center relative to the crop center, turned back by the tilt
        dx, dy = pcx - hood.x - crop.shape[1] / 2, pcy - hood.y - crop.shape[0] / 2
        c, s = math.cos(-cand.tilt), math.sin(-cand.tilt)
        cx = c * dx - s * dy + src.shape[1] / 2
        cy = s * dx + c * dy + src.shape[0] / 2
    x0, y0 = int(round(cx - pw / 2)), int(round(cy - ph / 2))
    pw += extra
    out = np.zeros((ph, pw, 3), dtype=np.uint8)
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + pw, src.shape[1]), min(y0 + ph, src.shape[0])
    if sx1 > sx0 and sy1 > sy0:
        out[sy0 - y0:sy1 - y0, sx0 - x0:sx1 - x0] = src[sy0:sy1, sx0:sx1]
    if (sx0, sy0, sx1, sy1) != (x0, y0, x0 + pw, y0 + ph):
        clipped = True
    return out, hood, clipped


def scanline_jumps(patch: np.ndarray) -> list[int]:
    """Foreground/background transitions along rows at 40%, 50% and 60% of the height.

    The threshold comes from the middle 60% of rows so scene pixels caught at
    the crop's top and bottom edges cannot dominate it.
    """
    gray = luma(patch)
    h = gray.shape[0]
    band = gray[int(0.2 * h): max(int(0.8 * h), int(0.2 * h) + 1)]
    binary = gray > otsu_threshold(band)
    counts = []
    for frac in (0.4, 0.5, 0.6):
        row = binary[min(int(frac * h), h - 1)]
        counts.append(int(np.count_nonzero(row[1:] != row[:-1])))
    return counts


def verify_candidate(cand: PlateCandidate, img: np.ndarray,
                     cfg: LocalizationConfig | None = None) -> int:
    """Median scanline transition count of the deskewed candidate crop."""
    patch, _, _ = plate_patch(img, cand)
    return int(np.median(scanline_jumps(patch)))


def is_accepted(score: int, cfg: LocalizationConfig | None = None) -> bool:
    cfg = cfg or LocalizationConfig()
    return score >= cfg.min_jumps


TEXT_MARGIN = 0.05  # extra crop on the right, as a fraction of plate width


def text_start(pixels: np.ndarray, cand: PlateCandidate, cfg: LocalizationConfig | None = None) -> int:
    """First column right of the blue strip in a deskewed crop.

    Found from the crop itself: one column past the last mostly-blue column
    near the left edge. Falls back to the strip width estimate when no column
    reads as blue.
    """
    limit = min(int(math.ceil(2 * cand.strip_width)), pixels.shape[1] - 1)
    blue = blue_mask(pixels[:, :limit], cfg).mean(axis=0) >= 0.5
    cols = np.flatnonzero(blue)
    if len(cols):
        return min(int(cols[-1]) + 2, pixels.shape[1] - 1)
    return min(int(math.ceil(cand.strip_width + 0.5)), pixels.shape[1] - 1)


def deskew_and_crop(img: np.ndarray, cand: PlateCandidate,
                    cfg: LocalizationConfig | None = None) -> PlateRegion:
    """Rotate the candidate neighborhood by minus its tilt and cut out the plate."""
    pixels, hood, clipped = plate_patch(img, cand, TEXT_MARGIN)
    return PlateRegion(pixels, (cand.box.x, cand.box.y), -cand.tilt, text_start(pixels, cand, cfg),
                       clipped or cand.clipped)


def locate_plates(img: np.ndarray, cfg: LocalizationConfig | None = None
                  ) -> tuple[list[PlateCandidate], list[PlateCandidate]]:
    """Scored candidates split into (accepted, rejected).

    Accepted plates are ordered by descending score, ties by leftmost box.
    """
    cfg = cfg or LocalizationConfig()
    mask = blue_mask(img, cfg)
    scored = [c.with_score(verify_candidate(c, img, cfg)) for c in extract_candidates(mask, img, cfg)]
    order = lambda c: (-c.score, c.box.x, c.box.y)
    accepted = sorted((c for c in scored if is_accepted(c.score, cfg)), key=order)
    rejected = sorted((c for c in scored if not is_accepted(c.score, cfg)), key=order)
    return accepted, rejected
