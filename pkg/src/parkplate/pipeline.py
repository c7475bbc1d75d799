"""End-to-end plate reading and batch evaluation against ground truth."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classifier import KnnModel, classify
from .config import Config
from .errors import ParkplateError
from .features import chain_code_features
from .imaging import Rect, as_raster
from .imgfile import read_raster
from .localization import (PlateCandidate, PlateRegion, deskew_and_crop,
                           locate_plates)
from .platetype import PlateType, classify_plate_type
from .segmentation import segment_plate
from .synth import PlateTruth, SceneSpec, SyntheticScene, generate_scene

__all__ = ["PlateReading", "Diagnostic", "read_plate", "batch_evaluate", "BatchReport",
           "generate_scene", "SceneSpec", "SyntheticScene"]


@dataclass
class PlateReading:
    text: str
    plate_type: PlateType
    region: PlateRegion
    candidate: PlateCandidate
    per_glyph: list[tuple[str, float]]
    elapsed: float = 0.0  # milliseconds for the whole image

    @property
    def box(self) -> Rect:
        return self.candidate.box


@dataclass
class Diagnostic:
    candidate: PlateCandidate
    stage: str
    message: str


def _read_candidate(img: np.ndarray, cand: PlateCandidate, model: KnnModel, cfg: Config
                    ) -> PlateReading:
    region = deskew_and_crop(img, cand, cfg.localization)
    loc = cfg.localization
    if not (loc.aspect_min <= region.aspect <= loc.aspect_max):
        raise _Reject("deskew", f"plate aspect {region.aspect:.2f} outside "
                                f"[{loc.aspect_min}, {loc.aspect_max}]")
    glyphs = segment_plate(region, cfg.segmentation)
    normalize = cfg.features.normalize == "per-glyph"
    per_glyph = [classify(model, chain_code_features(g, normalize=normalize)) for g in glyphs]
    ptype, _ = classify_plate_type(region.pixels[:, region.text_x0:], cfg.plate_type)
    return PlateReading("".join(label for label, _ in per_glyph), ptype, region, cand, per_glyph)


class _Reject(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def read_plate(img: np.ndarray, model: KnnModel, cfg: Config | None = None,
               diagnostics: list[Diagnostic] | None = None) -> list[PlateReading]:
    """Every readable plate in ``img``; failed candidates go to ``diagnostics``."""
    cfg = cfg or Config()
    start = time.perf_counter()
    img = as_raster(img)
    accepted, _ = locate_plates(img, cfg.localization)
    readings = []
    for cand in accepted:
        try:
            readings.append(_read_candidate(img, cand, model, cfg))
        except _Reject as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(cand, exc.stage, str(exc)))
        except ParkplateError as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(cand, type(exc).__name__, str(exc)))
    elapsed = (time.perf_counter() - start) * 1000.0
    for r in readings:
        r.elapsed = elapsed
    return readings


@dataclass
class SceneOutcome:
    plates: int
    located: int
    chars: int
    chars_correct: int
    texts: list[str] = field(default_factory=list)


@dataclass
class BatchReport:
    outcomes: list[SceneOutcome]
    elapsed_ms: list[float]

    @property
    def total_images(self) -> int:
        return len(self.outcomes)

    @property
    def total_plates(self) -> int:
        return sum(o.plates for o in self.outcomes)

    @property
    def total_chars(self) -> int:
        return sum(o.chars for o in self.outcomes)

    @property
    def located(self) -> int:
        return sum(o.located for o in self.outcomes)

    @property
    def chars_correct(self) -> int:
        return sum(o.chars_correct for o in self.outcomes)

    @property
    def location_rate(self) -> float | None:
        return self.located / self.total_plates if self.total_plates else None

    @property
    def char_rate(self) -> float | None:
        return self.chars_correct / self.total_chars if self.total_chars else None

    @property
    def median_ms(self) -> float | None:
        return float(np.median(self.elapsed_ms)) if self.elapsed_ms else None

    def to_dict(self) -> dict:
        return {
            "total_images": self.total_images,
            "total_plates": self.total_plates,
            "total_characters": self.total_chars,
            "correct_locations": self.located,
            "correct_characters": self.chars_correct,
            "location_rate": self.location_rate,
            "character_rate": self.char_rate,
            "median_ms": self.median_ms,
        }

    def table(self) -> str:
        def pct(x):
            return "n/a" if x is None else f"{100 * x:.1f}%"
        return "\n".join([
            "Total images | Total characters | Correct plate location | "
            "Correct character recognition | Location % | Character %",
            f"{self.total_images} | {self.total_chars} | {self.located} | {self.chars_correct} | "
            f"{pct(self.location_rate)} | {pct(self.char_rate)}",
        ])


def match_plates(truths: Sequence[PlateTruth], boxes: Sequence[Rect], min_iou: float = 0.5
                 ) -> dict[int, int]:
    """Greedy one-to-one truth -> detection matching by descending IoU."""
    pairs = sorted(((t.box.iou(b), ti, bi) for ti, t in enumerate(truths) for bi, b in enumerate(boxes)),
                   reverse=True)
    used_t: set[int] = set()
    used_b: set[int] = set()
    out = {}
    for iou, ti, bi in pairs:
        if iou < min_iou:
            break
        if ti in used_t or bi in used_b:
            continue
        used_t.add(ti)
        used_b.add(bi)
        out[ti] = bi
    return out


def score_scene(truths: Sequence[PlateTruth], readings: Sequence[PlateReading],
                failed: Iterable[PlateCandidate] = ()) -> SceneOutcome:
    """Located plates count any accepted candidate; characters need a reading."""
    boxes = [r.box for r in readings] + [c.box for c in failed]
    located = match_plates(truths, boxes)
    correct = 0
    for ti, bi in located.items():
        if bi < len(readings):
            text = readings[bi].text
            correct += sum(a == b for a, b in zip(text, truths[ti].text))
    return SceneOutcome(len(truths), len(located), sum(len(t.text) for t in truths), correct,
                        [r.text for r in readings])


def batch_evaluate(scenes: Iterable[SyntheticScene], model: KnnModel, cfg: Config | None = None
                   ) -> BatchReport:
    outcomes, times = [], []
    for scene in scenes:
        diags: list[Diagnostic] = []
        t0 = time.perf_counter()
        readings = read_plate(scene.image, model, cfg, diags)
        times.append((time.perf_counter() - t0) * 1000.0)
        outcomes.append(score_scene(scene.truth, readings, [d.candidate for d in diags]))
    return BatchReport(outcomes, times)


# -- scene directories ----------------------------------------------------------

MANIFEST_NAME = "truth.txt"


@dataclass(frozen=True)
class ManifestEntry:
    """One plate of one scene file; scenes without plates carry ``text == ""``."""

    file: str
    text: str
    plate_type: PlateType | None
    tilt_deg: float
    box: Rect


def manifest_lines(file: str, truths: Sequence[PlateTruth]) -> list[str]:
    """``file|plate_text|type|tilt|x,y,w,h`` per plate, ``file|-|-|-|-`` when empty."""
    if not truths:
        return [f"{file}|-|-|-|-"]
    return [f"{file}|{t.text}|{t.plate_type.value}|{np.degrees(t.tilt):.3f}|"
            f"{t.box.x},{t.box.y},{t.box.w},{t.box.h}" for t in truths]


def parse_manifest(text: str) -> list[ManifestEntry]:
    entries = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) != 5:
            raise ValueError(f"manifest line {n}: expected 5 fields")
        file, plate, kind, tilt, box = parts
        if (plate, kind, tilt, box) == ("-", "-", "-", "-"):
            entries.append(ManifestEntry(file, "", None, 0.0, Rect(0, 0, 0, 0)))
            continue
        try:
            x, y, w, h = (int(v) for v in box.split(","))
            entries.append(ManifestEntry(file, plate, PlateType(kind), float(tilt), Rect(x, y, w, h)))
        except ValueError as exc:
            raise ValueError(f"manifest line {n}: {exc}") from None
    return entries


@dataclass
class LoadedScene:
    name: str
    image: np.ndarray
    truth: list[ManifestEntry]


def load_scene_dir(directory: str | Path, read=None) -> list[LoadedScene]:
    """Scenes listed in a directory's manifest, in manifest order."""
    read = read or read_raster
    directory = Path(directory)
    entries = parse_manifest((directory / MANIFEST_NAME).read_text(encoding="utf-8"))
    by_file: dict[str, list[ManifestEntry]] = {}
    for e in entries:
        by_file.setdefault(e.file, [])
        if e.text:
            by_file[e.file].append(e)
    return [LoadedScene(name, read(directory / name), truths) for name, truths in by_file.items()]
