"""Synthetic plates, scenes and glyph corpora with exact ground truth.

Plates follow a simplified Iranian layout: a blue strip on the left edge, then
eight characters (two digits, a letter, five digits) over a background whose
color encodes the plate type. Geometry at scale 1:

    plate height 44, strip width 20, plate width 200 (strip + 9 strip widths),
    character box 30 x 15, one character slot every 22.5 px.

Rendering is anti-aliased by supersampling, so tilted plates come out the way
a camera would see them rather than as nearest-neighbor staircases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .config import DEFAULT_ALPHABET
from .imaging import Rect, connected_components, hsv_to_rgb, opening, rotate
from .imgfile import decode_pnm
from .platetype import PlateType
from .segmentation import normalize_glyph

PLATE_H = 44.0
STRIP_W = 20.0
WIDTH_FACTOR = 9.0
GLYPH_H = 30.0
GLYPH_W = 15.0
N_CHARS = 8
TEXT_PATTERN = "DDLDDDDD"

# (h range, s range, v range) per plate type and palette
PALETTES = {
    "literal": {
        PlateType.RED: ((0.85, 0.89), (0.50, 0.60), (0.90, 0.98)),
        PlateType.YELLOW: ((0.718, 0.722), (0.50, 0.60), (0.90, 0.98)),
        PlateType.WHITE: ((0.0, 1.0), (0.0, 0.06), (0.90, 0.97)),
    },
    "standard-hue": {
        PlateType.RED: ((0.0, 0.025), (0.7, 0.9), (0.75, 0.92)),
        PlateType.YELLOW: ((0.14, 0.17), (0.7, 0.9), (0.8, 0.95)),
        PlateType.WHITE: ((0.0, 1.0), (0.0, 0.06), (0.90, 0.97)),
    },
}
STRIP_HSV = ((0.60, 0.65), (0.72, 0.90), (0.62, 0.85))


@lru_cache(maxsize=None)
def _load_masters() -> dict[str, np.ndarray]:
    masters = {}
    for entry in resources.files("parkplate").joinpath("data/font").iterdir():
        if entry.name.endswith(".pbm"):
            masters[entry.name[:-4]] = decode_pnm(entry.read_bytes())
    return masters


def font_labels() -> list[str]:
    return sorted(_load_masters())


def master(label: str) -> np.ndarray:
    try:
        return _load_masters()[label]
    except KeyError:
        raise KeyError(f"built-in font has no glyph {label!r}") from None


def _sample_master(m: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Nearest lookup at normalized glyph coords; outside [0,1) is blank."""
    rows, cols = m.shape
    inside = (u >= 0) & (u < 1) & (v >= 0) & (v < 1)
    iu = np.clip((u * cols).astype(np.int64), 0, cols - 1)
    iv = np.clip((v * rows).astype(np.int64), 0, rows - 1)
    return inside & m[iv, iu]


def _subsample_grid(x0: int, y0: int, w: int, h: int, ss: int) -> tuple[np.ndarray, np.ndarray]:
    offs = (np.arange(ss) + 0.5) / ss
    xs = (x0 + np.arange(w)[:, None] + offs[None, :]).ravel()
    ys = (y0 + np.arange(h)[:, None] + offs[None, :]).ravel()
    gx, gy = np.meshgrid(xs, ys)
    return gx, gy


def _pool(a: np.ndarray, h: int, w: int, ss: int) -> np.ndarray:
    """Average ss x ss subsample blocks back to pixels."""
    shape = (h, ss, w, ss) + a.shape[2:]
    return a.reshape(shape).mean(axis=(1, 3))


def render_glyph(label: str, height: float, width: float, angle: float = 0.0,
                 shear: float = 0.0, threshold: float = 0.5, ss: int = 4) -> np.ndarray:
    """Binary rendering of one character rotated by ``angle`` on a padded canvas."""
    m = master(label)
    half = math.hypot(height, width) / 2 + 2
    size = int(math.ceil(2 * half))
    gx, gy = _subsample_grid(0, 0, size, size, ss)
    dx, dy = gx - size / 2, gy - size / 2
    c, s = math.cos(angle), math.sin(angle)
    px, py = c * dx + s * dy, -s * dx + c * dy
    px = px - shear * py
    ink = _sample_master(m, px / width + 0.5, py / height + 0.5).astype(np.float64)
    return _pool(ink, size, size, ss) >= threshold


def corpus_glyph(label: str, rng: np.random.Generator) -> np.ndarray:
    """One jittered 30x15 training sample.

    The character is drawn tilted, then turned back with nearest-neighbor
    rotation the way the localizer deskews plates, then cleaned and normalized
    exactly as segmentation does (opening of the background, largest
    component, tight crop, resample).
    """
    height = rng.uniform(24.0, 60.0)
    width = height * 0.5 * rng.uniform(0.85, 1.15)
    tilt = math.radians(rng.uniform(-10.0, 10.0))
    residual = math.radians(rng.uniform(-1.5, 1.5))
    bits = render_glyph(label, height, width, tilt, rng.uniform(-0.06, 0.06),
                        rng.uniform(0.4, 0.6))
    bits = rotate(bits, -tilt + residual) if abs(tilt - residual) > 1e-12 else bits
    # the noise-removal step plates go through (opening of the background)
    bits = ~opening(np.pad(~bits, 2, mode="edge"))[2:-2, 2:-2]
    lab = connected_components(bits)
    biggest = int(np.argmax(lab.areas)) + 1
    return normalize_glyph(lab.labels == biggest, lab.boxes[biggest - 1]).bits


def generate_glyph_corpus(seed: int, per_class: int,
                          alphabet: Sequence[str] = DEFAULT_ALPHABET) -> list[tuple[str, np.ndarray]]:
    rng = np.random.default_rng(seed)
    return [(label, corpus_glyph(label, rng)) for label in alphabet for _ in range(per_class)]


# -- scenes --------------------------------------------------------------------

@dataclass(frozen=True)
class SceneSpec:
    width: int = 640
    height: int = 480
    plates: int = 1
    max_tilt_deg: float = 0.0
    tilt_deg: float | None = None  # fixed tilt for every plate, overrides the range
    scale_range: tuple[float, float] = (1.0, 1.0)
    plate_type: PlateType | None = None
    palette: str = "literal"
    noise: float = 2.5
    speckle: float = 0.0
    distractors: int = 4
    alphabet: str = DEFAULT_ALPHABET

    def __post_init__(self):
        if self.plates < 0 or not (0 <= self.max_tilt_deg <= 45):
            raise ValueError("plates must be >= 0 and max_tilt_deg within [0, 45]")
        if self.tilt_deg is not None and not (-45 <= self.tilt_deg <= 45):
            raise ValueError("tilt_deg must lie within [-45, 45]")
        lo, hi = self.scale_range
        if not (0 < lo <= hi):
            raise ValueError("scale range must satisfy 0 < lo <= hi")
        if self.palette not in PALETTES:
            raise ValueError(f"unknown palette {self.palette!r}")


@dataclass(frozen=True)
class PlateTruth:
    text: str
    plate_type: PlateType
    tilt: float  # radians, positive = clockwise on screen
    scale: float
    center: tuple[float, float]
    box: Rect
    strip_box: Rect


@dataclass
class SyntheticScene:
    image: np.ndarray
    truth: list[PlateTruth] = field(default_factory=list)


@dataclass(frozen=True)
class PlateLayout:
    """Plate geometry in its own frame (u right, v down, origin top-left)."""

    scale: float

    @property
    def height(self) -> float:
        return PLATE_H * self.scale

    @property
    def strip_width(self) -> float:
        return STRIP_W * self.scale

    @property
    def width(self) -> float:
        return self.strip_width * (1 + WIDTH_FACTOR)

    @property
    def slot(self) -> float:
        return self.strip_width * WIDTH_FACTOR / N_CHARS

    def glyph_box(self, i: int) -> tuple[float, float, float, float]:
        gw, gh = GLYPH_W * self.scale, GLYPH_H * self.scale
        cx = self.strip_width + (i + 0.5) * self.slot
        return cx - gw / 2, (self.height - gh) / 2, gw, gh


def _hsv_color(rng: np.random.Generator, ranges) -> np.ndarray:
    (h0, h1), (s0, s1), (v0, v1) = ranges
    return np.array(hsv_to_rgb(rng.uniform(h0, h1), rng.uniform(s0, s1), rng.uniform(v0, v1)),
                    dtype=np.float64)


def random_text(rng: np.random.Generator, alphabet: str = DEFAULT_ALPHABET) -> str:
    digits = [c for c in alphabet if c.isdigit()] or list(alphabet)
    letters = [c for c in alphabet if not c.isdigit()] or digits
    return "".join(rng.choice(letters if p == "L" else digits) for p in TEXT_PATTERN)


def _plate_samples(layout: PlateLayout, text: str, u: np.ndarray, v: np.ndarray,
                   strip: np.ndarray, background: np.ndarray, ink: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Colors of plate-frame sample points plus inside and stroke flags."""
    inside = (u >= 0) & (u < layout.width) & (v >= 0) & (v < layout.height)
    colors = np.empty(u.shape + (3,))
    colors[:] = background
    in_strip = inside & (u < layout.strip_width)
    colors[in_strip] = strip
    stroke = np.zeros(u.shape, dtype=bool)
    slot = np.floor((u - layout.strip_width) / layout.slot).astype(np.int64)
    for i, ch in enumerate(text):
        sel = inside & (slot == i)
        if not sel.any():
            continue
        gx, gy, gw, gh = layout.glyph_box(i)
        hit = _sample_master(master(ch), (u[sel] - gx) / gw, (v[sel] - gy) / gh)
        idx = np.flatnonzero(sel)[hit]
        stroke.flat[idx] = True
    colors[stroke] = ink
    return colors, inside, stroke


def render_plate_frame(text: str, plate_type: PlateType, scale: float = 1.0,
                       palette: str = "literal", seed: int = 0, ss: int = 3
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned plate raster (no scene) and its pixel-center stroke mask."""
    rng = np.random.default_rng(seed)
    layout = PlateLayout(scale)
    strip = _hsv_color(rng, STRIP_HSV)
    bg = _hsv_color(rng, PALETTES[palette][plate_type])
    ink = np.full(3, 25.0)
    w, h = int(round(layout.width)), int(round(layout.height))
    gx, gy = _subsample_grid(0, 0, w, h, ss)
    colors, _, _ = _plate_samples(layout, text, gx, gy, strip, bg, ink)
    img = np.clip(np.round(_pool(colors, h, w, ss)), 0, 255).astype(np.uint8)
    cx, cy = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    _, _, stroke = _plate_samples(layout, text, cx, cy, strip, bg, ink)
    return img, stroke


def _rotated_corners(cx, cy, w, h, theta):
    c, s = math.cos(theta), math.sin(theta)
    pts = []
    for du, dv in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)):
        pts.append((cx + c * du - s * dv, cy + s * du + c * dv))
    return pts


def _bbox(points) -> Rect:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, y0 = math.floor(min(xs) + 1e-6), math.floor(min(ys) + 1e-6)
    x1, y1 = math.ceil(max(xs) - 1e-6), math.ceil(max(ys) - 1e-6)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def _background(rng: np.random.Generator, spec: SceneSpec) -> np.ndarray:
    h, w = spec.height, spec.width
    top = _hsv_color(rng, ((0.0, 1.0), (0.0, 0.2), (0.35, 0.8)))
    bottom = _hsv_color(rng, ((0.0, 1.0), (0.0, 0.2), (0.2, 0.6)))
    t = np.linspace(0.0, 1.0, h)[:, None, None]
    img = np.broadcast_to(top * (1 - t) + bottom * t, (h, w, 3)).copy()
    for _ in range(spec.distractors):
        rw, rh = int(rng.integers(20, w // 3)), int(rng.integers(20, h // 3))
        x, y = int(rng.integers(0, w - rw)), int(rng.integers(0, h - rh))
        hue = rng.uniform(0.0, 0.45) if rng.random() < 0.7 else rng.uniform(0.78, 1.0)
        img[y:y + rh, x:x + rw] = _hsv_color(rng, ((hue, hue), (0.0, 0.7), (0.15, 0.9)))
    return img


def _place(rng: np.random.Generator, spec: SceneSpec, size: tuple[int, int],
           taken: list[Rect]) -> tuple[float, float] | None:
    bw, bh = size
    margin = 6
    if bw + 2 * margin > spec.width or bh + 2 * margin > spec.height:
        return None
    for _ in range(200):
        cx = rng.uniform(margin + bw / 2, spec.width - margin - bw / 2)
        cy = rng.uniform(margin + bh / 2, spec.height - margin - bh / 2)
        box = Rect(int(cx - bw / 2) - margin, int(cy - bh / 2) - margin, bw + 2 * margin, bh + 2 * margin)
        if all(box.intersection(t) == 0 for t in taken):
            return cx, cy
    return None


def generate_scene(seed: int, spec: SceneSpec = SceneSpec()) -> SyntheticScene:
    """Render a deterministic scene for ``seed``; the same seed gives identical bytes."""
    rng = np.random.default_rng(seed)
    img = _background(rng, spec)
    truths: list[PlateTruth] = []
    taken: list[Rect] = []
    ss = 3
    for _ in range(spec.plates):
        scale = rng.uniform(*spec.scale_range)
        tilt = math.radians(rng.uniform(-spec.max_tilt_deg, spec.max_tilt_deg))
        if spec.tilt_deg is not None:
            tilt = math.radians(spec.tilt_deg)
        ptype = spec.plate_type or list(PlateType)[int(rng.integers(0, 3))]
        text = random_text(rng, spec.alphabet)
        layout = PlateLayout(scale)
        corners0 = _rotated_corners(0, 0, layout.width, layout.height, tilt)
        size = _bbox(corners0)
        at = _place(rng, spec, (size.w + 2, size.h + 2), taken)
        if at is None:
            continue
        cx, cy = at
        box = _bbox(_rotated_corners(cx, cy, layout.width, layout.height, tilt))
        taken.append(box)
        c, s = math.cos(tilt), math.sin(tilt)
        # strip center in scene coordinates
        su = layout.strip_width / 2 - layout.width / 2
        strip_corners = _rotated_corners(cx + c * su, cy + s * su, layout.strip_width, layout.height, tilt)
        strip = _hsv_color(rng, STRIP_HSV)
        bg = _hsv_color(rng, PALETTES[spec.palette][ptype])
        ink = np.full(3, rng.uniform(10, 45))
        x0, y0 = max(box.x, 0), max(box.y, 0)
        x1, y1 = min(box.x1, spec.width), min(box.y1, spec.height)
        bw, bh = x1 - x0, y1 - y0
        gx, gy = _subsample_grid(x0, y0, bw, bh, ss)
        dx, dy = gx - cx, gy - cy
        u = c * dx + s * dy + layout.width / 2
        v = -s * dx + c * dy + layout.height / 2
        colors, inside, _ = _plate_samples(layout, text, u, v, strip, bg, ink)
        cover = _pool(inside.astype(np.float64), bh, bw, ss)[..., None]
        colors = np.where(inside[..., None], colors, 0.0)
        mean = _pool(colors, bh, bw, ss) / np.maximum(cover, 1e-9)
        patch = img[y0:y1, x0:x1]
        img[y0:y1, x0:x1] = np.where(cover > 0, cover * mean + (1 - cover) * patch, patch)
        truths.append(PlateTruth(text, ptype, tilt, scale, (cx, cy), box, _bbox(strip_corners)))
    img *= rng.uniform(0.94, 1.04)
    if spec.noise > 0:
        img += rng.normal(0.0, spec.noise, img.shape)
    out = np.clip(np.round(img), 0, 255).astype(np.uint8)
    if spec.speckle > 0:
        hit = rng.random(out.shape[:2]) < spec.speckle
        salt = rng.random(out.shape[:2]) < 0.5
        out[hit & salt] = 255
        out[hit & ~salt] = 0
    return SyntheticScene(out, truths)


def add_salt(img: np.ndarray, fraction: float, seed: int = 0) -> np.ndarray:
    """Copy of ``img`` with isolated white pixels sprinkled at ``fraction`` density."""
    rng = np.random.default_rng(seed)
    out = img.copy()
    h, w = out.shape[:2]
    n = int(fraction * h * w)
    ys = rng.integers(1, h - 1, n)
    xs = rng.integers(1, w - 1, n)
    out[ys, xs] = 255
    return out


def scene_seed(base: int, index: int) -> int:
    """Independent per-scene seed derived from a batch seed."""
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])
