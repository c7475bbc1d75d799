"""Pixel-level primitives shared by every recognition stage.

Images are plain numpy arrays:

* raster images are ``uint8`` arrays of shape ``(height, width, 3)`` in RGB order;
* binary images are ``bool`` arrays of shape ``(height, width)``, ``True`` meaning
  foreground.

All functions are pure and never modify their inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


class HsvPixel(NamedTuple):
    h: float
    s: float
    v: float


class Rect(NamedTuple):
    """Axis-aligned pixel rectangle; covers columns ``x .. x+w-1`` and rows ``y .. y+h-1``."""

    x: int
    y: int
    w: int
    h: int

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def shifted(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y1), slice(self.x, self.x1)

    def intersection(self, other: "Rect") -> int:
        w = min(self.x1, other.x1) - max(self.x, other.x)
        h = min(self.y1, other.y1) - max(self.y, other.y)
        return max(w, 0) * max(h, 0)

    def iou(self, other: "Rect") -> float:
        inter = self.intersection(other)
        union = self.area + other.area - inter
        return inter / union if union else 0.0


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray  # int32, 0 = background
    count: int
    boxes: list[Rect]  # boxes[i] belongs to label i + 1
    areas: list[int]

    def mask(self, label: int) -> np.ndarray:
        return self.labels == label


def as_raster(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 (H, W, 3) raster, got {arr.dtype} {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("raster must be at least 1x1")
    return arr


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Hexcone conversion of one byte triple; hue normalized to [0, 1)."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    v = mx / 255.0
    if mx == mn:
        return HsvPixel(0.0, 0.0, v)
    s = (mx - mn) / mx
    d = float(mx - mn)
    if mx == r:
        h = ((g - b) / d) % 6.0
    elif mx == g:
        h = (b - r) / d + 2.0
    else:
        h = (r - g) / d + 4.0
    h /= 6.0
    if h >= 1.0:
        h -= 1.0
    return HsvPixel(h, s, v)


def rgb_to_hsv_image(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`rgb_to_hsv`; returns float64 ``(h, s, v)`` planes."""
    rgb = as_raster(img).astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    d = mx - mn
    v = mx / 255.0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(mx > 0, d / mx, 0.0)
        safe = np.where(d > 0, d, 1.0)
        h = np.where(
            mx == r,
            np.mod((g - b) / safe, 6.0),
            np.where(mx == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
        )
    h = np.where(d > 0, h / 6.0, 0.0)
    h = np.where(h >= 1.0, h - 1.0, h)
    return h, s, v


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    """Inverse hexcone conversion, rounded to bytes. Used for rendering test scenes."""
    h = (h % 1.0) * 6.0
    i = int(math.floor(h)) % 6
    f = h - math.floor(h)
    p = v * (1 - s)
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    r, g, b = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return tuple(int(round(c * 255)) for c in (r, g, b))  # type: ignore[return-value]


def luma(img: np.ndarray) -> np.ndarray:
    """Grayscale view: round(0.299 r + 0.587 g + 0.114 b), exact integer arithmetic."""
    rgb = as_raster(img).astype(np.int32)
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return y.astype(np.uint8)


def otsu_threshold(gray: np.ndarray) -> int:
    """Gray level maximizing inter-class variance; class 0 is ``<= t``.

    A uniform image returns its single gray level. Ties resolve to the lowest level.
    """
    gray = np.asarray(gray)
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    nonzero = np.flatnonzero(hist)
    if len(nonzero) <= 1:
        return int(nonzero[0]) if len(nonzero) else 0
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * levels)
    w1 = total - w0
    mu_t = m0[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_t * w0 - total * m0) ** 2 / (w0 * w1)
    between[(w0 == 0) | (w1 == 0)] = -1.0
    return int(np.argmax(between))


def threshold_binarize(gray: np.ndarray) -> np.ndarray:
    gray = np.asarray(gray)
    if gray.ndim == 3:
        gray = luma(gray)
    return gray > otsu_threshold(gray)


def complement(img: np.ndarray) -> np.ndarray:
    return ~np.asarray(img, dtype=bool)


def _shifts(img: np.ndarray, fill: bool) -> list[np.ndarray]:
    h, w = img.shape
    padded = np.pad(img, 1, constant_values=fill)
    return [padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3)]


def erode(img: np.ndarray) -> np.ndarray:
    """3x3 square erosion; pixels outside the canvas count as background."""
    img = np.asarray(img, dtype=bool)
    out = np.ones_like(img)
    for s in _shifts(img, False):
        out &= s
    return out


def dilate(img: np.ndarray) -> np.ndarray:
    """3x3 square dilation; pixels outside the canvas contribute nothing."""
    img = np.asarray(img, dtype=bool)
    out = np.zeros_like(img)
    for s in _shifts(img, False):
        out |= s
    return out


def opening(img: np.ndarray) -> np.ndarray:
    return dilate(erode(img))


def connected_components(img: np.ndarray) -> ComponentLabeling:
    """8-connected labeling, labels numbered in raster order of first pixel."""
    img = np.asarray(img, dtype=bool)
    labels, count = ndimage.label(img, structure=_EIGHT)
    labels = labels.astype(np.int32, copy=False)
    if count:
        # ndimage numbers provisional labels in scan order already; re-derive the
        # order from first occurrences so the contract does not rest on that detail.
        flat = labels.ravel()
        fg = np.flatnonzero(flat)
        first = np.full(count + 1, flat.size, dtype=np.int64)
        np.minimum.at(first, flat[fg], fg)
        order = np.argsort(first[1:], kind="stable") + 1
        if not np.array_equal(order, np.arange(1, count + 1)):
            remap = np.zeros(count + 1, dtype=np.int32)
            remap[order] = np.arange(1, count + 1, dtype=np.int32)
            labels = remap[labels]
    areas = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    boxes = []
    for sl in ndimage.find_objects(labels, max_label=count):
        ys, xs = sl
        boxes.append(Rect(xs.start, ys.start, xs.stop - xs.start, ys.stop - ys.start))
    return ComponentLabeling(labels, int(count), boxes, [int(a) for a in areas])


def rotated_size(width: int, height: int, theta: float) -> tuple[int, int]:
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    nw = math.ceil(width * c + height * s - 1e-9)
    nh = math.ceil(width * s + height * c - 1e-9)
    return max(nw, 1), max(nh, 1)


def rotate(img: np.ndarray, theta: float) -> np.ndarray:
    """Rotate about the image center with nearest-neighbor sampling.

    Positive ``theta`` turns content clockwise as displayed (x right, y down).
    The output canvas is enlarged to hold the whole rotated image; uncovered
    pixels are zero (black or background).
    """
    img = np.asarray(img)
    if abs(theta) > math.pi / 2 + 1e-12:
        raise ValueError("rotation angle must satisfy |theta| <= pi/2")
    if theta == 0:
        return img.copy()
    h, w = img.shape[:2]
    nw, nh = rotated_size(w, h, theta)
    c, s = math.cos(theta), math.sin(theta)
    xs = np.arange(nw, dtype=np.float64) + 0.5 - nw / 2.0
    ys = np.arange(nh, dtype=np.float64) + 0.5 - nh / 2.0
    gx, gy = np.meshgrid(xs, ys)
    # inverse map: rotate output offsets by -theta
    sx = c * gx + s * gy + w / 2.0
    sy = -s * gx + c * gy + h / 2.0
    ix = np.floor(sx + 1e-9).astype(np.int64)
    iy = np.floor(sy + 1e-9).astype(np.int64)
    ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros((nh, nw) + img.shape[2:], dtype=img.dtype)
    out[ok] = img[iy[ok], ix[ok]]
    return out
