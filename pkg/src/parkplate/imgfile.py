"""Readers and writers for uncompressed image files (binary PNM and 24-bit BMP).

Writers emit a canonical layout (single-space PNM headers with no comments,
BITMAPINFOHEADER BMPs), so ``write(read(write(x)))`` reproduces the same bytes.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    pass


def _pnm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Parse ``count`` header integers after the magic; returns them and the raster offset."""
    pos = 2
    values: list[int] = []
    n = len(data)
    while len(values) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"bad PNM header at byte {start}")
        values.append(int(data[start:pos]))
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ImageFormatError(f"missing whitespace after PNM header at byte {pos}")
    return values, pos + 1


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode P4 (bool), P5 (uint8 gray) or P6 (uint8 RGB)."""
    magic = data[:2]
    if magic == b"P4":
        (w, h), off = _pnm_tokens(data, 2)
        row_bytes = (w + 7) // 8
        raw = np.frombuffer(data, dtype=np.uint8, count=row_bytes * h, offset=off) \
            if len(data) - off >= row_bytes * h else None
        if raw is None:
            raise ImageFormatError("truncated P4 raster")
        bits = np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w]
        return bits.astype(bool)
    if magic in (b"P5", b"P6"):
        (w, h, maxval), off = _pnm_tokens(data, 3)
        if maxval != 255:
            raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
        channels = 1 if magic == b"P5" else 3
        size = w * h * channels
        if len(data) - off < size:
            raise ImageFormatError(f"truncated {magic.decode()} raster")
        arr = np.frombuffer(data, dtype=np.uint8, count=size, offset=off).copy()
        return arr.reshape(h, w) if channels == 1 else arr.reshape(h, w, 3)
    raise ImageFormatError(f"unsupported PNM magic {magic!r}")


def encode_pnm(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype == bool:
        h, w = img.shape
        packed = np.packbits(img.astype(np.uint8), axis=1)
        return f"P4\n{w} {h}\n".encode() + packed.tobytes()
    if img.dtype != np.uint8:
        raise ImageFormatError(f"cannot encode dtype {img.dtype}")
    if img.ndim == 2:
        h, w = img.shape
        return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()
    if img.ndim == 3 and img.shape[2] == 3:
        h, w = img.shape[:2]
        return f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img).tobytes()
    raise ImageFormatError(f"cannot encode shape {img.shape}")


def decode_bmp(data: bytes) -> np.ndarray:
    """Decode an uncompressed 24-bit BMP into an RGB raster."""
    if len(data) < 54 or data[:2] != b"BM":
        raise ImageFormatError("not a BMP file")
    offset = struct.unpack_from("<I", data, 10)[0]
    header_size, w, h, planes, bpp, compression = struct.unpack_from("<IiiHHI", data, 14)
    if header_size < 40 or bpp != 24 or compression != 0 or planes != 1:
        raise ImageFormatError("only uncompressed 24-bit BMP is supported")
    bottom_up = h > 0
    h = abs(h)
    stride = (w * 3 + 3) & ~3
    if len(data) < offset + stride * h:
        raise ImageFormatError("truncated BMP pixel array")
    rows = np.frombuffer(data, dtype=np.uint8, count=stride * h, offset=offset).reshape(h, stride)
    bgr = rows[:, : w * 3].reshape(h, w, 3)
    if bottom_up:
        bgr = bgr[::-1]
    return np.ascontiguousarray(bgr[..., ::-1])


def encode_bmp(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise ImageFormatError("BMP writer expects a uint8 RGB raster")
    h, w = img.shape[:2]
    stride = (w * 3 + 3) & ~3
    body = np.zeros((h, stride), dtype=np.uint8)
    body[:, : w * 3] = img[::-1, :, ::-1].reshape(h, w * 3)
    pixels = body.tobytes()
    file_header = struct.pack("<2sIHHI", b"BM", 54 + len(pixels), 0, 0, 54)
    info = struct.pack("<IiiHHIIiiII", 40, w, h, 1, 24, 0, len(pixels), 2835, 2835, 0, 0)
    return file_header + info + pixels


def read_image(path: str | Path) -> np.ndarray:
    """Read a PNM or BMP file, dispatching on the leading magic bytes."""
    data = Path(path).read_bytes()
    if data[:2] == b"BM":
        return decode_bmp(data)
    if data[:1] == b"P":
        return decode_pnm(data)
    raise ImageFormatError(f"{path}: unrecognized image format")


def read_raster(path: str | Path) -> np.ndarray:
    """Read any supported file as an RGB raster (gray and bitmap are expanded)."""
    img = read_image(path)
    if img.dtype == bool:
        img = np.where(img, 0, 255).astype(np.uint8)
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    return img


def write_image(path: str | Path, img: np.ndarray) -> None:
    path = Path(path)
    data = encode_bmp(img) if path.suffix.lower() == ".bmp" else encode_pnm(img)
    path.write_bytes(data)
