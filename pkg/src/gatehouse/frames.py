"""Grayscale frame primitives shared by every pixel-processing stage."""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


@dataclass(eq=False)
class GrayFrame:
    """A single-channel 8-bit image, row-major, immutable once built."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected a 2-D pixel grid, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("frame dimensions must be positive")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError(f"pixels must be integers in [0, 255], got dtype {px.dtype}")
            if px.size and (int(px.min()) < 0 or int(px.max()) > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        else:
            px = px.copy()
        px.flags.writeable = False
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def same_size(self, other: "GrayFrame") -> bool:
        return self.pixels.shape == other.pixels.shape

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    @classmethod
    def full(cls, width: int, height: int, value: int) -> "GrayFrame":
        return cls(np.full((height, width), value, dtype=np.uint8))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


def to_gray(rgb: np.ndarray) -> GrayFrame:
    """Collapse an (h, w, 3) uint8 image with 0.299/0.587/0.114 luma weights,
    rounding half-up."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] < 3:
        raise ValueError(f"expected an (h, w, 3) color image, got shape {arr.shape}")
    r = arr[:, :, 0].astype(np.uint32)
    g = arr[:, :, 1].astype(np.uint32)
    b = arr[:, :, 2].astype(np.uint32)
    y = (299 * r + 587 * g + 114 * b + 500) // 1000
    return GrayFrame(y.astype(np.uint8))


def _from_pil(img: Image.Image) -> GrayFrame:
    if img.mode == "L":
        return GrayFrame(np.asarray(img, dtype=np.uint8))
    if img.mode in ("RGBA", "P", "CMYK", "I", "F", "LA", "1"):
        img = img.convert("RGB")
    if img.mode == "RGB":
        return to_gray(np.asarray(img, dtype=np.uint8))
    return GrayFrame(np.asarray(img.convert("L"), dtype=np.uint8))


def load_gray(path: str | Path) -> GrayFrame:
    with Image.open(path) as img:
        return _from_pil(img)


def decode_gray(data: bytes) -> GrayFrame:
    with Image.open(io.BytesIO(data)) as img:
        return _from_pil(img)


def save_gray(frame: GrayFrame, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(frame.pixels, mode="L").save(path)


def encode_png(frame: GrayFrame) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(frame.pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def resize_bilinear(frame: GrayFrame, out_width: int, out_height: int) -> GrayFrame:
    """Bilinear resample with the half-pixel-center convention; identity when
    the size is unchanged."""
    if out_width < 1 or out_height < 1:
        raise ValueError("target dimensions must be positive")
    src = frame.pixels
    sh, sw = src.shape
    if (out_width, out_height) == (sw, sh):
        return GrayFrame(src)
    srcf = src.astype(np.float64)
    ys = np.clip((np.arange(out_height) + 0.5) * sh / out_height - 0.5, 0.0, sh - 1.0)
    xs = np.clip((np.arange(out_width) + 0.5) * sw / out_width - 0.5, 0.0, sw - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = srcf[np.ix_(y0, x0)] * (1.0 - wx) + srcf[np.ix_(y0, x1)] * wx
    bottom = srcf[np.ix_(y1, x0)] * (1.0 - wx) + srcf[np.ix_(y1, x1)] * wx
    out = top * (1.0 - wy) + bottom * wy
    return GrayFrame(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))
