"""Raster types and the masked attribute adjustments.

Transfer functions, with v = value / 100 in [-1, 1], applied to member
pixels only:

    brightness   c' = clamp(c + round(v * 255))            per RGB channel
    contrast     c' = clamp(round((c - 127.5)(1 + v) + 127.5))
    hue          h' = (h + v * 180) mod 360                in HSL
    saturation   s' = clamp(s * (1 + v), 0, 1)             in HSL
    lightness    l' = l + v(1 - l)  if v >= 0, else  l(1 + v)

All five are the identity at v = 0.  HSL arithmetic runs in float64 and is
quantized to 8-bit integers only at the final write; ties round away from
zero.  Non-member pixels are bit-identical before and after every
operation, and inputs are never mutated.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image as _PilImage

from .ontology import Attribute, EditValue

HIGHLIGHT_COLOR = (255, 0, 0)
HIGHLIGHT_ALPHA = 0.4


class DimensionMismatchError(ValueError):
    """Mask and image rasters do not share the same width and height."""


class Image:
    """An 8-bit RGB raster. Immutable: the pixel array is write-locked."""

    __slots__ = ("pixels",)

    def __init__(self, pixels) -> None:
        arr = np.array(pixels, dtype=np.uint8, copy=True)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) raster, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Image is immutable")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height})"

    @classmethod
    def open(cls, path) -> "Image":
        with _PilImage.open(path) as im:
            return cls(np.asarray(im.convert("RGB")))

    @classmethod
    def from_png_bytes(cls, data: bytes) -> "Image":
        with _PilImage.open(io.BytesIO(data)) as im:
            return cls(np.asarray(im.convert("RGB")))

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        _PilImage.fromarray(np.asarray(self.pixels)).save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        _PilImage.fromarray(np.asarray(self.pixels)).save(path, format="PNG")


class Mask:
    """Binary pixel membership with a confidence score in [0, 1].

    ``source_id`` names the scene object the mask came from, when known;
    it keeps resolver choices auditable in logs and tests.
    """

    __slots__ = ("membership", "confidence", "source_id")

    def __init__(self, membership, confidence: float = 1.0,
                 source_id: Optional[str] = None) -> None:
        arr = np.array(membership, copy=True).astype(bool)
        if arr.ndim != 2:
            raise ValueError(f"expected an (H, W) membership raster, got shape {arr.shape}")
        if not 0.0 <= confidence <= 1.0:
            raise ValueError(f"confidence {confidence} outside [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "membership", arr)
        object.__setattr__(self, "confidence", float(confidence))
        object.__setattr__(self, "source_id", source_id)

    def __setattr__(self, name, value):
        raise AttributeError("Mask is immutable")

    @property
    def width(self) -> int:
        return self.membership.shape[1]

    @property
    def height(self) -> int:
        return self.membership.shape[0]

    @property
    def member_count(self) -> int:
        return int(self.membership.sum())

    def __repr__(self) -> str:
        return (f"Mask({self.width}x{self.height}, members={self.member_count}, "
                f"confidence={self.confidence:.3f}, source={self.source_id!r})")

    @classmethod
    def open(cls, path, confidence: float = 1.0,
             source_id: Optional[str] = None) -> "Mask":
        """Read an 8-bit grayscale PNG; nonzero means member."""
        with _PilImage.open(path) as im:
            gray = np.asarray(im.convert("L"))
        return cls(gray != 0, confidence=confidence, source_id=source_id)

    def save(self, path) -> None:
        gray = np.where(self.membership, 255, 0).astype(np.uint8)
        _PilImage.fromarray(gray, mode="L").save(path, format="PNG")


@dataclass(frozen=True)
class HslPixel:
    """Hue in degrees [0, 360), saturation and lightness in [0, 1]."""

    h: float
    s: float
    l: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.h < 360.0:
            raise ValueError(f"hue {self.h} outside [0, 360)")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"saturation {self.s} outside [0, 1]")
        if not 0.0 <= self.l <= 1.0:
            raise ValueError(f"lightness {self.l} outside [0, 1]")


def _round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero."""
    return np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))


def _rgb_to_hsl_arrays(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(N, 3) float64 in [0, 1] -> (h, s, l) arrays."""
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    maxc = rgb.max(axis=1)
    minc = rgb.min(axis=1)
    l = (maxc + minc) / 2.0
    d = maxc - minc
    s = np.zeros_like(l)
    h = np.zeros_like(l)
    nz = d > 0.0
    denom = 1.0 - np.abs(2.0 * l - 1.0)
    s[nz] = d[nz] / denom[nz]
    rmax = nz & (maxc == r)
    gmax = nz & ~rmax & (maxc == g)
    bmax = nz & ~rmax & ~gmax
    h[rmax] = np.mod((g[rmax] - b[rmax]) / d[rmax], 6.0)
    h[gmax] = (b[gmax] - r[gmax]) / d[gmax] + 2.0
    h[bmax] = (r[bmax] - g[bmax]) / d[bmax] + 4.0
    h = np.mod(h * 60.0, 360.0)
    return h, np.clip(s, 0.0, 1.0), np.clip(l, 0.0, 1.0)


def _hsl_to_rgb_arrays(h: np.ndarray, s: np.ndarray, l: np.ndarray) -> np.ndarray:
    """(h, s, l) arrays -> (N, 3) float64 in [0, 1]."""
    c = (1.0 - np.abs(2.0 * l - 1.0)) * s
    hp = h / 60.0
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    m = l - c / 2.0
    k = np.floor(hp).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    sextants = [k == 0, k == 1, k == 2, k == 3, k == 4, k == 5]
    r1 = np.select(sextants, [c, x, zeros, zeros, x, c])
    g1 = np.select(sextants, [x, c, c, x, zeros, zeros])
    b1 = np.select(sextants, [zeros, zeros, x, c, c, x])
    return np.clip(np.stack([r1 + m, g1 + m, b1 + m], axis=-1), 0.0, 1.0)


def rgb_to_hsl(rgb: tuple[int, int, int]) -> HslPixel:
    """Convert one 8-bit RGB pixel to HSL."""
    arr = np.asarray([rgb], dtype=np.float64) / 255.0
    h, s, l = _rgb_to_hsl_arrays(arr)
    return HslPixel(float(h[0]), float(s[0]), float(l[0]))


def hsl_to_rgb(pixel: HslPixel) -> tuple[int, int, int]:
    """Convert one HSL pixel back to 8-bit RGB; round-trip error is at most 1."""
    rgb = _hsl_to_rgb_arrays(
        np.asarray([pixel.h]), np.asarray([pixel.s]), np.asarray([pixel.l])
    )
    quantized = np.clip(_round_half_away(rgb * 255.0), 0, 255).astype(np.uint8)
    r, g, b = quantized[0]
    return int(r), int(g), int(b)


def _check_dims(image: Image, mask: Mask) -> None:
    if (image.height, image.width) != (mask.height, mask.width):
        raise DimensionMismatchError(
            f"mask {mask.width}x{mask.height} does not match "
            f"image {image.width}x{image.height}"
        )


def adjust(image: Image, mask: Mask, attribute: Attribute, value: EditValue) -> Image:
    """Apply one attribute adjustment to the member pixels of ``image``.

    Returns a new image; the input is untouched and non-member pixels are
    copied bit-exactly.
    """
    _check_dims(image, mask)
    if value.magnitude == 0:
        # Every transfer function is the identity at v = 0; skipping the
        # color-space round trip keeps the result bit-exact.
        return Image(image.pixels)
    v = value.magnitude / 100.0
    out = np.array(image.pixels, copy=True)
    sel = np.asarray(mask.membership)
    if not sel.any():
        return Image(out)
    region = out[sel].astype(np.float64)

    if attribute is Attribute.BRIGHTNESS:
        delta = float(_round_half_away(np.float64(v * 255.0)))
        result = region + delta
    elif attribute is Attribute.CONTRAST:
        result = _round_half_away((region - 127.5) * (1.0 + v) + 127.5)
    else:
        h, s, l = _rgb_to_hsl_arrays(region / 255.0)
        if attribute is Attribute.HUE:
            h = np.mod(h + v * 180.0, 360.0)
        elif attribute is Attribute.SATURATION:
            s = np.clip(s * (1.0 + v), 0.0, 1.0)
        else:  # lightness: blend toward white for v > 0, scale toward black for v < 0
            if v >= 0.0:
                l = l + v * (1.0 - l)
            else:
                l = l * (1.0 + v)
        result = _round_half_away(_hsl_to_rgb_arrays(h, s, l) * 255.0)

    out[sel] = np.clip(result, 0, 255).astype(np.uint8)
    return Image(out)


def render_overlay(image: Image, mask: Mask) -> Image:
    """Alpha-blend the highlight color over member pixels (alpha 0.4)."""
    _check_dims(image, mask)
    out = np.array(image.pixels, copy=True)
    sel = np.asarray(mask.membership)
    if not sel.any():
        return Image(out)
    region = out[sel].astype(np.float64)
    highlight = np.asarray(HIGHLIGHT_COLOR, dtype=np.float64)
    blended = _round_half_away(
        (1.0 - HIGHLIGHT_ALPHA) * region + HIGHLIGHT_ALPHA * highlight
    )
    out[sel] = np.clip(blended, 0, 255).astype(np.uint8)
    return Image(out)
