"""Grayscale image loading, resampling, and synthetic phantoms.

Images are carried as 2-D float64 matrices with intensities in [0, 1] so that
projection sums and correlation scores do not depend on the source bit depth.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

DEFAULT_WORKING_SIZE = 32

PHANTOM_KINDS = ("shepp-logan", "disk", "square", "gradient")

# Ellipse table of the standard high-contrast head phantom:
# (additive value, half-axis a, half-axis b, center x0, center y0, tilt degrees)
# on the unit square [-1, 1] x [-1, 1].
_HEAD_PHANTOM_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


@dataclass(frozen=True)
class GrayImage:
    """Immutable grayscale image; ``pixels`` is a row-major (height, width) matrix."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"pixels must be a non-empty 2-D matrix, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixel intensities must lie in [0, 1]")
        px = px.copy()  # detach from the caller's buffer before freezing
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def is_square(self) -> bool:
        return self.width == self.height


def load_image(path: str | os.PathLike) -> GrayImage:
    """Load a PNG/PGM/BMP file as a GrayImage.

    Color inputs are reduced to luminance; integer samples are mapped to
    [0, 1] by dividing by the sample-type maximum (255 for 8-bit input).
    """
    try:
        with Image.open(path) as im:
            im.load()
            if im.width == 0 or im.height == 0:
                raise ValueError(f"zero-dimension image: {path}")
            if im.mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif im.mode == "F":
                arr = np.clip(np.asarray(im, dtype=np.float64), 0.0, 1.0)
            else:
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise ValueError(f"unsupported image format: {path}") from exc
    return GrayImage(arr)


def save_pgm(img: GrayImage, path: str | os.PathLike) -> None:
    """Write a binary PGM (maxval 255); intensities quantized by rounding."""
    data = np.rint(img.pixels * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.width, img.height))
        fh.write(data.tobytes())


def _resample_weights(n_src: int, n_dst: int) -> np.ndarray:
    """1-D resampling operator (n_dst x n_src): box average when shrinking,
    center-aligned linear interpolation when enlarging, identity otherwise.

    Rows are convex weights, so constants and the [0, 1] range are preserved.
    """
    if n_dst == n_src:
        return np.eye(n_src)
    w = np.zeros((n_dst, n_src))
    if n_dst < n_src:
        scale = n_src / n_dst
        for i in range(n_dst):
            lo, hi = i * scale, (i + 1) * scale
            j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
            for j in range(j0, min(j1, n_src)):
                overlap = min(hi, j + 1) - max(lo, j)
                if overlap > 0:
                    w[i, j] = overlap / scale
    else:
        scale = n_src / n_dst
        for i in range(n_dst):
            x = (i + 0.5) * scale - 0.5
            x = min(max(x, 0.0), n_src - 1.0)
            j = int(np.floor(x))
            f = x - j
            w[i, j] += 1.0 - f
            if f > 0:
                w[i, j + 1] += f
    return w


def normalize(img: GrayImage, r_n: int, c_n: int) -> GrayImage:
    """Resample to r_n rows by c_n columns (the working resolution)."""
    if r_n < 1 or c_n < 1:
        raise ValueError(f"degenerate target size {r_n}x{c_n}")
    if img.height == r_n and img.width == c_n:
        return img
    wr = _resample_weights(img.height, r_n)
    wc = _resample_weights(img.width, c_n)
    out = wr @ img.pixels @ wc.T
    return GrayImage(np.clip(out, 0.0, 1.0))


def make_phantom(kind: str, size: int) -> GrayImage:
    """Deterministic synthetic test image of the given square size."""
    if size < 2:
        raise ValueError(f"phantom size must be >= 2, got {size}")
    if kind == "disk":
        ctr = (size - 1) / 2.0
        radius = 0.375 * size
        r, c = np.ogrid[:size, :size]
        return GrayImage(((r - ctr) ** 2 + (c - ctr) ** 2 <= radius**2).astype(np.float64))
    if kind == "square":
        out = np.zeros((size, size))
        lo, hi = size // 4, size - size // 4
        out[lo:hi, lo:hi] = 1.0
        return GrayImage(out)
    if kind == "gradient":
        row = np.arange(size) / (size - 1)
        return GrayImage(np.repeat(row[:, None], size, axis=1))
    if kind == "shepp-logan":
        return GrayImage(_shepp_logan(size))
    raise ValueError(f"unknown phantom kind: {kind!r} (choose from {', '.join(PHANTOM_KINDS)})")


_SHEPP_SUPERSAMPLE = 4  # 4x4 area samples per pixel; hard-edged rendering aliases


def _shepp_logan(size: int) -> np.ndarray:
    ss = _SHEPP_SUPERSAMPLE
    ctr = (size - 1) / 2.0
    coords = (np.arange(size * ss) + 0.5) / ss - 0.5  # subpixel centers, pixel units
    xs = (coords - ctr) / ctr
    x = np.tile(xs, (size * ss, 1))
    y = -x.T  # y axis points up
    out = np.zeros((size * ss, size * ss))
    for value, a, b, x0, y0, tilt in _HEAD_PHANTOM_ELLIPSES:
        phi = np.radians(tilt)
        xr = (x - x0) * np.cos(phi) + (y - y0) * np.sin(phi)
        yr = -(x - x0) * np.sin(phi) + (y - y0) * np.cos(phi)
        out[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    out = out.reshape(size, ss, size, ss).mean(axis=(1, 3))
    return np.clip(out, 0.0, 1.0)
