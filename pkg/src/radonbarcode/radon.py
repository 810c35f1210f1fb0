"""Discrete forward Radon transform over arbitrary sets of projection angles.

Geometry
--------
A square image of side ``s`` is projected along the family of parallel lines
at angle ``theta`` (degrees, measured in [0, 180)).  Pixel (row, col) carries
coordinates x = col - (s-1)/2 and y = (s-1)/2 - row (y axis up), and its mass
is splatted linearly into the two detector bins nearest to

    rho = x*cos(theta) + y*sin(theta).

Every projection uses the same zero-padded bin count L = the smallest odd
integer >= sqrt(2)*s, so the center bin sits on the image center and no pixel
ever falls off the detector.  The two-bin linear splat conserves total mass
exactly: each projection sums to the image pixel sum.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .image_io import GrayImage


@dataclass(frozen=True)
class AngleSet:
    """Ordered, duplicate-free projection angles in degrees, each in [0, 180)."""

    angles: tuple[float, ...]

    def __init__(self, angles: Iterable[float]):
        vals = [float(a) for a in angles]
        if not vals:
            raise ValueError("AngleSet must contain at least one angle")
        for a in vals:
            if not (0.0 <= a < 180.0) or not math.isfinite(a):
                raise ValueError(f"angle {a} out of range [0, 180)")
        object.__setattr__(self, "angles", tuple(sorted(set(vals))))

    def __len__(self) -> int:
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def rounded(self) -> tuple[int, ...]:
        """Angles rounded half-up to whole degrees, for display."""
        return tuple(int(math.floor(a + 0.5)) % 180 for a in self.angles)


@dataclass(frozen=True)
class Sinogram:
    """Stack of projections; ``bins`` has one row of length ``bin_length`` per angle."""

    angles: AngleSet
    bins: np.ndarray = field(repr=False)
    bin_length: int

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.float64)
        if b.ndim != 2 or b.shape != (len(self.angles), self.bin_length):
            raise ValueError(
                f"bins shape {b.shape} does not match {len(self.angles)} angles x {self.bin_length}"
            )
        b = b.copy()  # detach from the caller's buffer before freezing
        b.flags.writeable = False
        object.__setattr__(self, "bins", b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sinogram):
            return NotImplemented
        return self.angles == other.angles and np.array_equal(self.bins, other.bins)


def bin_count(side: int) -> int:
    """Detector length for a side x side image: smallest odd integer >= sqrt(2)*side."""
    n = math.ceil(math.sqrt(2.0) * side)
    return n if n % 2 == 1 else n + 1


def project(img: GrayImage, theta: float) -> np.ndarray:
    """Project a square image along angle ``theta`` (degrees in [0, 180))."""
    if not img.is_square:
        raise ValueError(f"projection requires a square image, got {img.height}x{img.width}")
    if not (0.0 <= theta < 180.0):
        raise ValueError(f"theta {theta} out of range [0, 180)")
    side = img.width
    length = bin_count(side)
    ctr = (side - 1) / 2.0
    t = math.radians(theta)
    x = np.arange(side) - ctr
    y = ctr - np.arange(side)
    # rho per pixel, shifted so bin (L-1)/2 corresponds to rho = 0
    pos = y[:, None] * math.sin(t) + x[None, :] * math.cos(t) + (length - 1) / 2.0
    lo = np.floor(pos).astype(np.intp)
    w = (pos - lo).ravel()
    mass = img.pixels.ravel()
    lo = lo.ravel()
    out = np.bincount(lo, weights=mass * (1.0 - w), minlength=length)
    out += np.bincount(lo + 1, weights=mass * w, minlength=length)
    return out


def sinogram(img: GrayImage, angles: AngleSet) -> Sinogram:
    """Stack projections for every angle in the set, in ascending-angle order."""
    rows = np.stack([project(img, a) for a in angles])
    return Sinogram(angles=angles, bins=rows, bin_length=rows.shape[1])


def equidistant_angles(n_theta: int) -> AngleSet:
    """The n_theta angles {k * 180/n_theta : k = 0 .. n_theta-1}."""
    if not (1 <= n_theta <= 180):
        raise ValueError(f"n_theta must be in [1, 180], got {n_theta}")
    return AngleSet(k * 180.0 / n_theta for k in range(n_theta))


def sinogram_to_csv(s: Sinogram, path: str | os.PathLike) -> None:
    """One row per angle: angle in degrees, then the bin values."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for angle, row in zip(s.angles, s.bins):
            writer.writerow([repr(angle)] + [repr(v) for v in row.tolist()])


def sinogram_from_csv(path: str | os.PathLike) -> Sinogram:
    angles = []
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            angles.append(float(record[0]))
            rows.append([float(v) for v in record[1:]])
    bins = np.asarray(rows)
    return Sinogram(angles=AngleSet(angles), bins=bins, bin_length=bins.shape[1])
