"""Approximate inverse Radon transform by filtered back-projection.

Each projection row is ramp-filtered in the frequency domain (the filter's
frequency response is built from the exact real-space ramp kernel, which
avoids the DC bias of a naive |f| ramp) and smeared back across the pixel
grid with linear interpolation, using the same rotation geometry as the
forward transform.  The angular sum is weighted by pi / (number of angles).

With only a handful of angles the result shows the usual streak artifacts;
output values are intentionally left unclamped, since downstream correlation
scoring is invariant to affine intensity maps.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .radon import Sinogram, bin_count


@dataclass(frozen=True)
class Reconstruction:
    """Square matrix of reconstructed (unclamped) intensities."""

    side: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.side, self.side):
            raise ValueError(f"values shape {v.shape} does not match side {self.side}")
        if not np.all(np.isfinite(v)):
            raise ValueError("reconstruction contains non-finite values")
        v = v.copy()  # detach from the caller's buffer before freezing
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Reconstruction):
            return NotImplemented
        return self.side == other.side and np.array_equal(self.values, other.values)


def _ramp_filter(n_fft: int) -> np.ndarray:
    """Frequency response (rfft layout) of the discrete ramp kernel."""
    kernel = np.zeros(n_fft)
    kernel[0] = 0.25
    odd = np.arange(1, n_fft // 2 + 1, 2)
    kernel[odd] = -1.0 / (np.pi * odd) ** 2
    kernel[-odd] = -1.0 / (np.pi * odd) ** 2
    return 2.0 * np.real(np.fft.rfft(kernel))


def filter_projections(bins: np.ndarray) -> np.ndarray:
    """Ramp-filter every row, zero-padded to the next power of two >= 2L."""
    length = bins.shape[1]
    n_fft = 1 << max(int(math.ceil(math.log2(2 * length))), 1)
    spectrum = np.fft.rfft(bins, n=n_fft, axis=1) * _ramp_filter(n_fft)
    return np.fft.irfft(spectrum, n=n_fft, axis=1)[:, :length]


def inverse_radon(s: Sinogram, side: int) -> Reconstruction:
    """Filtered back-projection of ``s`` onto a side x side grid."""
    if len(s.angles) == 0 or s.bins.size == 0:
        raise ValueError("cannot reconstruct from an empty sinogram")
    if s.bin_length != bin_count(side):
        raise ValueError(
            f"sinogram bin length {s.bin_length} does not match side {side} "
            f"(expected {bin_count(side)})"
        )
    filtered = filter_projections(s.bins)
    ctr = (side - 1) / 2.0
    x = np.arange(side) - ctr
    y = ctr - np.arange(side)
    shift = (s.bin_length - 1) / 2.0
    out = np.zeros((side, side))
    for angle, row in zip(s.angles, filtered):
        t = math.radians(angle)
        pos = y[:, None] * math.sin(t) + x[None, :] * math.cos(t) + shift
        lo = np.floor(pos).astype(np.intp)
        w = pos - lo
        out += row[lo] * (1.0 - w) + row[lo + 1] * w
    out *= math.pi / len(s.angles)
    return Reconstruction(side=side, values=out)


def save_reconstruction_pgm(rec: Reconstruction, path: str | os.PathLike) -> None:
    """Dump for display only: affine rescale to [0, 255] then binary PGM."""
    v = rec.values
    span = v.max() - v.min()
    scaled = np.zeros_like(v) if span == 0 else (v - v.min()) / span
    data = np.rint(scaled * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (rec.side, rec.side))
        fh.write(data.tobytes())
