"""Radon barcodes: per-angle binarized projections and their comparison.

Each projection is thresholded at the median of its nonzero bins (lower
median for even counts), giving one bit fragment per angle; fragments are
concatenated in ascending-angle order into a single bit string.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image_io import GrayImage
from .radon import AngleSet, sinogram

STRIPE_HEIGHT = 16


@dataclass(frozen=True)
class RadonBarcode:
    """Bit fragments (one per angle, all the same length) plus their angles."""

    angles: AngleSet
    fragments: np.ndarray = field(repr=False)  # (n_angles, L) of 0/1

    def __post_init__(self):
        frag = np.asarray(self.fragments, dtype=np.uint8)
        if frag.ndim != 2 or frag.shape[0] != len(self.angles):
            raise ValueError(f"expected {len(self.angles)} fragments, got shape {frag.shape}")
        if not np.all((frag == 0) | (frag == 1)):
            raise ValueError("fragments must contain only 0/1 bits")
        frag = frag.copy()  # detach from the caller's buffer before freezing
        frag.flags.writeable = False
        object.__setattr__(self, "fragments", frag)

    @property
    def fragment_length(self) -> int:
        return self.fragments.shape[1]

    @property
    def total_bits(self) -> int:
        return self.fragments.size

    def bits(self) -> np.ndarray:
        """Fragment-major flattening, matching the rendered bit string."""
        return self.fragments.ravel()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RadonBarcode):
            return NotImplemented
        return self.angles == other.angles and np.array_equal(self.fragments, other.fragments)


def binarize_projection(p: np.ndarray) -> np.ndarray:
    """Threshold at the median of the nonzero bins; all-zero input stays all-zero.

    For an even count of nonzero bins the lower median (sorted index
    (k-1)//2) is used, and the comparison is >=, so scaling the projection
    by any positive factor leaves the bits unchanged.
    """
    p = np.asarray(p, dtype=np.float64)
    nonzero = p[p != 0.0]
    if nonzero.size == 0:
        return np.zeros(p.shape, dtype=np.uint8)
    threshold = np.sort(nonzero)[(nonzero.size - 1) // 2]
    return (p >= threshold).astype(np.uint8)


def generate_barcode(img: GrayImage, angles: AngleSet) -> RadonBarcode:
    """Binarize every projection of ``img`` and assemble the fragments."""
    s = sinogram(img, angles)
    fragments = np.stack([binarize_projection(row) for row in s.bins])
    return RadonBarcode(angles=angles, fragments=fragments)


def hamming_distance(a: RadonBarcode, b: RadonBarcode) -> int:
    """Number of differing bits; requires identical angle sets and bit counts."""
    if a.angles != b.angles:
        raise ValueError("barcodes were generated from different angle sets")
    if a.fragments.shape != b.fragments.shape:
        raise ValueError(f"barcode shapes differ: {a.fragments.shape} vs {b.fragments.shape}")
    return int(np.count_nonzero(a.fragments != b.fragments))


def barcode_to_text(b: RadonBarcode) -> str:
    """Canonical one-line form: semicolon-separated angles, '|', bit string."""
    angles = ";".join(repr(a) for a in b.angles)
    bits = "".join("1" if v else "0" for v in b.bits())
    return f"{angles}|{bits}"


def barcode_from_text(line: str) -> RadonBarcode:
    head, _, bits = line.strip().partition("|")
    if not bits:
        raise ValueError("not a barcode line (missing '|' separator)")
    angles = AngleSet(float(a) for a in head.split(";"))
    if len(bits) % len(angles) != 0:
        raise ValueError(f"{len(bits)} bits do not divide into {len(angles)} fragments")
    flat = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return RadonBarcode(angles=angles, fragments=flat.reshape(len(angles), -1))


def render_barcode(b: RadonBarcode, path: str | os.PathLike) -> None:
    """Write the stripe image (PGM, bit 1 = black) plus a '.txt' sidecar line."""
    path = Path(path)
    stripe = np.where(b.bits()[None, :] == 1, 0, 255).astype(np.uint8)
    stripe = np.repeat(stripe, STRIPE_HEIGHT, axis=0)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (b.total_bits, STRIPE_HEIGHT))
        fh.write(stripe.tobytes())
    path.with_suffix(".txt").write_text(barcode_to_text(b) + "\n")
