"""The optimization objective: correlation between an image and its
restricted-angle reconstruction.

Correlation is plain Pearson correlation over all pixels.  When either side
has zero variance the score is undefined; that condition is carried
explicitly (never encoded as a number) and ranks below every defined score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_io import GrayImage
from .radon import AngleSet, sinogram
from .reconstruct import Reconstruction, inverse_radon


@dataclass(frozen=True)
class CorrelationScore:
    """Pearson correlation in [-1, 1], or None when undefined (zero variance)."""

    value: float | None

    def __post_init__(self):
        if self.value is not None:
            v = float(self.value)
            if not math.isfinite(v) or not (-1.0 <= v <= 1.0):
                raise ValueError(f"correlation {v} outside [-1, 1]")
            object.__setattr__(self, "value", v)

    @property
    def is_defined(self) -> bool:
        return self.value is not None

    def ranking_value(self) -> float:
        """Orderable stand-in: undefined scores sort below all defined ones."""
        return self.value if self.value is not None else -math.inf


UNDEFINED_SCORE = CorrelationScore(None)


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, GrayImage):
        return obj.pixels
    if isinstance(obj, Reconstruction):
        return obj.values
    return np.asarray(obj, dtype=np.float64)


def correlation(f, fhat) -> CorrelationScore:
    """Pearson correlation of two equally-sized matrices (GrayImage,
    Reconstruction, or plain array)."""
    a = _as_matrix(f)
    b = _as_matrix(fhat)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    var_a = float(np.dot(da.ravel(), da.ravel()))
    var_b = float(np.dot(db.ravel(), db.ravel()))
    if var_a == 0.0 or var_b == 0.0:
        return UNDEFINED_SCORE
    c = float(np.dot(da.ravel(), db.ravel())) / math.sqrt(var_a * var_b)
    # guard against float residue just outside [-1, 1]
    return CorrelationScore(min(1.0, max(-1.0, c)))


def reconstruction_fitness(img: GrayImage, angles: AngleSet) -> CorrelationScore:
    """Correlation between ``img`` and its reconstruction from ``angles`` only.

    This is the single objective shared by both the exhaustive and the
    evolutionary angle searches; the angle ordering does not matter because
    AngleSet canonicalizes it.
    """
    if not img.is_square:
        raise ValueError("fitness is defined on the square working resolution")
    rec = inverse_radon(sinogram(img, angles), img.width)
    return correlation(img, rec)
