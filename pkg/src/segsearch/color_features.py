"""Quantized-HSV color co-occurrence features.

An image is described by three co-occurrence matrices, one per HSV plane,
built from horizontally and vertically adjacent pixel pairs.  Each matrix
contributes its diagonal (the color distribution) plus one scalar summary
of the off-diagonal mass (edge activity), giving a fixed
16 + 1 + 3 + 1 + 3 + 1 = 25-dimensional descriptor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HUE_LEVELS = 16
SAT_LEVELS = 3
VAL_LEVELS = 3
FEATURE_DIM = HUE_LEVELS + 1 + SAT_LEVELS + 1 + VAL_LEVELS + 1


class NoPixelPairsError(ValueError):
    """Raised when a plane has no horizontally or vertically adjacent pairs."""


@dataclass(frozen=True)
class HsvImage:
    """Per-plane HSV image: hue in degrees [0, 360), s and v in [0, 1]."""

    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h, s, v = (np.asarray(p, dtype=np.float64) for p in (self.h, self.s, self.v))
        if not (h.ndim == 2 and h.shape == s.shape == v.shape):
            raise ValueError("h, s, v must be 2-D arrays of identical shape")
        if h.size == 0:
            raise ValueError("empty image")
        if h.min() < 0.0 or h.max() >= 360.0:
            raise ValueError("hue outside [0, 360)")
        for name, p in (("s", s), ("v", v)):
            if p.min() < 0.0 or p.max() > 1.0:
                raise ValueError(f"{name} outside [0, 1]")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.h.shape[0]

    @property
    def width(self) -> int:
        return self.h.shape[1]

    @classmethod
    def from_rgb(cls, rgb: np.ndarray) -> "HsvImage":
        """Convert an (H, W, 3) uint8 RGB array."""
        h, s, v = rgb_array_to_hsv(rgb)
        return cls(h, s, v)


def rgb_to_hsv(r: int, g: int, b: int) -> tuple[float, float, float]:
    """Hexcone conversion of one 8-bit RGB triple.

    Returns (hue degrees in [0, 360), saturation, value).  Achromatic
    pixels get hue 0; saturation is 0 when value is 0.
    """
    rgb = np.array([[[r, g, b]]], dtype=np.uint8)
    h, s, v = rgb_array_to_hsv(rgb)
    return float(h[0, 0]), float(s[0, 0]), float(v[0, 0])


def rgb_array_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hexcone conversion of an (H, W, 3) uint8 array."""
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    if arr.ndim != 3 or arr.shape[-1] != 3:
        raise ValueError("expected an (H, W, 3) array")
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = arr.max(axis=-1)
    c = v - arr.min(axis=-1)
    s = np.where(v > 0.0, c / np.where(v > 0.0, v, 1.0), 0.0)
    safe = np.where(c > 0.0, c, 1.0)
    h = 60.0 * np.select(
        [c == 0.0, v == r, v == g],
        [0.0, ((g - b) / safe) % 6.0, (b - r) / safe + 2.0],
        default=(r - g) / safe + 4.0,
    )
    # guard the h == 360.0 rounding corner; 360 degrees is the same hue as 0
    h = np.where(h >= 360.0, 0.0, h)
    return h, s, v


def quantize(plane: np.ndarray, lo: float, hi: float, levels: int) -> np.ndarray:
    """Uniform quantization of a real plane into integer levels.

    Bins have width (hi - lo) / levels; a value exactly at hi falls in the
    top bin.  Values outside [lo, hi] raise ValueError.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    x = np.asarray(plane, dtype=np.float64)
    if x.min() < lo or x.max() > hi:
        raise ValueError(f"plane values outside [{lo}, {hi}]")
    width = (hi - lo) / levels
    cells = np.floor((x - lo) / width).astype(np.int64)
    return np.minimum(cells, levels - 1)


def quantize_hsv(image: HsvImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quantize the three planes with the standard (16, 3, 3) levels."""
    return (
        quantize(image.h, 0.0, 360.0, HUE_LEVELS),
        quantize(image.s, 0.0, 1.0, SAT_LEVELS),
        quantize(image.v, 0.0, 1.0, VAL_LEVELS),
    )


def _adjacent_pairs(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All unordered horizontal and vertical neighbor pairs, low level first."""
    a = np.concatenate([cells[:, :-1].ravel(), cells[:-1, :].ravel()])
    b = np.concatenate([cells[:, 1:].ravel(), cells[1:, :].ravel()])
    return np.minimum(a, b), np.maximum(a, b)


def compute_ccm(cells: np.ndarray, levels: int) -> np.ndarray:
    """Symmetric co-occurrence matrix of a quantized plane.

    Each unordered pair of horizontally or vertically adjacent cells is
    counted once and normalized by the total pair count, so the upper
    triangle including the diagonal sums to 1.  Off-diagonal proportions
    are mirrored into both triangles.
    """
    cells = np.asarray(cells)
    if cells.ndim != 2:
        raise ValueError("expected a 2-D plane")
    if cells.min() < 0 or cells.max() >= levels:
        raise ValueError("cell outside [0, levels)")
    height, width = cells.shape
    total = height * (width - 1) + width * (height - 1)
    if total == 0:
        raise NoPixelPairsError("plane has no adjacent pixel pairs")
    lo, hi = _adjacent_pairs(cells)
    counts = np.bincount(lo * levels + hi, minlength=levels * levels)
    p = counts.reshape(levels, levels) / total
    return p + np.triu(p, k=1).T


def offdiag_summary(ccm: np.ndarray) -> float:
    """Scalar summary of off-diagonal mass: sum of (i + j) * p_ij over the
    strict upper triangle, with 1-based row/column indices."""
    levels = ccm.shape[0]
    i, j = np.triu_indices(levels, k=1)
    return float(((i + j + 2) * ccm[i, j]).sum())


def _plane_features(cells: np.ndarray, levels: int) -> np.ndarray:
    ccm = compute_ccm(cells, levels)
    return np.concatenate([np.diagonal(ccm), [offdiag_summary(ccm)]])


def extract_features(image: HsvImage) -> np.ndarray:
    """The 25-dimensional descriptor of an image.

    Layout: 16 hue diagonal entries, hue off-diagonal summary, 3 saturation
    diagonal entries, saturation summary, 3 value diagonal entries, value
    summary.
    """
    qh, qs, qv = quantize_hsv(image)
    return np.concatenate(
        [
            _plane_features(qh, HUE_LEVELS),
            _plane_features(qs, SAT_LEVELS),
            _plane_features(qv, VAL_LEVELS),
        ]
    )
