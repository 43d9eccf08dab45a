"""Procedural color-mosaic dataset for benchmarks and demos.

Each category owns a palette of four hue anchors drawn from a shared
eight-anchor wheel; palettes overlap pairwise in up to three anchors, so
single-region color evidence is ambiguous between categories while the
full hue combination identifies one.  An image is a Voronoi mosaic of
jittered palette hues with noisy saturation/value, occasional distractor
regions from outside the palette, and a global exposure variant.  Images
of one category therefore share a color-pattern family but spread widely
in feature space, which keeps feedback sessions from converging trivially.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

# bin centers of every other 22.5-degree hue bin
HUE_ANCHORS = 11.25 + 45.0 * np.arange(8)

# four anchors per category, overlapping at most two between categories
CATEGORY_PALETTES = (
    (0, 1, 2, 3),
    (0, 1, 4, 5),
    (0, 1, 6, 7),
    (2, 3, 4, 5),
    (2, 3, 6, 7),
    (4, 5, 6, 7),
    (0, 2, 4, 6),
    (1, 3, 5, 7),
    (0, 2, 5, 7),
    (1, 3, 4, 6),
)

EXPOSURE_VARIANTS = (1.0,)
DISTRACTOR_PROB = 0.05  # chance a spare cell takes a hue outside the palette
WASH_PROB = 0.2  # chance an image is nearly monochrome in its dominant hue
CHAMELEON_PROB = 0.3  # chance an image borrows whole regions of foreign hues
MAX_BORROWED = 2


def hsv_to_rgb_array(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse hexcone conversion; h in degrees, s and v in [0, 1]."""
    c = v * s
    hp = (np.asarray(h, dtype=np.float64) % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    sector = np.floor(hp).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    r1 = np.choose(sector, [c, x, zeros, zeros, x, c])
    g1 = np.choose(sector, [x, c, c, x, zeros, zeros])
    b1 = np.choose(sector, [zeros, zeros, x, c, c, x])
    m = v - c
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=-1)
    return np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)


def generate_image(
    rng: np.random.Generator, category: int, size: int = 256
) -> np.ndarray:
    """One RGB mosaic image of the given category's palette."""
    palette = np.array(CATEGORY_PALETTES[category])
    active = palette
    dominant = rng.choice(active)

    n_cells = int(rng.integers(8, 17))
    points = rng.uniform(0, size, size=(n_cells, 2))
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (yy[..., None] - points[:, 0]) ** 2 + (xx[..., None] - points[:, 1]) ** 2
    cell = d2.argmin(axis=-1)

    # every palette hue appears at least once; chameleon images also carry
    # one or two full-size regions borrowed from outside the palette, which
    # pollutes the global histogram while the palette set stays present
    borrowed = np.empty(0, dtype=palette.dtype)
    if rng.random() < CHAMELEON_PROB:
        foreign = np.setdiff1d(np.arange(len(HUE_ANCHORS)), palette)
        n_borrow = 1 if rng.random() < 0.55 else MAX_BORROWED
        picks = rng.choice(foreign, size=n_borrow, replace=False)
        borrowed = np.repeat(picks, rng.integers(1, 3, len(picks)))
        borrowed = borrowed[: max(0, n_cells - len(active) - 2)]

    # spare cells lean towards the image's dominant hue; washed images are
    # nearly monochrome, which collapses their global histogram onto the
    # dominant anchor while every palette hue still owns a full region
    p_dominant = rng.uniform(0.8, 1.0) if rng.random() < WASH_PROB else rng.uniform(0.2, 0.5)
    n_spare = n_cells - len(active) - len(borrowed)
    spares = np.where(
        rng.random(n_spare) < p_dominant,
        dominant,
        rng.choice(active, size=n_spare),
    )
    distract = rng.random(len(spares)) < DISTRACTOR_PROB
    spares[distract] = rng.integers(0, len(HUE_ANCHORS), distract.sum())
    anchors = np.concatenate([rng.permutation(active), borrowed, spares])

    cell_hue = HUE_ANCHORS[anchors] + np.clip(rng.normal(0.0, 3.0, n_cells), -7.0, 7.0)
    # saturation/value are image-wide moods, not per-region: hue regions
    # stay internally coherent, while images of one category still spread
    # over exposure variants
    cell_sat = rng.uniform(0.72, 0.93) + rng.uniform(-0.03, 0.03, n_cells)
    cell_val = rng.uniform(0.72, 0.93) + rng.uniform(-0.03, 0.03, n_cells)

    h = cell_hue[cell] + np.clip(rng.normal(0.0, 2.5, (size, size)), -5.0, 5.0)
    s = np.clip(cell_sat[cell] + rng.normal(0.0, 0.02, (size, size)), 0.05, 1.0)
    v = cell_val[cell] + rng.normal(0.0, 0.02, (size, size))
    v = np.clip(v * rng.choice(EXPOSURE_VARIANTS), 0.05, 1.0)
    return hsv_to_rgb_array(h % 360.0, s, v)


def generate_dataset(
    root: str | Path,
    categories: int = 10,
    per_category: int = 50,
    size: int = 256,
    seed: int = 0,
) -> list[tuple[Path, int]]:
    """Write a category-per-subdirectory PNG tree; returns (path, category)
    pairs.  Fully determined by the seed."""
    if categories > len(CATEGORY_PALETTES):
        raise ValueError(f"at most {len(CATEGORY_PALETTES)} categories available")
    root = Path(root)
    written: list[tuple[Path, int]] = []
    for cat in range(categories):
        cat_dir = root / f"cat_{cat:02d}"
        cat_dir.mkdir(parents=True, exist_ok=True)
        for idx in range(per_category):
            rng = np.random.default_rng(np.random.SeedSequence([seed, cat, idx]))
            rgb = generate_image(rng, cat, size)
            path = cat_dir / f"img_{idx:04d}.png"
            Image.fromarray(rgb).save(path)
            written.append((path, cat))
    return written
