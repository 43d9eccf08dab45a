"""Unrestricted segmentation of an image into scattered color segments.

Cuts a mosaic into 4x4 blocks, describes each block with the same 25-d
descriptor used for whole images, clusters the blocks with k-means (k=8,
empty clusters dropped), and paints each block with its segment id.
Segments follow the hue regions even though nothing forces them to be
contiguous.
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from segsearch.color_features import HsvImage
from segsearch.segmentation import block_feature_matrix, kmeans_segment
from segsearch.synthetic import generate_image

out = pathlib.Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

rng = np.random.default_rng(21)
rgb = generate_image(rng, category=3, size=128)
image = HsvImage.from_rgb(rgb)

blocks = block_feature_matrix(image)  # (1024, 25), row-major 4x4 blocks
segments = kmeans_segment(blocks, k=8, seed=1)
print(f"{len(blocks)} blocks -> {len(segments.segments)} segments, "
      f"members {segments.member_counts.tolist()}")

# recover the per-block assignment by nearest centroid (same rule k-means used)
d2 = ((blocks[:, None, :] - segments.segments[None, :, :]) ** 2).sum(-1)
assignment = d2.argmin(1).reshape(32, 32)

fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
axes[0].imshow(rgb)
axes[0].set_title("input")
axes[1].imshow(assignment, cmap="tab10", interpolation="nearest")
axes[1].set_title(f"{len(segments.segments)} block segments")
for ax in axes:
    ax.axis("off")
fig.tight_layout()
fig.savefig(out / "02_segments.png", dpi=110)
print(f"wrote {out / '02_segments.png'}")
