"""Deterministic photograph-like test image.

Smooth shading, a few soft-edged shapes and mild grain give the locally
correlated, non-uniform histograms of a natural photo without shipping one.
"""

import numpy as np

from .imageio import ImageBuffer, read_image


def synthetic_photo(width: int = 256, height: int = 256, channels: int = 3,
                    seed: int = 7) -> ImageBuffer:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    u, v = xx / max(width - 1, 1), yy / max(height - 1, 1)
    rng = np.random.default_rng(seed)

    planes = []
    for c in range(3):
        base = 60 + 110 * (0.6 * u + 0.4 * v) ** (1.0 + 0.3 * c)
        base += 25 * np.sin(2 * np.pi * (1.5 + c) * u) * np.cos(2 * np.pi * 1.2 * v)
        planes.append(base)
    img = np.stack(planes, axis=-1)

    for _ in range(6):
        cx, cy = rng.uniform(0.15, 0.85, 2)
        rad = rng.uniform(0.06, 0.22)
        tint = rng.uniform(-90, 90, 3)
        d = np.hypot(u - cx, v - cy) / rad
        img += tint * np.clip(1.5 - d, 0.0, 1.0)[..., None]

    img += rng.normal(0.0, 4.0, img.shape)
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    if channels == 1:
        img = np.rint(img @ np.array([0.299, 0.587, 0.114])).astype(np.uint8)
    return ImageBuffer(img)


def load_lena(path) -> ImageBuffer:
    """Load a user-supplied Lena (or any) image for the NPCR/UACI comparison."""
    return read_image(path)
