"""Procedural test images with gradients and edges."""

from __future__ import annotations

import numpy as np


def synthetic_image(rng: np.random.Generator, size: int, max_val: int = 255) -> np.ndarray:
    """Seeded grayscale image: diagonal ramp, rectangles, a disk, mild noise.

    Pixel values stay in [0, max_val]; pass a small max_val to keep the top
    bits of every pixel clear.
    """
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = 0.25 * max_val + 0.5 * max_val * (x + y) / (2 * (size - 1))
    for _ in range(3):
        x0, y0 = rng.integers(0, size - 4, size=2)
        w, h = rng.integers(size // 8, size // 2, size=2)
        img[y0:min(size, y0 + h), x0:min(size, x0 + w)] = rng.uniform(0, max_val)
    cx, cy = rng.uniform(size * 0.25, size * 0.75, size=2)
    r = rng.uniform(size * 0.1, size * 0.25)
    img[(x - cx) ** 2 + (y - cy) ** 2 < r * r] = rng.uniform(0, max_val)
    img += rng.uniform(-0.03 * max_val, 0.03 * max_val, size=(size, size))
    return np.clip(np.rint(img), 0, max_val).astype(np.uint8)
