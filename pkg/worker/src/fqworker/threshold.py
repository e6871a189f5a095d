"""Model-free HSV threshold segmentation, the worker's integration-test mode.

Pixels are classified straw when hue is 35-75 degrees with value >= 140,
else soil when hue is 10-35 degrees with saturation >= 60, else background.
Hue is in degrees [0, 360); saturation/value use the 0-255 scale. The rules
and defaults match the client-side baseline segmenter bit for bit.
"""

from __future__ import annotations

import numpy as np

BACKGROUND, SOIL, STRAW = 0, 1, 2
CLASS_COUNT = 3

STRAW_HUE_LO, STRAW_HUE_HI = 35.0, 75.0
STRAW_MIN_VALUE = 140.0
SOIL_HUE_LO, SOIL_HUE_HI = 10.0, 35.0
SOIL_MIN_SATURATION = 60.0


def classify(rgb: np.ndarray) -> np.ndarray:
    """Label an (H, W, 3) uint8 image; returns (H, W) uint8 class ids."""
    as_float = rgb.astype(np.float64)
    red, green, blue = as_float[..., 0], as_float[..., 1], as_float[..., 2]
    value = as_float.max(axis=-1)
    chroma = value - as_float.min(axis=-1)

    divisor = np.where(chroma == 0.0, 1.0, chroma)
    hue = np.where(
        value == red,
        (60.0 * (green - blue) / divisor) % 360.0,
        np.where(
            value == green,
            60.0 * (blue - red) / divisor + 120.0,
            60.0 * (red - green) / divisor + 240.0,
        ),
    )
    hue = np.where(chroma == 0.0, 0.0, hue)
    saturation = np.where(value == 0.0, 0.0, 255.0 * chroma / np.where(value == 0.0, 1.0, value))

    is_straw = (hue >= STRAW_HUE_LO) & (hue <= STRAW_HUE_HI) & (value >= STRAW_MIN_VALUE)
    is_soil = (hue >= SOIL_HUE_LO) & (hue <= SOIL_HUE_HI) & (saturation >= SOIL_MIN_SATURATION)
    return np.where(is_straw, STRAW, np.where(is_soil, SOIL, BACKGROUND)).astype(np.uint8)
