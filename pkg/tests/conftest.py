"""Shared fixtures: independent compositing oracles and synthetic paintings.

The oracle implementations here are deliberately plain loops over the
blending recurrence so package code is always checked against an
independently written reference.
"""

from __future__ import annotations

import numpy as np
import pytest


def oracle_composite_pixel(colors, alphas):
    """Reference "over" blend of one pixel: bottom-to-top, one layer at a time.

    ``colors`` rows are background plus layer colors (any channel count);
    ``alphas`` has one opacity per layer.
    """
    out = np.asarray(colors[0], dtype=np.float64).copy()
    for a, color in zip(alphas, colors[1:]):
        out = a * np.asarray(color, dtype=np.float64) + (1.0 - a) * out
    return out


def oracle_composite_image(colors, alpha_planes):
    """Reference composite of a whole image from (n, H, W) alpha planes."""
    colors = np.asarray(colors, dtype=np.float64)
    alpha_planes = np.asarray(alpha_planes, dtype=np.float64)
    n, h, w = alpha_planes.shape
    out = np.empty((h, w, colors.shape[1]))
    for y in range(h):
        for x in range(w):
            out[y, x] = oracle_composite_pixel(colors, alpha_planes[:, y, x])
    return out


def smooth_blob(shape, center, inner_radius, outer_radius):
    """Alpha plane that is 1 inside inner_radius, 0 outside outer_radius,
    with a smoothstep ramp between."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    dist = np.hypot(yy - center[0], xx - center[1])
    t = np.clip((outer_radius - dist) / (outer_radius - inner_radius), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


# A deliberately fat tetrahedron: near-coplanar palettes starve the hull's
# side faces of surface area and make plane fitting ill-posed.
FOUR_COLORS = np.array(
    [
        [24.0, 28.0, 42.0],     # dark blue-gray background
        [222.0, 56.0, 48.0],    # red
        [54.0, 196.0, 84.0],    # green
        [58.0, 94.0, 230.0],    # blue
    ]
)

FIVE_COLORS = np.array(
    [
        [16.0, 16.0, 20.0],
        [218.0, 44.0, 48.0],
        [40.0, 190.0, 90.0],
        [56.0, 90.0, 228.0],
        [240.0, 236.0, 230.0],
    ]
)


def synthetic_alpha_planes(shape, n_layers):
    """Smooth alpha blobs in separated corners, each with a saturated core.

    The saturated plateaus guarantee every pure palette color appears in the
    composited image, which pins the pixel cloud's hull to the true colors.
    """
    h, w = shape
    anchors = [
        (0.25, 0.25),
        (0.25, 0.75),
        (0.75, 0.25),
        (0.75, 0.75),
        (0.5, 0.5),
    ]
    # Outer radii overlap between adjacent blobs (multi-layer blends) while
    # every core stays untouched by the other blobs (pure palette colors).
    inner = 0.11 * min(h, w)
    outer = 0.30 * min(h, w)
    planes = np.stack(
        [
            smooth_blob((h, w), (anchors[i][0] * h, anchors[i][1] * w), inner, outer)
            for i in range(n_layers)
        ]
    )
    return planes


def synthetic_painting(shape=(128, 128), colors=FOUR_COLORS):
    """Forward-composited test painting with known colors and smooth alphas.

    Returns (image float64 HxWx3, colors, alpha_planes).
    """
    planes = synthetic_alpha_planes(shape, len(colors) - 1)
    image = oracle_composite_image(colors, planes)
    return image, colors, planes


@pytest.fixture(scope="session")
def four_color_painting():
    return synthetic_painting(shape=(128, 128), colors=FOUR_COLORS)


@pytest.fixture(scope="session")
def small_four_color_painting():
    return synthetic_painting(shape=(64, 64), colors=FOUR_COLORS)


@pytest.fixture(scope="session")
def five_color_painting():
    return synthetic_painting(shape=(100, 64), colors=FIVE_COLORS)
