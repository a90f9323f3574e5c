"""Opacity energies and their analytic gradients.

The solve objective is reconstruction + w_opaque * opacity prior +
w_spatial * smoothness prior, all in 0-255 color units so the
reconstruction term carries its natural 8-bit weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODE_RGB = "rgb"
MODE_RGBA = "rgba-premultiplied"


@dataclass(frozen=True)
class OrderedPalette:
    """Palette colors in compositing order; row 0 is the background.

    In RGBA mode the background composites as the transparent zero vector
    and the layer colors as opaque 4-channel colors.
    """

    colors: np.ndarray  # (n+1, 3) float64 in [0, 255]
    mode: str = MODE_RGB

    def __post_init__(self):
        colors = np.asarray(self.colors, dtype=np.float64)
        if colors.ndim != 2 or colors.shape[1] != 3:
            raise ValueError(f"palette colors must be (n+1, 3), got {colors.shape}")
        if len(colors) < 2:
            raise ValueError("need a background and at least one layer color")
        if colors.min() < 0 or colors.max() > 255:
            raise ValueError("palette colors must lie in [0, 255]")
        if self.mode not in (MODE_RGB, MODE_RGBA):
            raise ValueError(f"unknown palette mode {self.mode!r}")
        object.__setattr__(self, "colors", colors)

    @property
    def layer_count(self) -> int:
        return len(self.colors) - 1

    @property
    def channel_count(self) -> int:
        return 3 if self.mode == MODE_RGB else 4

    def blend_colors(self) -> np.ndarray:
        """Effective compositing vectors, (n+1, channels)."""
        if self.mode == MODE_RGB:
            return self.colors
        out = np.full((len(self.colors), 4), 255.0)
        out[:, :3] = self.colors
        out[0] = 0.0
        return out


@dataclass(frozen=True)
class AlphaStack:
    """Per-layer opacity planes aligned with an OrderedPalette's layers."""

    planes: np.ndarray  # (n, H, W) float64 in [0, 1]

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3:
            raise ValueError(f"alpha planes must be (n, H, W), got {planes.shape}")
        if planes.min() < 0 or planes.max() > 1:
            raise ValueError("alpha values must lie in [0, 1]")
        object.__setattr__(self, "planes", planes)

    @property
    def layer_count(self) -> int:
        return len(self.planes)

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]


def closed_form_composite(alphas: np.ndarray, palette: OrderedPalette) -> np.ndarray:
    """Composite colors, directly from the expanded product form.

    ``alphas`` is (n, ...) with layer index first; the result appends the
    channel axis to the trailing shape.
    """
    colors = palette.blend_colors()
    n = palette.layer_count
    if alphas.shape[0] != n:
        raise ValueError(f"expected {n} alpha planes, got {alphas.shape[0]}")
    u = 1.0 - alphas
    out = np.broadcast_to(colors[n], alphas.shape[1:] + (colors.shape[1],)).copy()
    suffix = np.ones(alphas.shape[1:])
    for a in range(n - 1, -1, -1):
        suffix = suffix * u[a]
        out += (colors[a] - colors[a + 1]) * suffix[..., None]
    return out


def composite_from_alphas(pixel_alphas: np.ndarray, palette: OrderedPalette) -> np.ndarray:
    """Composite a single pixel from its per-layer opacities."""
    alphas = np.asarray(pixel_alphas, dtype=np.float64).reshape(-1, 1)
    return closed_form_composite(alphas, palette)[0]


def energy_polynomial(pixel: np.ndarray, pixel_alphas: np.ndarray, palette: OrderedPalette) -> float:
    """Squared reconstruction residual of one pixel, in 0-255 units."""
    diff = composite_from_alphas(pixel_alphas, palette) - np.asarray(pixel, dtype=np.float64)
    return float(diff @ diff)


def energy_opaque(pixel_alphas: np.ndarray) -> float:
    """Translucency prior for one pixel: sum of -(1 - alpha)^2."""
    u = 1.0 - np.asarray(pixel_alphas, dtype=np.float64)
    return float(-(u * u).sum())


def _neighbor_context(shape: tuple[int, int]) -> np.ndarray:
    """Number of 4-neighbors per pixel (2 at corners, 0 only on a 1x1 grid)."""
    h, w = shape
    cnt = np.zeros((h, w))
    cnt[1:, :] += 1
    cnt[:-1, :] += 1
    cnt[:, 1:] += 1
    cnt[:, :-1] += 1
    return cnt


def _neighbor_sum(x: np.ndarray) -> np.ndarray:
    s = np.zeros_like(x)
    s[1:, :] += x[:-1, :]
    s[:-1, :] += x[1:, :]
    s[:, 1:] += x[:, :-1]
    s[:, :-1] += x[:, 1:]
    return s


def _laplacian(plane: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Pixel value minus the mean of its available 4-neighbors."""
    if plane.size == 1:
        return np.zeros_like(plane)
    return plane - _neighbor_sum(plane) / counts


def energy_spatial(alpha_plane: np.ndarray) -> float:
    """Smoothness prior: squared Laplacian summed over the plane.

    Boundary pixels average over their existing neighbors only; a 1x1 plane
    contributes zero.
    """
    plane = np.asarray(alpha_plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError(f"alpha plane must be 2D, got shape {plane.shape}")
    if plane.size == 1:
        return 0.0
    lap = _laplacian(plane, _neighbor_context(plane.shape))
    return float((lap * lap).sum())


def _spatial_gradient(plane: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Gradient of energy_spatial: 2 L^T (L x) with L the averaged Laplacian."""
    if plane.size == 1:
        return np.zeros_like(plane)
    lap = _laplacian(plane, counts)
    return 2.0 * (lap - _neighbor_sum(lap / counts))


def total_energy_and_gradient(
    image: np.ndarray,
    palette: OrderedPalette,
    alphas: np.ndarray,
    w_opaque: float,
    w_spatial: float,
) -> tuple[float, np.ndarray]:
    """Combined energy over an image and its exact gradient w.r.t. every alpha.

    ``image`` is (H, W, C) with C matching the palette mode; ``alphas`` is
    (n, H, W). Returns (energy, gradient of the same shape as alphas).
    """
    image = np.asarray(image, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    n = palette.layer_count
    if alphas.shape != (n,) + image.shape[:2]:
        raise ValueError(
            f"alphas shape {alphas.shape} does not match {n} layers over {image.shape[:2]}"
        )
    colors = palette.blend_colors()
    if image.shape[2] != colors.shape[1]:
        raise ValueError(
            f"image has {image.shape[2]} channels but palette mode implies {colors.shape[1]}"
        )

    u = 1.0 - alphas
    h, w = image.shape[:2]

    # Suffix products of (1 - alpha): suffix[a] = prod_{b >= a} u_b, suffix[n] = 1.
    suffix = np.ones((n + 1, h, w))
    for a in range(n - 1, -1, -1):
        suffix[a] = suffix[a + 1] * u[a]

    deltas = colors[:-1] - colors[1:]  # (n, C); row a is c_a - c_{a+1}
    composite = np.broadcast_to(colors[n], image.shape).copy()
    composite += np.einsum("ac,ahw->hwc", deltas, suffix[:-1])
    residual = composite - image

    energy = float((residual * residual).sum())
    grad = np.empty_like(alphas)

    # d composite / d alpha_a = -(running sum of deltas weighted by the
    # products between them) * (suffix product above layer a).
    running = np.broadcast_to(deltas[0], image.shape).copy()
    grad[0] = -2.0 * np.einsum("hwc,hwc->hw", residual, running) * suffix[1]
    for a in range(1, n):
        running *= u[a - 1][..., None]
        running += deltas[a]
        grad[a] = -2.0 * np.einsum("hwc,hwc->hw", residual, running) * suffix[a + 1]

    if w_opaque != 0.0:
        energy += w_opaque * float(-(u * u).sum())
        grad += w_opaque * 2.0 * u

    if w_spatial != 0.0 and h * w > 1:
        counts = _neighbor_context((h, w))
        for a in range(n):
            lap = _laplacian(alphas[a], counts)
            energy += w_spatial * float((lap * lap).sum())
            grad[a] += w_spatial * 2.0 * (lap - _neighbor_sum(lap / counts))

    return energy, grad
