"""Layer stacks: sequential "over" recomposition, error metrics, recoloring.

Compositing stays in float and quantizes once (round half up) at export, so
the sequential loop here and the closed-form expression in the energy module
agree to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .energy import AlphaStack, OrderedPalette
from .solver import SolveOptions


@dataclass(frozen=True)
class LayerStack:
    """An ordered palette plus its solved opacity planes."""

    palette: OrderedPalette
    alphas: AlphaStack
    source_image_hash: str = ""
    params: Optional[SolveOptions] = None

    def __post_init__(self):
        if self.palette.layer_count != self.alphas.layer_count:
            raise ValueError(
                f"palette has {self.palette.layer_count} layers but "
                f"{self.alphas.layer_count} alpha planes were given"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.alphas.shape


def composite_stack(stack: LayerStack) -> np.ndarray:
    """Recompose the stack bottom-to-top with repeated "over" blending.

    Returns a float (H, W, C) image: opaque background fill for RGB stacks,
    premultiplied RGBA over a transparent background otherwise.
    """
    colors = stack.palette.blend_colors()
    h, w = stack.shape
    out = np.broadcast_to(colors[0], (h, w, colors.shape[1])).copy()
    for a in range(stack.palette.layer_count):
        alpha = stack.alphas.planes[a][..., None]
        out = alpha * colors[a + 1] + (1.0 - alpha) * out
    return out


def quantize_to_uint8(image: np.ndarray) -> np.ndarray:
    """Round half up to 8-bit, the single quantization step of the pipeline."""
    return np.clip(np.floor(np.asarray(image, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def reconstruction_error(original: np.ndarray, recomposed: np.ndarray) -> dict:
    """RMSE / max-abs stats between two images, in 8-bit units."""
    original = np.asarray(original, dtype=np.float64)
    recomposed = np.asarray(recomposed, dtype=np.float64)
    if original.shape != recomposed.shape:
        raise ValueError(f"image shapes differ: {original.shape} vs {recomposed.shape}")
    diff = recomposed - original
    per_channel = np.sqrt(np.mean(diff * diff, axis=(0, 1)))
    return {
        "rmse": float(np.sqrt(np.mean(diff * diff))),
        "max_abs": float(np.abs(diff).max()),
        "per_channel_rmse": per_channel.tolist(),
    }


def recolor(stack: LayerStack, layer_index: int, new_color: np.ndarray) -> LayerStack:
    """Swap one palette color (background included); opacities stay untouched."""
    if not 0 <= layer_index <= stack.palette.layer_count:
        raise IndexError(
            f"layer index {layer_index} out of range for {stack.palette.layer_count} layers"
        )
    color = np.asarray(new_color, dtype=np.float64)
    if color.shape != (3,) or color.min() < 0 or color.max() > 255:
        raise ValueError("new color must be 3 channels in [0, 255]")
    colors = stack.palette.colors.copy()
    colors[layer_index] = color
    palette = OrderedPalette(colors=colors, mode=stack.palette.mode)
    return replace(stack, palette=palette)
