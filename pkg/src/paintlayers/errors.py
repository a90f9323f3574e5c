"""Exception types shared across the decomposition pipeline."""

from __future__ import annotations

import numpy as np


class DecompositionError(Exception):
    """Base class for recoverable pipeline failures."""


class DegenerateGeometryError(DecompositionError):
    """Color cloud spans fewer than 3 dimensions.

    Carries the affine dimension of the cloud and the extreme points of its
    affine span so callers can short-circuit to a reduced palette.
    """

    def __init__(self, dimension: int, extreme_points: np.ndarray, message: str | None = None):
        self.dimension = dimension
        self.extreme_points = np.asarray(extreme_points, dtype=np.float64)
        super().__init__(
            message or f"color cloud is degenerate (affine dimension {dimension})"
        )


class EmptyRegionError(DecompositionError):
    """Half-space intersection has no interior."""


class UnboundedRegionError(DecompositionError):
    """Half-space intersection is unbounded."""


class PixelOutsideSimplexError(DecompositionError):
    """Pixel cannot be reproduced from the palette simplex."""


class NonFiniteEnergyError(DecompositionError):
    """Objective evaluated to NaN or infinity during a solve."""


class UnsupportedImageError(DecompositionError):
    """Input image format or bit depth is not supported."""


class ManifestError(DecompositionError):
    """Layer-stack directory is missing files or internally inconsistent."""


class SolveCancelled(Exception):
    """Raised inside a solve when the caller requests cancellation."""
