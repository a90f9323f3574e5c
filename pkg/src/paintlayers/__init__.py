"""Decompose digital paintings into ordered stacks of translucent layers."""

from .compositor import LayerStack, composite_stack, quantize_to_uint8, reconstruction_error, recolor
from .energy import (
    AlphaStack,
    OrderedPalette,
    composite_from_alphas,
    energy_opaque,
    energy_polynomial,
    energy_spatial,
    total_energy_and_gradient,
)
from .errors import (
    DecompositionError,
    DegenerateGeometryError,
    EmptyRegionError,
    ManifestError,
    NonFiniteEnergyError,
    PixelOutsideSimplexError,
    SolveCancelled,
    UnboundedRegionError,
    UnsupportedImageError,
)
from .geometry import (
    ColorCloud,
    Polytope,
    SurfaceSamples,
    collect_pixel_colors,
    coverage_fraction,
    exact_convex_hull,
    sample_hull_surface,
)
from .palette import (
    OrientedPlane,
    Palette,
    SimplifyParams,
    halfspace_intersection,
    mean_shift_merge,
    position_planes,
    ransac_planes,
    remove_color,
    simplify_palette,
)
from .solver import SolveOptions, direct_solve_pixel, solve_alphas
from .stack_io import Manifest, image_hash, load_image, load_layerstack, save_layerstack

__version__ = "0.1.0"

__all__ = [
    "AlphaStack",
    "ColorCloud",
    "DecompositionError",
    "DegenerateGeometryError",
    "EmptyRegionError",
    "LayerStack",
    "Manifest",
    "ManifestError",
    "NonFiniteEnergyError",
    "OrderedPalette",
    "OrientedPlane",
    "Palette",
    "PixelOutsideSimplexError",
    "Polytope",
    "SimplifyParams",
    "SolveCancelled",
    "SolveOptions",
    "SurfaceSamples",
    "UnboundedRegionError",
    "UnsupportedImageError",
    "collect_pixel_colors",
    "composite_from_alphas",
    "composite_stack",
    "coverage_fraction",
    "direct_solve_pixel",
    "energy_opaque",
    "energy_polynomial",
    "energy_spatial",
    "exact_convex_hull",
    "halfspace_intersection",
    "image_hash",
    "load_image",
    "load_layerstack",
    "mean_shift_merge",
    "position_planes",
    "quantize_to_uint8",
    "ransac_planes",
    "recolor",
    "reconstruction_error",
    "remove_color",
    "sample_hull_surface",
    "save_layerstack",
    "simplify_palette",
    "solve_alphas",
    "total_energy_and_gradient",
]
