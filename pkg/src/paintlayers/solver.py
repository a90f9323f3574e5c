"""Per-pixel opacity solving: direct geometry for up to 3 layers and a
coarse-to-fine box-constrained quasi-Newton solve for the general case."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.optimize import Bounds, minimize

from .energy import AlphaStack, OrderedPalette, composite_from_alphas, total_energy_and_gradient
from .errors import NonFiniteEnergyError, PixelOutsideSimplexError, SolveCancelled

# progress_sink receives (level index, width, height, AlphaStack, energy) once
# per pyramid level and must return quickly; copy anything kept.
ProgressSink = Callable[[int, int, int, AlphaStack, float], None]


@dataclass(frozen=True)
class SolveOptions:
    """Weights and iteration controls for solve_alphas."""

    w_opaque: float = 100.0
    w_spatial: float = 1000.0
    pyramid_min_dim: int = 32
    init_alpha: float = 0.5
    max_iterations_per_level: int = 500
    gradient_tolerance: float = 1e-5
    convergence: float = 1e-8  # relative energy decrease threshold

    def __post_init__(self):
        if self.w_opaque < 0 or self.w_spatial < 0:
            raise ValueError("energy weights must be >= 0")
        if self.pyramid_min_dim < 1:
            raise ValueError("pyramid_min_dim must be >= 1")
        if not 0.0 <= self.init_alpha <= 1.0:
            raise ValueError("init_alpha must lie in [0, 1]")
        if self.max_iterations_per_level < 1:
            raise ValueError("max_iterations_per_level must be >= 1")


def direct_solve_pixel(pixel: np.ndarray, palette: OrderedPalette) -> np.ndarray:
    """Exact opacities for one pixel when the palette has at most 3 layers.

    Walks top-down: casts a ray from the top color through the pixel onto the
    simplex of the colors below, reads the opacity off the split ratio, and
    recurses on the intersection point. A pixel equal to the top color gets
    that layer fully opaque and everything below transparent.
    """
    colors = palette.blend_colors()
    n = palette.layer_count
    if n > 3:
        raise ValueError("direct solve only supports up to 3 layers")
    p = np.asarray(pixel, dtype=np.float64)
    if p.shape != (colors.shape[1],):
        raise ValueError(f"pixel shape {p.shape} does not match palette channels")

    alphas = np.zeros(n)
    for k in range(n, 0, -1):
        top = colors[k]
        if np.linalg.norm(p - top) < 1e-7:
            alphas[k - 1] = 1.0
            alphas[: k - 1] = 0.0
            break
        # Solve t*(p - top) - sum_i w_i*(c_i - c_0) = c_0 - top in least squares;
        # the ray hits the lower simplex at parameter t >= 1.
        a = np.column_stack([p - top] + [colors[0] - colors[i] for i in range(1, k)])
        rhs = colors[0] - top
        sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        residual = np.linalg.norm(a @ sol - rhs)
        t, weights = sol[0], sol[1:]
        w0 = 1.0 - weights.sum()
        tol = 1e-6
        if residual > tol or t < 1.0 - 1e-9 or w0 < -tol or np.any(weights < -tol):
            raise PixelOutsideSimplexError(
                f"pixel {p.tolist()} is not reachable from the palette simplex"
            )
        alphas[k - 1] = 1.0 - 1.0 / t
        p = top + t * (p - top)

    alphas = np.clip(alphas, 0.0, 1.0)
    check = composite_from_alphas(alphas, palette)
    if np.linalg.norm(check - np.asarray(pixel, dtype=np.float64)) > 1e-6:
        raise PixelOutsideSimplexError(
            f"direct solution fails to reproduce pixel {np.asarray(pixel).tolist()}"
        )
    return alphas


def _box_downsample(image: np.ndarray) -> np.ndarray:
    """Halve both image dimensions with a 2x2 box filter (edge-padded when odd)."""
    h, w = image.shape[:2]
    h2, w2 = (h + 1) // 2, (w + 1) // 2
    pad = [(0, h2 * 2 - h), (0, w2 * 2 - w)] + [(0, 0)] * (image.ndim - 2)
    padded = np.pad(image, pad, mode="edge")
    shaped = padded.reshape((h2, 2, w2, 2) + image.shape[2:])
    return shaped.mean(axis=(1, 3))


def _bilinear_resize(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Resize one 2D plane to ``shape`` with center-aligned bilinear sampling."""
    h, w = plane.shape
    ht, wt = shape
    rows = np.clip((np.arange(ht) + 0.5) * (h / ht) - 0.5, 0, h - 1)
    cols = np.clip((np.arange(wt) + 0.5) * (w / wt) - 0.5, 0, w - 1)
    grid = np.meshgrid(rows, cols, indexing="ij")
    return map_coordinates(plane, grid, order=1, mode="nearest")


def build_pyramid(image: np.ndarray, min_dim: int) -> list[np.ndarray]:
    """Coarse-to-fine factor-of-2 pyramid; halving stops at min_dim."""
    levels = [np.asarray(image, dtype=np.float64)]
    while min(levels[-1].shape[:2]) > min_dim:
        levels.append(_box_downsample(levels[-1]))
    return levels[::-1]


def solve_alphas(
    image: np.ndarray,
    palette: OrderedPalette,
    opts: SolveOptions | None = None,
    progress_sink: Optional[ProgressSink] = None,
    should_cancel: Optional[Callable[[], bool]] = None,
    on_iteration: Optional[Callable[[int, float], None]] = None,
) -> AlphaStack:
    """Solve per-layer opacities for a whole image.

    Runs L-BFGS-B with [0, 1] bounds on each pyramid level, seeding the
    coarsest level at init_alpha and each finer level with the bilinearly
    upsampled coarse solution. ``progress_sink`` observes every level's
    result; ``should_cancel`` is polled at every objective evaluation and
    aborts with SolveCancelled; ``on_iteration`` (mainly for tests) receives
    (level, energy) at each accepted quasi-Newton step.
    """
    opts = opts or SolveOptions()
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3:
        raise ValueError(f"expected an (H, W, C) image, got shape {image.shape}")
    n = palette.layer_count

    levels = build_pyramid(image, opts.pyramid_min_dim)
    coarse_h, coarse_w = levels[0].shape[:2]
    alphas = np.full((n, coarse_h, coarse_w), opts.init_alpha)

    for level_index, level_image in enumerate(levels):
        h, w = level_image.shape[:2]

        def objective(x: np.ndarray) -> tuple[float, np.ndarray]:
            if should_cancel is not None and should_cancel():
                raise SolveCancelled()
            energy, grad = total_energy_and_gradient(
                level_image, palette, x.reshape(n, h, w), opts.w_opaque, opts.w_spatial
            )
            if not np.isfinite(energy):
                raise NonFiniteEnergyError(
                    f"energy became non-finite at pyramid level {level_index} ({w}x{h})"
                )
            return energy, grad.ravel()

        callback = None
        if on_iteration is not None:
            def callback(xk: np.ndarray) -> None:
                e, _ = total_energy_and_gradient(
                    level_image, palette, xk.reshape(n, h, w), opts.w_opaque, opts.w_spatial
                )
                on_iteration(level_index, e)

        result = minimize(
            objective,
            alphas.ravel(),
            jac=True,
            method="L-BFGS-B",
            bounds=Bounds(np.zeros(alphas.size), np.ones(alphas.size)),
            callback=callback,
            options={
                "maxiter": opts.max_iterations_per_level,
                "maxcor": 10,
                "ftol": opts.convergence,
                "gtol": opts.gradient_tolerance,
            },
        )
        alphas = np.clip(result.x.reshape(n, h, w), 0.0, 1.0)

        if progress_sink is not None:
            progress_sink(level_index, w, h, AlphaStack(alphas.copy()), float(result.fun))

        if level_index + 1 < len(levels):
            next_h, next_w = levels[level_index + 1].shape[:2]
            upsampled = np.empty((n, next_h, next_w))
            for a in range(n):
                upsampled[a] = _bilinear_resize(alphas[a], (next_h, next_w))
            alphas = np.clip(upsampled, 0.0, 1.0)

    return AlphaStack(alphas)
