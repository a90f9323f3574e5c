"""Simplify an exact color hull into a small paint palette.

Pipeline: sample the hull surface, iteratively RANSAC-fit planes, re-position
each plane so a chosen fraction of pixels stays inside, intersect the
half-spaces, and merge the resulting vertices by mean-shift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .errors import DegenerateGeometryError, EmptyRegionError, UnboundedRegionError
from .geometry import (
    ColorCloud,
    Polytope,
    SurfaceSamples,
    coverage_fraction,
    exact_convex_hull,
    polytope_from_points,
    sample_hull_surface,
)

_MERGE_EPS = 1e-7  # distance below which intersection vertices are duplicates


@dataclass(frozen=True)
class SimplifyParams:
    """Tunable knobs of the hull simplification."""

    ransac_distance_threshold: float = 3.0
    termination_fraction: float = 0.05
    inside_fraction: float = 0.99
    meanshift_bandwidth: float = 40.0
    ransac_iterations: int = 500
    n_surface_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.ransac_distance_threshold <= 0:
            raise ValueError("ransac_distance_threshold must be > 0")
        if not 0.0 < self.termination_fraction < 1.0:
            raise ValueError("termination_fraction must be in (0, 1)")
        if not 0.0 < self.inside_fraction <= 1.0:
            raise ValueError("inside_fraction must be in (0, 1]")
        if self.meanshift_bandwidth < 0:
            raise ValueError("meanshift_bandwidth must be >= 0")
        if self.ransac_iterations < 1:
            raise ValueError("ransac_iterations must be >= 1")
        if self.n_surface_samples < 3:
            raise ValueError("n_surface_samples must be >= 3")


@dataclass(frozen=True)
class OrientedPlane:
    """Plane with unit outward normal; inside means normal . x <= offset."""

    normal: np.ndarray  # (3,) float64, unit length
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))


@dataclass(frozen=True)
class PlaneFitResult:
    """Planes recovered by iterative RANSAC plus fit diagnostics."""

    planes: list[OrientedPlane]
    inlier_counts: list[int]
    stopped_early: bool


@dataclass(frozen=True)
class Palette:
    """Ordered paint colors; index 0 is the opaque background."""

    colors: np.ndarray  # (m, 3) float64 in [0, 255]
    background_index: int = 0
    source: str = "simplified-hull"  # or "user-edited"

    def __post_init__(self):
        colors = np.clip(np.asarray(self.colors, dtype=np.float64), 0.0, 255.0)
        if colors.ndim != 2 or colors.shape[1] != 3:
            raise ValueError(f"palette colors must be (m, 3), got {colors.shape}")
        if len(colors) < 2:
            raise ValueError("palette needs at least 2 colors")
        object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return len(self.colors)


def _planes_to_arrays(planes: list[OrientedPlane]) -> tuple[np.ndarray, np.ndarray]:
    normals = np.array([p.normal for p in planes], dtype=np.float64)
    offsets = np.array([p.offset for p in planes], dtype=np.float64)
    return normals, offsets


def ransac_planes(samples: SurfaceSamples, params: SimplifyParams) -> PlaneFitResult:
    """Iteratively fit the best consensus plane and peel off its inliers.

    Stops when fewer than termination_fraction of the initial samples remain,
    or early (flagged) when no candidate reaches 3 inliers.
    """
    pts = np.asarray(samples.points, dtype=np.float64)
    if len(pts) < 3:
        raise ValueError("need at least 3 surface samples")
    rng = np.random.default_rng(params.seed)
    centroid = pts.mean(axis=0)
    floor = params.termination_fraction * len(pts)

    active = np.ones(len(pts), dtype=bool)
    planes: list[OrientedPlane] = []
    inlier_counts: list[int] = []
    stopped_early = False

    while active.sum() >= max(3, floor):
        p = pts[active]
        n_cand = params.ransac_iterations
        triples = np.stack([rng.choice(len(p), 3, replace=False) for _ in range(n_cand)])
        a, b, c = p[triples[:, 0]], p[triples[:, 1]], p[triples[:, 2]]
        normals = np.cross(b - a, c - a)
        lengths = np.linalg.norm(normals, axis=1)
        valid = lengths > 1e-12
        if not valid.any():
            stopped_early = True
            break
        normals = normals[valid] / lengths[valid, None]
        offsets = np.einsum("ij,ij->i", normals, a[valid])
        dists = np.abs(p @ normals.T - offsets)  # (n_active, n_valid)
        counts = (dists <= params.ransac_distance_threshold).sum(axis=0)
        best = int(counts.argmax())
        if counts[best] < 3:
            stopped_early = True
            break

        # Refit the winner over its inliers before removal: least squares,
        # then a few Tukey-reweighted rounds to shed cross-face contamination.
        inlier = dists[:, best] <= params.ransac_distance_threshold
        q = p[inlier]
        weights = np.ones(len(q))
        for _ in range(4):
            center = (weights[:, None] * q).sum(axis=0) / weights.sum()
            _, _, vt = np.linalg.svd((q - center) * np.sqrt(weights)[:, None], full_matrices=False)
            normal = vt[2]
            offset = float(normal @ center)
            resid = q @ normal - offset
            weights = np.clip(1.0 - (resid / params.ransac_distance_threshold) ** 2, 0.0, None) ** 2
            if weights.sum() < 3:
                weights = np.ones(len(q))
                break
        if normal @ centroid > offset:
            normal, offset = -normal, -offset

        removed = np.abs(p @ normal - offset) <= params.ransac_distance_threshold
        if not removed.any():
            removed = inlier  # refit drifted; fall back to consensus inliers
        idx = np.flatnonzero(active)
        active[idx[removed]] = False
        planes.append(OrientedPlane(normal=normal, offset=offset))
        inlier_counts.append(int(removed.sum()))

    return PlaneFitResult(planes=planes, inlier_counts=inlier_counts, stopped_early=stopped_early)


def position_planes(
    planes: list[OrientedPlane], cloud: ColorCloud, inside_fraction: float
) -> list[OrientedPlane]:
    """Push each plane to the count-weighted inside_fraction quantile of the cloud.

    The new offset is the minimal value keeping at least that fraction of
    pixels in the half-space.
    """
    if not 0.0 < inside_fraction <= 1.0:
        raise ValueError("inside_fraction must be in (0, 1]")
    pts = cloud.points[:, :3]
    weights = cloud.counts.astype(np.float64)
    total = weights.sum()
    out: list[OrientedPlane] = []
    for plane in planes:
        proj = pts @ plane.normal
        order = np.argsort(proj)
        cumw = np.cumsum(weights[order])
        k = int(np.searchsorted(cumw, inside_fraction * total - 1e-9))
        k = min(k, len(proj) - 1)
        out.append(OrientedPlane(normal=plane.normal, offset=float(proj[order[k]])))
    return out


def _check_region(normals: np.ndarray, offsets: np.ndarray) -> None:
    """Classify the half-space intersection; raise on empty or unbounded."""
    for axis in range(3):
        for sign in (1.0, -1.0):
            c = np.zeros(3)
            c[axis] = sign
            res = linprog(c, A_ub=normals, b_ub=offsets, bounds=[(None, None)] * 3,
                          method="highs")
            if res.status == 2:
                raise EmptyRegionError(
                    "half-space intersection is empty; raise inside_fraction or "
                    "increase the RANSAC distance threshold"
                )
            if res.status == 3:
                raise UnboundedRegionError(
                    "half-space intersection is unbounded; lower termination_fraction "
                    "so more planes are fitted"
                )


def _dedupe_points(points: np.ndarray, eps: float) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    kept: list[np.ndarray] = []
    for p in points[order]:
        if not kept or min(np.linalg.norm(p - k) for k in kept) > eps:
            kept.append(p)
    return np.array(kept)


def halfspace_intersection(planes: list[OrientedPlane]) -> Polytope:
    """Convex region bounded by the oriented planes, vertices clamped to the RGB cube."""
    if len(planes) < 4:
        raise ValueError(
            f"need at least 4 planes to bound a region, got {len(planes)}; "
            "lower termination_fraction so more planes are fitted"
        )
    normals, offsets = _planes_to_arrays(planes)
    _check_region(normals, offsets)

    # Chebyshev center: the deepest interior point (normals are unit length).
    res = linprog(
        np.array([0.0, 0.0, 0.0, -1.0]),
        A_ub=np.hstack([normals, np.ones((len(planes), 1))]),
        b_ub=offsets,
        bounds=[(None, None)] * 3 + [(0, None)],
        method="highs",
    )
    if not res.success or res.x[3] <= 1e-9:
        raise EmptyRegionError(
            "half-space intersection has no interior; raise inside_fraction or "
            "increase the RANSAC distance threshold"
        )
    interior = res.x[:3]

    hs = HalfspaceIntersection(np.hstack([normals, -offsets[:, None]]), interior)
    vertices = _dedupe_points(hs.intersections, _MERGE_EPS)
    vertices = np.clip(vertices, 0.0, 255.0)
    vertices = _dedupe_points(vertices, _MERGE_EPS)
    try:
        return polytope_from_points(vertices)
    except DegenerateGeometryError as exc:
        raise EmptyRegionError(
            "half-space intersection collapsed to a degenerate region after "
            "clamping; adjust simplification parameters"
        ) from exc


def mean_shift_merge(vertices: np.ndarray, bandwidth: float) -> np.ndarray:
    """Merge vertices whose Gaussian mean-shift modes coincide.

    Modes closer than bandwidth/10 collapse to one color; bandwidth 0 is the
    identity. Output order follows first occurrence in the input.
    """
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    pts = np.asarray(vertices, dtype=np.float64)
    if bandwidth == 0 or len(pts) < 2:
        return pts.copy()

    inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth)
    modes = np.empty_like(pts)
    for i, start in enumerate(pts):
        m = start
        for _ in range(100):
            w = np.exp(-np.sum((pts - m) ** 2, axis=1) * inv_two_h2)
            m_new = (w @ pts) / w.sum()
            step = np.linalg.norm(m_new - m)
            m = m_new
            if step < bandwidth / 1000.0:
                break
        modes[i] = m

    merged: list[np.ndarray] = []
    groups: list[list[int]] = []
    for i, m in enumerate(modes):
        for gi, rep in enumerate(merged):
            if np.linalg.norm(m - rep) <= bandwidth / 10.0:
                groups[gi].append(i)
                break
        else:
            merged.append(m)
            groups.append([i])
    return np.array([modes[g].mean(axis=0) for g in groups])


def remove_color(palette: Palette, index: int) -> Palette:
    """Drop one non-background color; the result is flagged user-edited."""
    if not 0 <= index < len(palette):
        raise IndexError(f"palette has {len(palette)} colors, no index {index}")
    if index == palette.background_index:
        raise ValueError("the background color cannot be removed")
    if len(palette) <= 2:
        raise ValueError("palette must keep at least 2 colors")
    colors = np.delete(palette.colors, index, axis=0)
    return Palette(colors=colors, background_index=palette.background_index, source="user-edited")


def simplify_palette(
    cloud: ColorCloud,
    params: SimplifyParams | None = None,
    exact_hull: Polytope | None = None,
) -> tuple[Palette, Optional[Polytope], dict]:
    """Run the full simplification chain on a color cloud.

    Returns the palette, the simplified hull (None when the cloud is
    degenerate and the palette short-circuits to the span's extreme points),
    and a diagnostics dict.
    """
    params = params or SimplifyParams()
    cloud3 = cloud.rgb_only()
    diagnostics: dict = {"params_seed": params.seed}

    try:
        hull = exact_hull if exact_hull is not None else exact_convex_hull(cloud3)
    except DegenerateGeometryError as exc:
        if len(exc.extreme_points) < 2:
            raise
        palette = Palette(colors=exc.extreme_points, source="simplified-hull")
        diagnostics.update(
            degenerate_dimension=exc.dimension,
            plane_count=0,
            vertices_before_merge=len(palette),
            vertices_after_merge=len(palette),
            coverage_fraction=1.0,
        )
        return palette, None, diagnostics

    samples = sample_hull_surface(hull, params.n_surface_samples, params.seed)
    fit = ransac_planes(samples, params)
    positioned = position_planes(fit.planes, cloud3, params.inside_fraction)
    simplified = halfspace_intersection(positioned)
    merged = mean_shift_merge(simplified.vertices, params.meanshift_bandwidth)
    palette = Palette(colors=merged, source="simplified-hull")

    diagnostics.update(
        exact_hull_vertex_count=len(hull.vertices),
        plane_count=len(positioned),
        ransac_stopped_early=fit.stopped_early,
        vertices_before_merge=len(simplified.vertices),
        vertices_after_merge=len(merged),
        coverage_fraction=coverage_fraction(
            simplified, cloud3, slack=params.ransac_distance_threshold
        ),
    )
    return palette, simplified, diagnostics
