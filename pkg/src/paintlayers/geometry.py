"""Color point clouds and exact convex-hull geometry in RGB-space.

Colors are processed as float vectors in [0, 255] throughout so that energy
weights downstream keep their 8-bit scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateGeometryError


@dataclass(frozen=True)
class ColorCloud:
    """Deduplicated set of observed colors with per-color pixel counts."""

    points: np.ndarray  # (m, channels) float64, all coordinates in [0, 255]
    counts: np.ndarray  # (m,) int64, every entry >= 1
    channel_count: int  # 3 (RGB) or 4 (premultiplied RGBA)

    @property
    def pixel_count(self) -> int:
        return int(self.counts.sum())

    def rgb_only(self) -> "ColorCloud":
        """Drop the alpha channel and re-merge colors that collide."""
        if self.channel_count == 3:
            return self
        rgb = np.ascontiguousarray(self.points[:, :3])
        uniq, inverse = np.unique(rgb, axis=0, return_inverse=True)
        counts = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(counts, inverse, self.counts)
        return ColorCloud(points=uniq, counts=counts, channel_count=3)


@dataclass(frozen=True)
class Polytope:
    """Convex polytope in 3D color space.

    ``faces`` are triangles with outward winding; ``planes`` holds one row
    [nx, ny, nz, d] per face with a unit outward normal, inside meaning
    n.x <= d.
    """

    vertices: np.ndarray  # (v, 3) float64
    faces: np.ndarray     # (f, 3) int32
    planes: np.ndarray    # (f, 4) float64

    @property
    def normals(self) -> np.ndarray:
        return self.planes[:, :3]

    @property
    def offsets(self) -> np.ndarray:
        return self.planes[:, 3]

    def contains(self, points: np.ndarray, slack: float = 1e-6) -> np.ndarray:
        """Boolean mask of points inside every face half-space (with slack)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.all(pts @ self.normals.T <= self.offsets + slack, axis=1)


@dataclass(frozen=True)
class SurfaceSamples:
    """Points sampled on a polytope boundary, tagged with their face index."""

    points: np.ndarray       # (n, 3) float64
    source_face: np.ndarray  # (n,) int64


def collect_pixel_colors(image: np.ndarray) -> ColorCloud:
    """Turn an image into a deduplicated color cloud.

    ``image`` is (H, W, 3) or (H, W, 4). Integer RGBA input is straight
    alpha and gets premultiplied (round(c * a / 255)); float input is taken
    as-is, i.e. already premultiplied.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] not in (3, 4):
        raise ValueError(f"expected an (H, W, 3|4) image, got shape {image.shape}")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise ValueError("image has zero pixels")

    channels = int(image.shape[2])
    flat = image.reshape(-1, channels).astype(np.float64)
    if channels == 4 and np.issubdtype(image.dtype, np.integer):
        alpha = flat[:, 3:4]
        flat = np.hstack([np.rint(flat[:, :3] * alpha / 255.0), alpha])

    uniq, counts = np.unique(flat, axis=0, return_counts=True)
    return ColorCloud(points=uniq, counts=counts.astype(np.int64), channel_count=channels)


def _affine_span(points: np.ndarray) -> tuple[int, np.ndarray]:
    """Affine dimension of a point set and the extreme points of its span.

    For a collinear set the extremes are the two endpoints; for a coplanar
    set they are the 2D hull vertices within the plane.
    """
    centroid = points.mean(axis=0)
    centered = points - centroid
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(points).max()))
    rank = int(np.sum(s > 1e-9 * scale))
    if rank == 0:
        return 0, points[:1].copy()
    if rank == 1:
        t = centered @ vt[0]
        return 1, points[[int(t.argmin()), int(t.argmax())]].copy()
    coords = centered @ vt[:2].T
    try:
        hull2d = ConvexHull(coords)
        extremes = points[hull2d.vertices].copy()
    except QhullError:
        extremes = points.copy()
    return 2, extremes


def polytope_from_points(points: np.ndarray) -> Polytope:
    """Convex hull of a 3D point set as an outward-oriented Polytope."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"expected (m, 3) points, got shape {points.shape}")
    distinct = np.unique(points, axis=0)
    if len(distinct) < 2:
        raise DegenerateGeometryError(0, distinct, "fewer than 2 distinct colors")
    try:
        hull = ConvexHull(points)
    except QhullError:
        dim, extremes = _affine_span(distinct)
        raise DegenerateGeometryError(dim, extremes) from None

    vertex_ids = hull.vertices
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[vertex_ids] = np.arange(len(vertex_ids))
    vertices = points[vertex_ids]
    faces = remap[hull.simplices].astype(np.int32)

    # qhull equations are [n, -d] with unit n; flip windings that disagree.
    normals = hull.equations[:, :3]
    offsets = -hull.equations[:, 3]
    a, b, c = (vertices[faces[:, k]] for k in range(3))
    tri_normals = np.cross(b - a, c - a)
    flip = np.einsum("ij,ij->i", tri_normals, normals) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]

    planes = np.hstack([normals, offsets[:, None]])
    return Polytope(vertices=vertices, faces=faces, planes=planes)


def exact_convex_hull(cloud: ColorCloud) -> Polytope:
    """Exact RGB-space convex hull of the cloud's colors.

    Raises DegenerateGeometryError for clouds whose affine span has fewer
    than 3 dimensions; the error carries the span's extreme points.
    """
    if cloud.channel_count != 3:
        raise ValueError("hull geometry runs on 3-channel clouds; use rgb_only() first")
    return polytope_from_points(cloud.points)


def sample_hull_surface(poly: Polytope, n_samples: int, seed: int = 0) -> SurfaceSamples:
    """Uniform area-weighted samples on the polytope surface, reproducible by seed."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    a = poly.vertices[poly.faces[:, 0]]
    b = poly.vertices[poly.faces[:, 1]]
    c = poly.vertices[poly.faces[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    total = areas.sum()
    if total <= 0:
        raise DegenerateGeometryError(2, poly.vertices, "polytope surface has zero area")

    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(areas), size=n_samples, p=areas / total)
    r1 = np.sqrt(rng.random(n_samples))[:, None]
    r2 = rng.random(n_samples)[:, None]
    pts = (1.0 - r1) * a[face_idx] + r1 * (1.0 - r2) * b[face_idx] + r1 * r2 * c[face_idx]
    return SurfaceSamples(points=pts, source_face=face_idx.astype(np.int64))


def coverage_fraction(poly: Polytope, cloud: ColorCloud, slack: float = 0.0) -> float:
    """Count-weighted fraction of cloud colors inside the polytope, faces inflated by slack.

    Points on the boundary count as inside (the usual 1e-6 containment
    tolerance applies on top of the slack).
    """
    if cloud.channel_count != 3:
        raise ValueError("coverage check needs a 3-channel cloud; use rgb_only() first")
    inside = poly.contains(cloud.points, slack=slack + 1e-6)
    return float(cloud.counts[inside].sum() / cloud.counts.sum())
