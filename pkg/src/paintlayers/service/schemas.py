"""Pydantic request/response models for the decomposition service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SimplifyParamsModel(BaseModel):
    ransac_distance_threshold: float = Field(default=3.0, gt=0)
    termination_fraction: float = Field(default=0.05, gt=0, lt=1)
    inside_fraction: float = Field(default=0.99, gt=0, le=1)
    meanshift_bandwidth: float = Field(default=40.0, ge=0)
    ransac_iterations: int = Field(default=500, ge=1)
    n_surface_samples: int = Field(default=10_000, ge=3)
    seed: int = 0


class HullMesh(BaseModel):
    vertices: list[list[float]]
    faces: list[list[int]]


class PaletteDiagnostics(BaseModel):
    plane_count: int = 0
    vertices_before_merge: int = 0
    vertices_after_merge: int = 0
    coverage_fraction: float = 1.0
    exact_hull_vertex_count: int | None = None
    ransac_stopped_early: bool = False
    degenerate_dimension: int | None = None


class PaletteResponse(BaseModel):
    colors: list[list[int]]
    background_index: int = 0
    source: str
    params: SimplifyParamsModel | None = None
    diagnostics: PaletteDiagnostics
    hull: HullMesh | None = None
    cloud_sample: list[list[int]] = Field(default_factory=list)


class SolveOptionsModel(BaseModel):
    w_opaque: float = Field(default=100.0, ge=0)
    w_spatial: float = Field(default=1000.0, ge=0)
    pyramid_min_dim: int = Field(default=32, ge=1)
    init_alpha: float = Field(default=0.5, ge=0, le=1)
    max_iterations_per_level: int = Field(default=500, ge=1)
    gradient_tolerance: float = Field(default=1e-5, gt=0)
    convergence: float = Field(default=1e-8, gt=0)


class SessionCreated(BaseModel):
    session_id: str
    width: int
    height: int
    mode: str


class JobRequest(BaseModel):
    order: list[int]
    background_index: Optional[int] = None
    options: SolveOptionsModel = Field(default_factory=SolveOptionsModel)


class JobCreated(BaseModel):
    job_id: str


class JobStatus(BaseModel):
    id: str
    state: str  # queued | running | done | cancelled | failed
    level: int | None = None
    level_count: int | None = None
    width: int | None = None
    height: int | None = None
    energy: float | None = None
    error: str | None = None


class LayerPreview(BaseModel):
    index: int
    color: list[int]
    alpha_png_base64: str


class PreviewResponse(BaseModel):
    level: int
    width: int
    height: int
    energy: float
    composite_png_base64: str
    layers: list[LayerPreview]


class RecolorRequest(BaseModel):
    layer_index: int = Field(ge=0)
    new_color: list[int] = Field(min_length=3, max_length=3)
