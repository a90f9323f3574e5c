/** Wire types of the decomposition service (mirrors its JSON schemas). */

export type RGB = [number, number, number];

export interface SimplifyParams {
  ransac_distance_threshold?: number;
  termination_fraction?: number;
  inside_fraction?: number;
  meanshift_bandwidth?: number;
  ransac_iterations?: number;
  n_surface_samples?: number;
  seed?: number;
}

export interface HullMesh {
  vertices: number[][];
  faces: number[][];
}

export interface PaletteDiagnostics {
  plane_count: number;
  vertices_before_merge: number;
  vertices_after_merge: number;
  coverage_fraction: number;
  exact_hull_vertex_count: number | null;
  ransac_stopped_early: boolean;
  degenerate_dimension: number | null;
}

export interface PaletteResponse {
  colors: RGB[];
  background_index: number;
  source: string;
  params: SimplifyParams | null;
  diagnostics: PaletteDiagnostics;
  hull: HullMesh | null;
  cloud_sample: RGB[];
}

export interface SolveOptions {
  w_opaque?: number;
  w_spatial?: number;
  pyramid_min_dim?: number;
  init_alpha?: number;
  max_iterations_per_level?: number;
  gradient_tolerance?: number;
  convergence?: number;
}

export interface SessionCreated {
  session_id: string;
  width: number;
  height: number;
  mode: string;
}

export type JobState = "queued" | "running" | "done" | "cancelled" | "failed";

export interface JobStatus {
  id: string;
  state: JobState;
  level: number | null;
  level_count: number | null;
  width: number | null;
  height: number | null;
  energy: number | null;
  error: string | null;
}

export interface LayerPreview {
  index: number;
  color: RGB;
  alpha_png_base64: string;
}

export interface PreviewResponse {
  level: number;
  width: number;
  height: number;
  energy: number;
  composite_png_base64: string;
  layers: LayerPreview[];
}
