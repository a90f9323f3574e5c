/** UI session state.
 *
 * Everything here derives from API responses; there is no client-side
 * solving. The order list is maintained as a permutation of the current
 * palette indices by construction, so the UI can never submit an invalid
 * job request.
 */

import type { JobStatus, PaletteResponse, PreviewResponse } from "./types";

export interface UiSessionState {
  sessionId: string | null;
  imageSize: { width: number; height: number } | null;
  palette: PaletteResponse | null;
  /** Bottom-to-top compositing order; always a permutation of palette indices. */
  order: number[];
  activeJobId: string | null;
  jobStatus: JobStatus | null;
  preview: PreviewResponse | null;
  selectedLayer: number | null;
  error: string | null;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    imageSize: null,
    palette: null,
    order: [],
    activeJobId: null,
    jobStatus: null,
    preview: null,
    selectedLayer: null,
    error: null,
  };
}

export function sessionCreated(
  state: UiSessionState,
  sessionId: string,
  width: number,
  height: number,
): UiSessionState {
  return { ...initialState(), sessionId, imageSize: { width, height } };
}

/** A fresh palette resets the order to the identity permutation. */
export function paletteLoaded(state: UiSessionState, palette: PaletteResponse): UiSessionState {
  return {
    ...state,
    palette,
    order: palette.colors.map((_, i) => i),
    activeJobId: null,
    jobStatus: null,
    preview: null,
    selectedLayer: null,
    error: null,
  };
}

/** Move the order entry at `from` so it lands at position `to`. */
export function moveOrderEntry(state: UiSessionState, from: number, to: number): UiSessionState {
  const order = state.order.slice();
  if (from < 0 || from >= order.length || to < 0 || to >= order.length) {
    return state;
  }
  const [entry] = order.splice(from, 1);
  order.splice(to, 0, entry);
  return { ...state, order };
}

export function jobSubmitted(state: UiSessionState, jobId: string): UiSessionState {
  return { ...state, activeJobId: jobId, jobStatus: null, preview: null, error: null };
}

export function jobStatusUpdated(state: UiSessionState, status: JobStatus): UiSessionState {
  const error = status.state === "failed" ? status.error : state.error;
  return { ...state, jobStatus: status, error };
}

/** Previews only ever grow in resolution; stale poll responses are dropped. */
export function previewUpdated(state: UiSessionState, preview: PreviewResponse): UiSessionState {
  const current = state.preview;
  if (current && preview.width * preview.height < current.width * current.height) {
    return state;
  }
  return { ...state, preview };
}

export function jobIsActive(state: UiSessionState): boolean {
  const s = state.jobStatus?.state;
  return state.activeJobId !== null && (s === undefined || s === "queued" || s === "running");
}

export function isPermutation(order: number[], size: number): boolean {
  if (order.length !== size) return false;
  const seen = new Set(order);
  if (seen.size !== size) return false;
  for (let i = 0; i < size; i++) {
    if (!seen.has(i)) return false;
  }
  return true;
}
