/** Single-page app wiring: upload, palette tuning, ordering, solving,
 * progressive preview, recolor, export. */

import { ApiError, Client } from "./api";
import { HullViewer } from "./hullViewer";
import { OrderEditor } from "./orderEditor";
import { PreviewPanel, PreviewPanelOptions } from "./previewPanel";
import * as state from "./state";
import type { RGB, SimplifyParams, SolveOptions } from "./types";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startApp(
  client: Client = new Client(""),
  panelOptions: PreviewPanelOptions = {},
): void {
  let ui = state.initialState();

  const uploadInput = el<HTMLInputElement>("upload");
  const paletteForm = el<HTMLFormElement>("palette-form");
  const paletteStats = el<HTMLElement>("palette-stats");
  const errorLine = el<HTMLElement>("error-line");
  const weightsForm = el<HTMLFormElement>("weights-form");
  const downloadLink = el<HTMLAnchorElement>("download-link");
  const recolorForm = el<HTMLFormElement>("recolor-form");
  const recolorLayer = el<HTMLSelectElement>("recolor-layer");
  const recolorColor = el<HTMLInputElement>("recolor-color");
  const cancelButton = el<HTMLButtonElement>("cancel-job");

  const viewer = new HullViewer(el<HTMLCanvasElement>("hull-canvas"), el("hull-fallback"));
  const panel = new PreviewPanel(
    el<HTMLImageElement>("composite-preview"),
    el("layer-list"),
    el("job-status"),
    client,
    panelOptions,
  );

  const editor = new OrderEditor(el("order-list"), el<HTMLButtonElement>("submit-job"), {
    onReorder: (from, to) => {
      ui = state.moveOrderEntry(ui, from, to);
      renderOrder();
    },
    onSubmit: () => void submitJob(),
    onRemoveColor: (index) => void removeColor(index),
  });

  function showError(err: unknown): void {
    errorLine.textContent = err instanceof Error ? err.message : String(err);
  }

  function clearError(): void {
    errorLine.textContent = "";
  }

  function renderOrder(): void {
    if (!ui.palette) return;
    editor.render(ui.order, ui.palette.colors, ui.palette.background_index);
  }

  function renderPaletteStats(): void {
    if (!ui.palette) return;
    const d = ui.palette.diagnostics;
    paletteStats.textContent =
      `${ui.palette.colors.length} colors | coverage ` +
      `${(d.coverage_fraction * 100).toFixed(2)}% | ` +
      `${d.plane_count} planes, ${d.vertices_before_merge} -> ${d.vertices_after_merge} vertices`;
    recolorLayer.textContent = "";
    ui.palette.colors.forEach((_, i) => {
      const option = document.createElement("option");
      option.value = String(i);
      option.textContent = i === 0 ? "background" : `layer color ${i}`;
      recolorLayer.append(option);
    });
  }

  uploadInput.addEventListener("change", async () => {
    const file = uploadInput.files?.[0];
    if (!file) return;
    clearError();
    try {
      const session = await client.createSession(file, file.name);
      ui = state.sessionCreated(ui, session.session_id, session.width, session.height);
    } catch (err) {
      showError(err);
    }
  });

  paletteForm.addEventListener("submit", async (e) => {
    e.preventDefault();
    if (!ui.sessionId || state.jobIsActive(ui)) return;
    clearError();
    const data = new FormData(paletteForm);
    const params: SimplifyParams = {
      termination_fraction: Number(data.get("termination") ?? 0.05),
      inside_fraction: Number(data.get("inside") ?? 0.99),
      meanshift_bandwidth: Number(data.get("bandwidth") ?? 40),
      seed: Number(data.get("seed") ?? 0),
    };
    try {
      const palette = await client.computePalette(ui.sessionId, params);
      ui = state.paletteLoaded(ui, palette);
      renderPaletteStats();
      renderOrder();
      viewer.setData(palette.cloud_sample, palette.hull);
      editor.setLocked(false);
    } catch (err) {
      showError(err);
    }
  });

  async function removeColor(index: number): Promise<void> {
    if (!ui.sessionId || state.jobIsActive(ui)) return;
    try {
      const palette = await client.removeColor(ui.sessionId, index);
      ui = state.paletteLoaded(ui, palette);
      renderPaletteStats();
      renderOrder();
      viewer.setData(palette.cloud_sample, palette.hull);
    } catch (err) {
      showError(err);
    }
  }

  let submitting = false;

  async function submitJob(): Promise<void> {
    if (submitting || !ui.sessionId || !ui.palette || state.jobIsActive(ui)) return;
    if (!state.isPermutation(ui.order, ui.palette.colors.length)) return;
    clearError();
    submitting = true;
    const sessionId = ui.sessionId;
    const data = new FormData(weightsForm);
    const options: SolveOptions = {
      w_opaque: Number(data.get("w_opaque") ?? 100),
      w_spatial: Number(data.get("w_spatial") ?? 1000),
    };
    try {
      const jobId = await client.submitJob(sessionId, ui.order, options);
      ui = state.jobSubmitted(ui, jobId);
      editor.setLocked(true);
      downloadLink.hidden = true;
      panel.startPolling(sessionId, jobId, {
        onStatus: (status) => {
          ui = state.jobStatusUpdated(ui, status);
        },
        onPreview: (preview) => {
          ui = state.previewUpdated(ui, preview);
          if (ui.preview === preview && ui.palette) {
            const backgroundColor = ui.palette.colors[ui.order[0]] as RGB;
            void panel.showPreview(preview, backgroundColor);
          }
        },
        onFinished: (status) => {
          editor.setLocked(false);
          if (status.state === "done" && ui.sessionId && ui.activeJobId) {
            downloadLink.hidden = false;
            downloadLink.href = `/sessions/${ui.sessionId}/jobs/${ui.activeJobId}/result`;
          }
        },
      });
    } catch (err) {
      showError(err);
    } finally {
      submitting = false;
    }
  }

  cancelButton.addEventListener("click", async () => {
    if (!ui.sessionId || !ui.activeJobId) return;
    try {
      const status = await client.cancelJob(ui.sessionId, ui.activeJobId);
      ui = state.jobStatusUpdated(ui, status);
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 409)) showError(err);
    }
  });

  recolorForm.addEventListener("submit", async (e) => {
    e.preventDefault();
    if (!ui.sessionId || !ui.activeJobId || ui.jobStatus?.state !== "done") return;
    const hex = recolorColor.value;
    const color: RGB = [
      parseInt(hex.slice(1, 3), 16),
      parseInt(hex.slice(3, 5), 16),
      parseInt(hex.slice(5, 7), 16),
    ];
    try {
      const blob = await client.recolorPreview(
        ui.sessionId,
        ui.activeJobId,
        Number(recolorLayer.value),
        color,
      );
      panel.showRecolored(blob);
    } catch (err) {
      showError(err);
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("upload")) {
  startApp();
}
