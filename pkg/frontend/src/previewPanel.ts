/** Progressive preview: polls the job, shows the newest composite, per-layer
 * alpha thumbnails with visibility toggles (client-side recomposition), and
 * a recolor picker. */

import type { Client } from "./api";
import { DecodedLayer, recomposite } from "./composite";
import type { JobStatus, PreviewResponse, RGB } from "./types";

export const POLL_INTERVAL_MS = 1000;

/** Decode a base64 grayscale PNG into an alpha plane via canvas. */
export async function decodeAlphaPng(
  base64: string,
  width: number,
  height: number,
): Promise<Uint8ClampedArray> {
  const image = new Image();
  image.src = `data:image/png;base64,${base64}`;
  await image.decode();
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(image, 0, 0);
  const rgba = ctx.getImageData(0, 0, width, height).data;
  const alpha = new Uint8ClampedArray(width * height);
  for (let p = 0; p < alpha.length; p++) {
    alpha[p] = rgba[p * 4]; // grayscale: any channel
  }
  return alpha;
}

export interface PreviewPanelHooks {
  onStatus: (status: JobStatus) => void;
  onPreview: (preview: PreviewResponse) => void;
  onFinished: (status: JobStatus) => void;
}

export interface PreviewPanelOptions {
  pollIntervalMs?: number;
  /** Alpha PNG decoder; replaceable where canvas decoding is unavailable. */
  alphaDecoder?: typeof decodeAlphaPng;
}

export class PreviewPanel {
  private timer: ReturnType<typeof setInterval> | null = null;
  private layers: DecodedLayer[] = [];
  private background: RGB = [0, 0, 0];
  private preview: PreviewResponse | null = null;
  private readonly pollIntervalMs: number;
  private readonly decodeAlpha: typeof decodeAlphaPng;

  constructor(
    readonly compositeImage: HTMLImageElement,
    readonly layerList: HTMLElement,
    readonly statusLine: HTMLElement,
    readonly client: Client,
    options: PreviewPanelOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? POLL_INTERVAL_MS;
    this.decodeAlpha = options.alphaDecoder ?? decodeAlphaPng;
  }

  /** Poll status + previews at 1 Hz until the job reaches a terminal state. */
  startPolling(sessionId: string, jobId: string, hooks: PreviewPanelHooks): void {
    this.stopPolling();
    let lastLevel = -1;
    const tick = async () => {
      try {
        const status = await this.client.jobStatus(sessionId, jobId);
        hooks.onStatus(status);
        this.statusLine.textContent =
          status.state === "failed"
            ? `failed: ${status.error}`
            : `${status.state}` +
              (status.level !== null && status.level_count !== null
                ? ` (level ${status.level + 1}/${status.level_count})`
                : "");
        const preview = await this.client.latestPreview(sessionId, jobId);
        if (preview && preview.level !== lastLevel) {
          lastLevel = preview.level;
          hooks.onPreview(preview);
        }
        if (status.state === "done" || status.state === "failed" || status.state === "cancelled") {
          this.stopPolling();
          hooks.onFinished(status);
        }
      } catch {
        /* transient poll errors: keep trying until terminal state */
      }
    };
    void tick();
    this.timer = setInterval(tick, this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async showPreview(preview: PreviewResponse, background: RGB): Promise<void> {
    this.preview = preview;
    this.background = background;
    this.compositeImage.src = `data:image/png;base64,${preview.composite_png_base64}`;
    this.compositeImage.width = preview.width;
    this.compositeImage.height = preview.height;
    this.layers = [];
    for (const layer of preview.layers) {
      this.layers.push({
        color: layer.color,
        alpha: await this.decodeAlpha(layer.alpha_png_base64, preview.width, preview.height),
        visible: true,
      });
    }
    this.renderLayerList();
  }

  /** Toggle one layer and recomposite locally from the cached alpha planes. */
  toggleLayer(index: number): void {
    if (!this.preview || !this.layers[index]) return;
    this.layers[index].visible = !this.layers[index].visible;
    const pixels = recomposite(
      this.background,
      this.layers,
      this.preview.width,
      this.preview.height,
    );
    const canvas = document.createElement("canvas");
    canvas.width = this.preview.width;
    canvas.height = this.preview.height;
    const ctx = canvas.getContext("2d")!;
    const imageData = ctx.createImageData(this.preview.width, this.preview.height);
    imageData.data.set(pixels);
    ctx.putImageData(imageData, 0, 0);
    this.compositeImage.src = canvas.toDataURL("image/png");
    this.renderLayerList();
  }

  showRecolored(blob: Blob): void {
    this.compositeImage.src = URL.createObjectURL(blob);
  }

  private renderLayerList(): void {
    this.layerList.textContent = "";
    if (!this.preview) return;
    this.preview.layers.forEach((layer, i) => {
      const row = document.createElement("li");
      row.className = "layer-row";

      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.checked = this.layers[i]?.visible ?? true;
      toggle.addEventListener("change", () => this.toggleLayer(i));

      const thumb = document.createElement("img");
      thumb.className = "alpha-thumb";
      thumb.src = `data:image/png;base64,${layer.alpha_png_base64}`;

      const swatch = document.createElement("span");
      swatch.className = "swatch";
      const [r, g, b] = layer.color;
      swatch.style.backgroundColor = `rgb(${r},${g},${b})`;

      row.append(toggle, thumb, swatch);
      this.layerList.append(row);
    });
  }
}
