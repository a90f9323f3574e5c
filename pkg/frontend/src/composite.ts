/** Client-side "over" recomposition of per-layer previews.
 *
 * Used for instant layer visibility toggles; full-resolution math stays on
 * the server. Inputs are the 8-bit alpha thumbnails from the preview
 * endpoint.
 */

import type { RGB } from "./types";

export interface DecodedLayer {
  color: RGB;
  /** Row-major alpha plane, 0..255, length width*height. */
  alpha: Uint8ClampedArray;
  visible: boolean;
}

/** One "A over B" blend step for a single channel. */
export function overBlend(alpha: number, layerChannel: number, below: number): number {
  return alpha * layerChannel + (1 - alpha) * below;
}

/**
 * Composite the visible layers bottom-to-top over the background.
 * Returns an RGBA pixel buffer suitable for ImageData (alpha always 255).
 */
export function recomposite(
  background: RGB,
  layers: DecodedLayer[],
  width: number,
  height: number,
): Uint8ClampedArray {
  const pixelCount = width * height;
  const out = new Uint8ClampedArray(pixelCount * 4);
  const work = new Float64Array(pixelCount * 3);
  for (let p = 0; p < pixelCount; p++) {
    work[p * 3] = background[0];
    work[p * 3 + 1] = background[1];
    work[p * 3 + 2] = background[2];
  }
  for (const layer of layers) {
    if (!layer.visible) continue;
    if (layer.alpha.length !== pixelCount) {
      throw new Error(
        `alpha plane has ${layer.alpha.length} pixels, expected ${pixelCount}`,
      );
    }
    const [r, g, b] = layer.color;
    for (let p = 0; p < pixelCount; p++) {
      const a = layer.alpha[p] / 255;
      work[p * 3] = overBlend(a, r, work[p * 3]);
      work[p * 3 + 1] = overBlend(a, g, work[p * 3 + 1]);
      work[p * 3 + 2] = overBlend(a, b, work[p * 3 + 2]);
    }
  }
  for (let p = 0; p < pixelCount; p++) {
    out[p * 4] = Math.round(work[p * 3]);
    out[p * 4 + 1] = Math.round(work[p * 3 + 1]);
    out[p * 4 + 2] = Math.round(work[p * 3 + 2]);
    out[p * 4 + 3] = 255;
  }
  return out;
}
