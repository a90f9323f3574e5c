/** Rotatable 3D view of the pixel scatter and the simplified hull wireframe.
 *
 * Plain canvas with an orthographic projection; the projection math is kept
 * separate from drawing so it stays testable headless.
 */

import type { HullMesh, RGB } from "./types";

export const SCATTER_CAP = 50_000;

export interface ViewAngles {
  yaw: number;
  pitch: number;
  zoom: number;
}

/** Orthographic projection of an RGB point after yaw/pitch rotation. */
export function project(
  point: number[],
  view: ViewAngles,
  size: number,
): { x: number; y: number; depth: number } {
  const cx = point[0] - 127.5;
  const cy = point[1] - 127.5;
  const cz = point[2] - 127.5;
  const cosY = Math.cos(view.yaw);
  const sinY = Math.sin(view.yaw);
  const x1 = cosY * cx + sinY * cz;
  const z1 = -sinY * cx + cosY * cz;
  const cosP = Math.cos(view.pitch);
  const sinP = Math.sin(view.pitch);
  const y2 = cosP * cy - sinP * z1;
  const z2 = sinP * cy + cosP * z1;
  const scale = (view.zoom * size) / 300;
  return {
    x: size / 2 + x1 * scale,
    y: size / 2 - y2 * scale,
    depth: z2,
  };
}

/** Unique undirected edges of a triangle mesh. */
export function wireframeEdges(faces: number[][]): Array<[number, number]> {
  const seen = new Set<string>();
  const edges: Array<[number, number]> = [];
  for (const [a, b, c] of faces) {
    for (const [u, v] of [[a, b], [b, c], [c, a]] as Array<[number, number]>) {
      const key = u < v ? `${u}-${v}` : `${v}-${u}`;
      if (!seen.has(key)) {
        seen.add(key);
        edges.push(u < v ? [u, v] : [v, u]);
      }
    }
  }
  return edges;
}

export function capScatter(points: RGB[], cap: number = SCATTER_CAP): RGB[] {
  if (points.length <= cap) return points;
  const step = points.length / cap;
  const out: RGB[] = [];
  for (let i = 0; i < cap; i++) {
    out.push(points[Math.floor(i * step)]);
  }
  return out;
}

export class HullViewer {
  view: ViewAngles = { yaw: 0.7, pitch: 0.5, zoom: 1.0 };
  private scatter: RGB[] = [];
  private hull: HullMesh | null = null;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(
    readonly canvas: HTMLCanvasElement,
    readonly fallback: HTMLElement,
  ) {
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    canvas.addEventListener("pointerup", () => (this.dragging = false));
    canvas.addEventListener("pointerleave", () => (this.dragging = false));
    canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      this.rotate((e.clientX - this.lastX) * 0.01, (e.clientY - this.lastY) * 0.01);
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.zoomBy(e.deltaY < 0 ? 1.1 : 1 / 1.1);
    });
  }

  setData(scatter: RGB[], hull: HullMesh | null): void {
    this.scatter = capScatter(scatter);
    this.hull = hull;
    this.render();
  }

  rotate(dYaw: number, dPitch: number): void {
    this.view.yaw += dYaw;
    this.view.pitch = Math.max(-1.4, Math.min(1.4, this.view.pitch + dPitch));
    this.render();
  }

  zoomBy(factor: number): void {
    this.view.zoom = Math.max(0.2, Math.min(8, this.view.zoom * factor));
    this.render();
  }

  render(): void {
    const degenerate = this.hull === null || this.hull.vertices.length < 4;
    this.fallback.hidden = !degenerate;
    this.canvas.hidden = degenerate;
    if (degenerate) {
      this.fallback.textContent =
        "The color cloud is flat; no 3D hull to show. Palette uses the extreme colors.";
      return;
    }
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const size = this.canvas.width;
    ctx.clearRect(0, 0, size, size);

    for (const point of this.scatter) {
      const p = project(point, this.view, size);
      ctx.fillStyle = `rgb(${point[0]},${point[1]},${point[2]})`;
      ctx.fillRect(p.x, p.y, 2, 2);
    }

    const hull = this.hull!;
    ctx.strokeStyle = "rgba(255,255,255,0.7)";
    ctx.lineWidth = 1;
    for (const [a, b] of wireframeEdges(hull.faces)) {
      const pa = project(hull.vertices[a], this.view, size);
      const pb = project(hull.vertices[b], this.view, size);
      ctx.beginPath();
      ctx.moveTo(pa.x, pa.y);
      ctx.lineTo(pb.x, pb.y);
      ctx.stroke();
    }

    for (const vertex of hull.vertices) {
      const p = project(vertex, this.view, size);
      ctx.fillStyle = `rgb(${Math.round(vertex[0])},${Math.round(vertex[1])},${Math.round(vertex[2])})`;
      ctx.strokeStyle = "#fff";
      ctx.beginPath();
      ctx.arc(p.x, p.y, 6, 0, Math.PI * 2);
      ctx.fill();
      ctx.stroke();
    }
  }
}
