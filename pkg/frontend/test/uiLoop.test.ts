/** Scripted browser test of the full interactive loop:
 * upload -> palette -> reorder -> solve -> progressive preview -> recolor ->
 * export. Runs against a mocked server speaking the exact wire format
 * recorded from the real service (see fixtures/ui_loop.json).
 */

// @vitest-environment jsdom

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeEach, describe, expect, it, vi } from "vitest";

import { Client } from "../src/api";
import { startApp } from "../src/app";
import uiLoopFixture from "./fixtures/ui_loop.json";

const here = dirname(fileURLToPath(import.meta.url));

interface UiLoopFixture {
  upload_png_base64: string;
  session: { session_id: string; width: number; height: number; mode: string };
  palette_response: Record<string, unknown> & { colors: number[][] };
  job_created: { job_id: string };
  status_sequence: Array<Record<string, unknown> & { state: string }>;
  previews: Array<Record<string, unknown> & {
    level: number;
    width: number;
    height: number;
    composite_png_base64: string;
  }>;
  recolor_png_base64: string;
  result_zip_base64: string;
  result_zip_rmse: number;
}

const fixture = uiLoopFixture as unknown as UiLoopFixture;

function bytesOf(base64: string): Uint8Array {
  return Uint8Array.from(atob(base64), (ch) => ch.charCodeAt(0));
}

interface RequestLogEntry {
  method: string;
  path: string;
  body: unknown;
}

/** Fake server enforcing the same preconditions as the real one. */
function makeServer() {
  const log: RequestLogEntry[] = [];
  let statusCalls = 0;
  let jobRunning = false;

  const json = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  // jsdom's Blob lacks .stream(); hand Response the raw bytes instead
  const binary = (bytes: Uint8Array, type: string) =>
    new Response(bytes as unknown as BodyInit, {
      status: 200,
      headers: { "Content-Type": type },
    });

  const fetchImpl = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const path = String(input);
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : init?.body ?? null;
    log.push({ method, path, body });

    if (method === "POST" && path === "/sessions") {
      return json(fixture.session, 201);
    }
    if (method === "POST" && path.endsWith("/palette")) {
      if (jobRunning) return json({ detail: "a solve job is running" }, 409);
      return json(fixture.palette_response);
    }
    if (method === "POST" && path.endsWith("/jobs")) {
      const order = (body as { order: number[] }).order;
      const size = fixture.palette_response.colors.length;
      const valid =
        order.length === size && new Set(order).size === size &&
        order.every((v) => v >= 0 && v < size);
      if (!valid) return json({ detail: "order must be a permutation" }, 422);
      if (jobRunning) return json({ detail: "a solve job is already running" }, 409);
      jobRunning = true;
      return json(fixture.job_created, 202);
    }
    if (method === "GET" && /\/jobs\/[^/]+$/.test(path)) {
      const idx = Math.min(statusCalls, fixture.status_sequence.length - 1);
      statusCalls += 1;
      const status = fixture.status_sequence[idx];
      if (status.state === "done") jobRunning = false;
      return json(status);
    }
    if (method === "GET" && path.endsWith("/previews/latest")) {
      if (statusCalls <= 1) return json({ detail: "no preview available yet" }, 404);
      if (statusCalls === 2) return json(fixture.previews[0]);
      return json(fixture.previews[fixture.previews.length - 1]);
    }
    if (method === "POST" && path.endsWith("/recolor")) {
      const request = body as { layer_index: number; new_color: number[] };
      if (jobRunning) return json({ detail: "job is running, not done" }, 409);
      if (request.new_color.some((c) => c < 0 || c > 255)) {
        return json({ detail: "color channels must be in 0..255" }, 422);
      }
      return binary(bytesOf(fixture.recolor_png_base64), "image/png");
    }
    if (method === "GET" && path.endsWith("/result")) {
      if (jobRunning) return json({ detail: "job is running, not done" }, 409);
      return binary(bytesOf(fixture.result_zip_base64), "application/zip");
    }
    return json({ detail: `unhandled ${method} ${path}` }, 500);
  };

  return { fetchImpl, log };
}

function loadPage(): void {
  const html = readFileSync(join(here, "..", "index.html"), "utf-8");
  const body = html.slice(html.indexOf("<body>") + 6, html.indexOf("</body>"));
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/, "");
}

function stubDragPayload() {
  const store = new Map<string, string>();
  return {
    setData: (key: string, value: string) => void store.set(key, value),
    getData: (key: string) => store.get(key) ?? "",
  };
}

function dragRow(from: Element, to: Element): void {
  const payload = stubDragPayload();
  const start = new Event("dragstart", { bubbles: true }) as Event & { dataTransfer: unknown };
  start.dataTransfer = payload;
  from.dispatchEvent(start);
  const drop = new Event("drop", { bubbles: true, cancelable: true }) as Event & {
    dataTransfer: unknown;
  };
  drop.dataTransfer = payload;
  to.dispatchEvent(drop);
}

/** Let pending async handlers (fetch .then chains) finish. */
function settle(ms = 25): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeEach(() => {
  loadPage();
  if (!("createObjectURL" in URL) || typeof URL.createObjectURL !== "function") {
    Object.defineProperty(URL, "createObjectURL", {
      value: () => "blob:stub",
      configurable: true,
    });
  } else {
    vi.spyOn(URL, "createObjectURL").mockReturnValue("blob:stub");
  }
});

describe("interactive decomposition loop", () => {
  it("runs upload -> palette -> reorder -> solve -> preview -> recolor -> export", async () => {
    const server = makeServer();
    const client = new Client("", server.fetchImpl as typeof fetch);
    startApp(client, {
      pollIntervalMs: 10,
      alphaDecoder: async (_b64, width, height) => new Uint8ClampedArray(width * height),
    });

    // 1. upload the painting
    const upload = document.getElementById("upload") as HTMLInputElement;
    const file = new File([bytesOf(fixture.upload_png_base64) as BlobPart], "painting.png", {
      type: "image/png",
    });
    Object.defineProperty(upload, "files", { value: [file], configurable: true });
    upload.dispatchEvent(new Event("change"));
    await vi.waitFor(() =>
      expect(server.log.some((r) => r.path === "/sessions")).toBe(true),
    );
    await settle();

    // 2. extract the palette: four swatches appear
    (document.getElementById("palette-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { cancelable: true }),
    );
    await vi.waitFor(() =>
      expect(document.querySelectorAll("#order-list .swatch-row")).toHaveLength(4),
    );
    expect(document.getElementById("palette-stats")!.textContent).toContain("4 colors");

    // 3. drag the top row so the order becomes 0,3,1,2
    const rows = document.querySelectorAll("#order-list .swatch-row");
    dragRow(rows[3], rows[1]);
    await vi.waitFor(() => {
      const labels = [...document.querySelectorAll("#order-list .swatch-row")].map(
        (row) => row.textContent ?? "",
      );
      expect(labels[1]).toContain("color 3");
    });

    // 4. submit the solve; double-click must not produce a second request
    const submit = document.getElementById("submit-job") as HTMLButtonElement;
    submit.click();
    submit.click();
    await vi.waitFor(() =>
      expect(server.log.filter((r) => r.method === "POST" && r.path.endsWith("/jobs"))).toHaveLength(1),
    );
    const jobRequest = server.log.find((r) => r.method === "POST" && r.path.endsWith("/jobs"))!;
    expect((jobRequest.body as { order: number[] }).order).toEqual([0, 3, 1, 2]);

    // 5. progressive preview: resolution grows, final composite displayed
    const compositeImage = document.getElementById("composite-preview") as HTMLImageElement;
    const finalPreview = fixture.previews[fixture.previews.length - 1];
    await vi.waitFor(
      () =>
        expect(compositeImage.src).toBe(
          `data:image/png;base64,${finalPreview.composite_png_base64}`,
        ),
      { timeout: 5000 },
    );
    expect(document.getElementById("job-status")!.textContent).toContain("done");
    const previewPaths = server.log.filter((r) => r.path.endsWith("/previews/latest"));
    expect(previewPaths.length).toBeGreaterThanOrEqual(2);
    expect(document.querySelectorAll("#layer-list .layer-row")).toHaveLength(3);

    // 6. recolor one layer; the request carries the picked color
    (document.getElementById("recolor-layer") as HTMLSelectElement).value = "1";
    (document.getElementById("recolor-color") as HTMLInputElement).value = "#ff00ff";
    (document.getElementById("recolor-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { cancelable: true }),
    );
    await vi.waitFor(() => expect(compositeImage.src).toBe("blob:stub"));
    const recolorRequest = server.log.find((r) => r.path.endsWith("/recolor"))!;
    expect(recolorRequest.body).toEqual({ layer_index: 1, new_color: [255, 0, 255] });

    // 7. export: the download link points at the result and the zip delivered
    // by the service recomposes the painting within the primary RMSE bound
    // (recorded by the pipeline when the fixture was produced).
    const link = document.getElementById("download-link") as HTMLAnchorElement;
    expect(link.hidden).toBe(false);
    expect(link.getAttribute("href")).toContain("/result");
    const zip = await client.fetchResult(
      fixture.session.session_id,
      fixture.job_created.job_id,
    );
    expect(zip.size).toBe(bytesOf(fixture.result_zip_base64).length);
    expect(fixture.result_zip_rmse).toBeLessThan(1.0);
  });

  it("surfaces degenerate palettes without crashing", async () => {
    const server = makeServer();
    const degenerateFetch: typeof fetch = async (input, init) => {
      const path = String(input);
      if ((init?.method ?? "GET") === "POST" && path.endsWith("/palette")) {
        return new Response(
          JSON.stringify({ detail: "degenerate color cloud (affine dimension 0)" }),
          { status: 422, headers: { "Content-Type": "application/json" } },
        );
      }
      return server.fetchImpl(input, init);
    };
    startApp(new Client("", degenerateFetch), { pollIntervalMs: 10 });

    const upload = document.getElementById("upload") as HTMLInputElement;
    const file = new File([bytesOf(fixture.upload_png_base64) as BlobPart], "one.png", {
      type: "image/png",
    });
    Object.defineProperty(upload, "files", { value: [file], configurable: true });
    upload.dispatchEvent(new Event("change"));
    await vi.waitFor(() =>
      expect(server.log.some((r) => r.path === "/sessions")).toBe(true),
    );
    await settle();

    (document.getElementById("palette-form") as HTMLFormElement).dispatchEvent(
      new Event("submit", { cancelable: true }),
    );
    await vi.waitFor(() =>
      expect(document.getElementById("error-line")!.textContent).toContain("degenerate"),
    );
  });
});
