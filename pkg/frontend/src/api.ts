/** Thin typed client for the decomposition service. */

import type {
  JobStatus,
  PaletteResponse,
  PreviewResponse,
  RGB,
  SessionCreated,
  SimplifyParams,
  SolveOptions,
} from "./types";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function jsonOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = body.detail ?? JSON.stringify(body);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class Client {
  constructor(readonly base: string = "", readonly fetchImpl: typeof fetch = fetch) {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async createSession(file: Blob, name = "painting.png"): Promise<SessionCreated> {
    const form = new FormData();
    form.append("image", file, name);
    const response = await this.fetchImpl(this.url("/sessions"), {
      method: "POST",
      body: form,
    });
    return jsonOrThrow<SessionCreated>(response);
  }

  async computePalette(sessionId: string, params: SimplifyParams): Promise<PaletteResponse> {
    const response = await this.fetchImpl(this.url(`/sessions/${sessionId}/palette`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params),
    });
    return jsonOrThrow<PaletteResponse>(response);
  }

  async removeColor(sessionId: string, index: number): Promise<PaletteResponse> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${sessionId}/palette/colors/${index}`),
      { method: "DELETE" },
    );
    return jsonOrThrow<PaletteResponse>(response);
  }

  async submitJob(
    sessionId: string,
    order: number[],
    options: SolveOptions = {},
  ): Promise<string> {
    const response = await this.fetchImpl(this.url(`/sessions/${sessionId}/jobs`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ order, options }),
    });
    const body = await jsonOrThrow<{ job_id: string }>(response);
    return body.job_id;
  }

  async jobStatus(sessionId: string, jobId: string): Promise<JobStatus> {
    const response = await this.fetchImpl(this.url(`/sessions/${sessionId}/jobs/${jobId}`));
    return jsonOrThrow<JobStatus>(response);
  }

  /** Latest preview, or null while the first pyramid level is still solving. */
  async latestPreview(sessionId: string, jobId: string): Promise<PreviewResponse | null> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${sessionId}/jobs/${jobId}/previews/latest`),
    );
    if (response.status === 404) return null;
    return jsonOrThrow<PreviewResponse>(response);
  }

  async cancelJob(sessionId: string, jobId: string): Promise<JobStatus> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${sessionId}/jobs/${jobId}/cancel`),
      { method: "POST" },
    );
    return jsonOrThrow<JobStatus>(response);
  }

  async recolorPreview(
    sessionId: string,
    jobId: string,
    layerIndex: number,
    color: RGB,
  ): Promise<Blob> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${sessionId}/jobs/${jobId}/recolor`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ layer_index: layerIndex, new_color: color }),
      },
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.blob();
  }

  async fetchResult(sessionId: string, jobId: string): Promise<Blob> {
    const response = await this.fetchImpl(
      this.url(`/sessions/${sessionId}/jobs/${jobId}/result`),
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.blob();
  }
}
