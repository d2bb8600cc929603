// Thin typed client over the annotation service HTTP API.

import type { JudgmentPayload, Progress, QualificationAnswer, TaskResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class OfflineError extends Error {}

async function detailOf(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
  } catch {
    return resp.statusText;
  }
}

export class AnnotationClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new OfflineError(String(err));
    }
    if (!resp.ok && resp.status !== 204) {
      throw new ApiError(resp.status, await detailOf(resp));
    }
    return resp;
  }

  /** Next task batch for the annotator, or null when the pool is exhausted. */
  async nextTask(annotatorId: string): Promise<TaskResponse | null> {
    const resp = await this.request(`/api/task?annotator=${encodeURIComponent(annotatorId)}`);
    if (resp.status === 204) return null;
    return (await resp.json()) as TaskResponse;
  }

  async submitJudgment(payload: JudgmentPayload): Promise<{ record_id: number }> {
    const resp = await this.request("/api/judgment", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return (await resp.json()) as { record_id: number };
  }

  async qualify(annotatorId: string, answers: QualificationAnswer[]): Promise<boolean> {
    const resp = await this.request("/api/qualify", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator_id: annotatorId, answers }),
    });
    const body = (await resp.json()) as { qualified: boolean };
    return body.qualified;
  }

  async progress(annotatorId?: string): Promise<Progress> {
    const query = annotatorId ? `?annotator=${encodeURIComponent(annotatorId)}` : "";
    const resp = await this.request(`/api/progress${query}`);
    return (await resp.json()) as Progress;
  }
}
