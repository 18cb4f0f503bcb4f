/** Typed client for the review service. All state changes round-trip through
 * these calls; nothing is ever synthesized on the client. */

import type { QueuePage, RegistryLabel, Task, VerdictRequest, VerdictResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string | null,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      Accept: "application/json",
      ...(init.headers as Record<string, string> | undefined),
    };
    if (this.token) headers.Authorization = `Bearer ${this.token}`;
    if (init.body) headers["Content-Type"] = "application/json";

    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  loadQueue(task: Task, limit = 25, offset = 0): Promise<QueuePage> {
    const params = new URLSearchParams({
      task,
      status: "pending",
      limit: String(limit),
      offset: String(offset),
    });
    return this.request<QueuePage>(`/review/queue?${params}`);
  }

  async loadRegistry(task: Task): Promise<RegistryLabel[]> {
    const body = await this.request<{ task: Task; labels: RegistryLabel[] }>(
      `/registry/${task}`,
    );
    return body.labels;
  }

  submitVerdict(predictionId: string, verdict: VerdictRequest): Promise<VerdictResponse> {
    return this.request<VerdictResponse>(`/review/${predictionId}/verdict`, {
      method: "POST",
      body: JSON.stringify(verdict),
    });
  }
}
