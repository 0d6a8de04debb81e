// Typed client for the session service. Every mutation corresponds to one
// documented endpoint; errors carry the service's code + message verbatim.

import type {
  CandidateSet,
  Coverage,
  Diagnosis,
  Envelope,
  SessionInfo,
  StageDetail,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: Envelope<T> | null = null;
    try {
      body = (await response.json()) as Envelope<T>;
    } catch {
      body = null;
    }
    if (!response.ok || !body || !body.ok) {
      const code = body?.error?.code ?? "usage";
      const message = body?.error?.message ?? `request failed with HTTP ${response.status}`;
      throw new ApiRequestError(response.status, code, message);
    }
    return body.data as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload ?? {}),
    });
  }

  getSession(): Promise<SessionInfo> {
    return this.request("/api/session");
  }

  getStage(stage: number): Promise<StageDetail> {
    return this.request(`/api/stages/${stage}`);
  }

  runStage(stage: number): Promise<unknown> {
    return this.post(`/api/stages/${stage}/run`);
  }

  confirmStage(stage: number, message?: string, acknowledgeUnprocessed = false): Promise<unknown> {
    return this.post(`/api/stages/${stage}/confirm`, {
      message: message || null,
      acknowledge_unprocessed: acknowledgeUnprocessed,
    });
  }

  rejectStage(stage: number, message: string): Promise<unknown> {
    return this.post(`/api/stages/${stage}/reject`, { message });
  }

  reopenStage(stage: number): Promise<unknown> {
    return this.post(`/api/stages/${stage}/reopen`);
  }

  getCandidates(): Promise<CandidateSet> {
    return this.request("/api/candidates");
  }

  postVerdict(mappingId: string, status: "Accepted" | "Rejected" | "Modified", tag?: string, note?: string): Promise<unknown> {
    return this.post(`/api/mappings/${mappingId}/verdict`, { status, tag: tag || null, note: note || null });
  }

  markUnmatched(uid: string, note?: string): Promise<unknown> {
    return this.post(`/api/elements/${uid}/unmatch`, { note: note || null });
  }

  getCoverage(): Promise<Coverage> {
    return this.request("/api/coverage");
  }

  getDiagnosis(): Promise<Diagnosis> {
    return this.request("/api/diagnosis");
  }

  async getArtifactText(name: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/artifacts/${name}`);
    if (!response.ok) {
      throw new ApiRequestError(response.status, "usage", `artifact ${name} unavailable`);
    }
    return response.text();
  }
}
