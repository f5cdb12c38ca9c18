/** Thin HTTP client for the session server; the console's only data source. */

import { SessionInfo, TurnResult } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      const body = await resp.text();
      throw new ApiError(`${resp.status}: ${body.slice(0, 200)}`, resp.status);
    }
    return (await resp.json()) as T;
  }

  scenarios(): Promise<{ scenarios: string[] }> {
    return this.request("/scenarios");
  }

  createSession(scenario: string): Promise<SessionInfo> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ scenario }),
    });
  }

  submitCommand(sessionId: string, text: string): Promise<TurnResult> {
    return this.request(`/sessions/${sessionId}/commands`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  sessionState(sessionId: string): Promise<{ phase: string; snapshot: unknown }> {
    return this.request(`/sessions/${sessionId}`);
  }

  streamUrl(sessionId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/sessions/${sessionId}/stream`;
  }
}
