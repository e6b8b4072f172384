// HTTP client for the session service.

import {
  Backend,
  BackendError,
  CreateSessionRequest,
  CreateSessionResponse,
  SessionStateResponse,
  StepResponse,
} from "./types.js";

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new BackendError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class HttpBackend implements Backend {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify(req),
    });
  }

  step(sessionId: string, instruction: string): Promise<StepResponse> {
    return request(`${this.baseUrl}/sessions/${sessionId}/steps`, {
      method: "POST",
      body: JSON.stringify({ instruction }),
    });
  }

  getSession(sessionId: string): Promise<SessionStateResponse> {
    return request(`${this.baseUrl}/sessions/${sessionId}`);
  }

  undo(sessionId: string): Promise<{ turns: number }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/undo`, {
      method: "POST",
    });
  }

  async deleteSession(sessionId: string): Promise<void> {
    await request(`${this.baseUrl}/sessions/${sessionId}`, { method: "DELETE" });
  }
}

/** Base URL from the single configuration value, with a local default. */
export function serviceBaseUrl(): string {
  const fromGlobal = (globalThis as Record<string, unknown>)
    .ITERDRAW_SERVICE_URL;
  if (typeof fromGlobal === "string" && fromGlobal.length > 0) return fromGlobal;
  return "http://127.0.0.1:8000";
}
