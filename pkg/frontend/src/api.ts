// Thin typed client for the service HTTP API. Errors carry the service's
// {code, message} body so views can surface them inline.

import type {
  ApiError,
  SegmentRecord,
  SessionCreated,
  UtteranceResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const err = body as Partial<ApiError>;
    throw new ServiceError(resp.status, err.code ?? "unknown", err.message ?? resp.statusText);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  createSession(userId?: string): Promise<SessionCreated> {
    return request(`${this.baseUrl}/v1/sessions`, {
      method: "POST",
      body: JSON.stringify(userId ? { user_id: userId } : {}),
    });
  }

  sendUtterance(sessionId: string, text: string): Promise<UtteranceResponse> {
    return request(`${this.baseUrl}/v1/sessions/${sessionId}/utterance`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  closeSession(sessionId: string): Promise<unknown> {
    return request(`${this.baseUrl}/v1/sessions/${sessionId}`, { method: "DELETE" });
  }

  listSegments(userId: string): Promise<{ user_id: string; segments: SegmentRecord[] }> {
    return request(`${this.baseUrl}/v1/users/${userId}/memory/segments`);
  }

  eventsUrl(sessionId: string): string {
    return `${this.baseUrl}/v1/sessions/${sessionId}/events`;
  }
}
