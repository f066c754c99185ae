/** Thin typed client over the listening-test HTTP API.
 *
 * Terminal conditions (unknown test, quota, rejected payload) surface as
 * non-retryable ApiErrors; connectivity problems are retryable so the
 * page can keep the listener's unsaved ratings and offer another try.
 * A 409 on submission means this screen was already stored, which the
 * caller treats as success.
 */

import type { Assignment, ScreenPayload } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null,
    readonly retryable: boolean,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type SubmitResult = "stored" | "duplicate";

export interface Api {
  loadAssignment(testId: string, listenerId: string): Promise<Assignment>;
  submitScreen(testId: string, payload: ScreenPayload): Promise<SubmitResult>;
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (typeof detail === "string") return detail;
    if (detail && typeof detail === "object") {
      return Object.entries(detail)
        .map(([field, msg]) => `${field}: ${msg}`)
        .join("; ");
    }
  } catch {
    // fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export function createApi(fetchFn: typeof fetch, base = ""): Api {
  async function request(url: string, init?: RequestInit): Promise<Response> {
    try {
      return await fetchFn(base + url, init);
    } catch (err) {
      throw new ApiError(
        `cannot reach the test service (${String(err)})`,
        null,
        true,
      );
    }
  }

  return {
    async loadAssignment(testId, listenerId) {
      const url =
        `/tests/${encodeURIComponent(testId)}/assignment` +
        `?listener=${encodeURIComponent(listenerId)}`;
      const response = await request(url);
      if (response.ok) return (await response.json()) as Assignment;
      const detail = await detailOf(response);
      throw new ApiError(detail, response.status, response.status >= 500);
    },

    async submitScreen(testId, payload) {
      const response = await request(
        `/tests/${encodeURIComponent(testId)}/responses`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(payload),
        },
      );
      if (response.status === 204) return "stored";
      if (response.status === 409) return "duplicate";
      const detail = await detailOf(response);
      throw new ApiError(detail, response.status, response.status >= 500);
    },
  };
}
