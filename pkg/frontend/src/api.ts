/**
 * Typed client for the session service.
 *
 * Endpoints: POST /sessions, GET /sessions/{id}, POST /sessions/{id}/feedback,
 * GET /sessions/{id}/metrics, GET /images/{id}?variant=.
 * Errors arrive as {code, message} and are rethrown as ApiError.
 */

export interface PageCell {
  id: number;
  rank: number;
  thumb_url: string;
}

export interface Page {
  iteration: number;
  iterations_spanned: number;
  images: PageCell[];
  carried_relevant: number[];
}

export type SessionStatus = "awaiting_feedback" | "converged" | "exhausted";

export interface CreateSessionResponse {
  session_id: string;
  page: Page;
}

export interface FeedbackResponse {
  session_id: string;
  status: SessionStatus;
  page: Page | null;
}

export interface MetricsRow {
  iteration: number;
  shown: number;
  relevant: number;
  precision: number;
  recall: number;
  re: number;
  fd: number;
}

export interface MetricsResponse {
  session_id: string;
  iterations: MetricsRow[];
}

export type MarkValue = "relevant" | "nonrelevant";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "unreachable", `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "error";
      const message =
        typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  createSession(
    queryImageId: number,
    scheme: string,
    scope: number,
    rMax = 4,
  ): Promise<CreateSessionResponse> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        query_image_id: queryImageId,
        scheme,
        scope,
        r_max: rMax,
      }),
    });
  }

  submitFeedback(
    sessionId: string,
    marks: Record<number, MarkValue>,
  ): Promise<FeedbackResponse> {
    return this.request(`/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ marks }),
    });
  }

  getMetrics(sessionId: string): Promise<MetricsResponse> {
    return this.request(`/sessions/${sessionId}/metrics`);
  }

  imageUrl(id: number, variant: "full" | "thumb" = "thumb"): string {
    return `${this.baseUrl}/images/${id}?variant=${variant}`;
  }
}
