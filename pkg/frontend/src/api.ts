import type { KgDoc, MatrixRow, Meta, PaperDetail, TreeKind, TreeParams } from "./types.js";

/** A failed request, carrying the server's field/message when it sent one. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly field?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<Response>;

/**
 * Typed client for the graph service. Read-only by design: every method
 * issues a plain GET.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  kg(kind: TreeKind, params: TreeParams, signal?: AbortSignal): Promise<KgDoc> {
    const query = new URLSearchParams({
      N: String(params.N),
      M: String(params.M),
      T: String(params.T),
    });
    return this.get(`/kg/${kind}?${query}`, signal);
  }

  paper(id: number): Promise<PaperDetail> {
    return this.get(`/paper/${id}`);
  }

  matrixRow(id: number): Promise<MatrixRow> {
    return this.get(`/matrix/row/${id}`);
  }

  meta(): Promise<Meta> {
    return this.get("/meta");
  }

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, { signal });
    } catch (err) {
      // Aborts must stay aborts so callers can discard stale requests.
      if (err instanceof Error && err.name === "AbortError") throw err;
      throw new ApiError(0, "service unreachable");
    }
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as T;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  try {
    const body = (await response.json()) as { field?: string; message?: string };
    if (body && typeof body.message === "string") {
      const text = body.field ? `${body.field}: ${body.message}` : body.message;
      return new ApiError(response.status, text, body.field);
    }
  } catch {
    // not JSON; fall through to the generic message
  }
  return new ApiError(response.status, `request failed with status ${response.status}`);
}
