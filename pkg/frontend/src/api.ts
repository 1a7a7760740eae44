/** Typed client for the QA service. The UI never recomputes scores;
 * everything rendered comes straight from these responses. */

export interface Highlight {
  start: number;
  end: number;
}

export interface Latency {
  retrieve_ms: number;
  read_ms: number;
  total_ms: number;
}

export interface AskResponse {
  answer: string | null;
  sentence?: string;
  highlight?: Highlight;
  fused_score?: number;
  segment_id?: string;
  status: "ok" | "no_answer" | "empty_query";
  k: number;
  mu: number;
  granularity: string;
  latency: Latency;
}

export interface AskOverrides {
  k?: number;
  mu?: number;
  granularity?: string;
}

/** Error for anything that should render as a retryable bubble:
 * network failures and non-2xx responses. */
export class ApiError extends Error {
  readonly status: number | null;

  constructor(message: string, status: number | null = null) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export async function askQuestion(
  question: string,
  overrides: AskOverrides = {},
  fetchImpl: FetchLike = fetch,
  baseUrl = "",
): Promise<AskResponse> {
  let resp: Response;
  try {
    resp = await fetchImpl(`${baseUrl}/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question, ...overrides }),
    });
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!resp.ok) {
    let detail = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(detail, resp.status);
  }
  return (await resp.json()) as AskResponse;
}
