/** Typed client for the two public endpoints. */

export interface SuggestionRow {
  key: string;
  sku_id: number;
  field_kind: "part_number" | "item_name" | "friendly_name";
}

export interface SuggestResponse {
  suggestions: SuggestionRow[];
  elapsed_ms: number;
}

export interface ResultRow {
  sku_id: number;
  part_number: string;
  item_name: string;
  friendly_name: string | null;
  description: string | null;
  scores: Record<string, number>;
  nlcs_score?: number | null;
  matched_field?: string | null;
}

export interface SearchResponse {
  query: string;
  branch: "part_number" | "hybrid";
  results: ResultRow[];
  corrected_query: string | null;
  degraded: boolean;
  elapsed_ms: number;
}

/** Service-reported failure, carrying the HTTP status and error code. */
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

/** The slice of fetch the client relies on; tests substitute their own. */
export type FetchLike = (url: string) => Promise<{
  status: number;
  json(): Promise<unknown>;
}>;

export interface ApiClient {
  suggest(q: string, limit?: number): Promise<SuggestResponse>;
  search(q: string): Promise<SearchResponse>;
}

async function request<T>(fetchFn: FetchLike, url: string): Promise<T> {
  const response = await fetchFn(url);
  if (response.status >= 200 && response.status < 300) {
    return (await response.json()) as T;
  }
  let code = "error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // keep the generic message when the body is not the error shape
  }
  throw new ApiError(response.status, code, message);
}

export function createApiClient(baseUrl: string, fetchFn: FetchLike): ApiClient {
  const root = baseUrl.replace(/\/+$/, "");
  return {
    suggest(q, limit) {
      const params = new URLSearchParams({ q });
      if (limit !== undefined) params.set("limit", String(limit));
      return request<SuggestResponse>(fetchFn, `${root}/suggest?${params}`);
    },
    search(q) {
      const params = new URLSearchParams({ q });
      return request<SearchResponse>(fetchFn, `${root}/search?${params}`);
    },
  };
}

/** Base URL from the ?api= query parameter, else the conventional local port. */
export function resolveBaseUrl(search: string, fallback = "http://127.0.0.1:8080"): string {
  const fromQuery = new URLSearchParams(search).get("api");
  return fromQuery ? fromQuery : fallback;
}
