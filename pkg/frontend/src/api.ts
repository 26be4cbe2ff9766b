import type { LinksResponse, RecordDetail, SearchResponse } from "./types.js";
import { FACET_FIELDS, PAGE_SIZE, pageOffset, type ViewState } from "./state.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    let message = `request failed with status ${response.status}`;
    try {
      const body = await response.json();
      if (body?.error?.message) message = body.error.message;
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(response.status, message);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  searchUrl(state: ViewState): string {
    const params = new URLSearchParams();
    if (state.query) params.set("q", state.query);
    if (state.tab !== "all") params.set("type", state.tab);
    for (const field of FACET_FIELDS) {
      for (const value of state.facets[field]) params.append(field, value);
    }
    params.set("from", String(pageOffset(state)));
    params.set("size", String(PAGE_SIZE));
    return `${this.base}/api/search?${params.toString()}`;
  }

  search(state: ViewState, signal?: AbortSignal): Promise<SearchResponse> {
    return getJson<SearchResponse>(this.searchUrl(state), signal);
  }

  record(recordId: string, signal?: AbortSignal): Promise<RecordDetail> {
    return getJson<RecordDetail>(
      `${this.base}/api/record/${encodeURIComponent(recordId)}`,
      signal,
    );
  }

  links(recordId: string, signal?: AbortSignal): Promise<LinksResponse> {
    return getJson<LinksResponse>(
      `${this.base}/api/record/${encodeURIComponent(recordId)}/links`,
      signal,
    );
  }

  citationUrl(recordId: string, format: string): string {
    const id = encodeURIComponent(recordId);
    return `${this.base}/api/record/${id}/citation?format=${encodeURIComponent(format)}`;
  }
}

/** Keeps at most one request in flight: starting a new one aborts the
 * previous, and a superseded result comes back as null so stale
 * responses never reach the view.
 */
export class LatestRequest {
  private controller: AbortController | null = null;

  async run<T>(request: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      const value = await request(controller.signal);
      return this.controller === controller ? value : null;
    } catch (error) {
      if (controller.signal.aborted) return null;
      throw error;
    }
  }
}
