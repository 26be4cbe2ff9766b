import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError, LatestRequest } from "../src/api.js";
import { emptyState, type ViewState } from "../src/state.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("search URL building", () => {
  const client = new ApiClient();

  it("includes query, tab, facets, and paging", () => {
    const state: ViewState = {
      query: "social trust",
      tab: "publication",
      facets: { year: ["2011", "2012"], source: [], language: ["en"] },
      page: 3,
      record: null,
      open: [],
    };
    const url = new URL(client.searchUrl(state), "http://localhost");
    expect(url.pathname).toBe("/api/search");
    expect(url.searchParams.get("q")).toBe("social trust");
    expect(url.searchParams.get("type")).toBe("publication");
    expect(url.searchParams.getAll("year")).toEqual(["2011", "2012"]);
    expect(url.searchParams.getAll("language")).toEqual(["en"]);
    expect(url.searchParams.get("from")).toBe("20");
    expect(url.searchParams.get("size")).toBe("10");
  });

  it("keeps the match-all landing query minimal", () => {
    const url = new URL(client.searchUrl(emptyState()), "http://localhost");
    expect(url.searchParams.has("q")).toBe(false);
    expect(url.searchParams.has("type")).toBe(false);
    expect(url.searchParams.get("from")).toBe("0");
  });

  it("escapes record ids in detail and citation URLs", () => {
    expect(new ApiClient("").citationUrl("doi:10.1/a b", "bibtex")).toBe(
      "/api/record/doi%3A10.1%2Fa%20b/citation?format=bibtex",
    );
  });
});

describe("error mapping", () => {
  it("raises ApiError with the server message", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        new Response(
          JSON.stringify({ error: { status: 400, code: "invalid-query", message: "bad query" } }),
          { status: 400 },
        ),
      ),
    );
    const err = await new ApiClient().search(emptyState()).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toBe("bad query");
  });
});

describe("newest request wins", () => {
  it("aborts the previous request and discards its result", async () => {
    const latest = new LatestRequest();
    let firstSignal: AbortSignal | null = null;
    let releaseFirst: (value: string) => void = () => {};

    const first = latest.run((signal) => {
      firstSignal = signal;
      return new Promise<string>((resolve) => {
        releaseFirst = resolve;
      });
    });
    const second = latest.run(async () => "second");

    expect(await second).toBe("second");
    expect(firstSignal!.aborted).toBe(true);

    releaseFirst("first");
    expect(await first).toBeNull();
  });

  it("treats an abort-time rejection as superseded, not an error", async () => {
    const latest = new LatestRequest();
    const first = latest.run(
      (signal) =>
        new Promise<string>((_, reject) => {
          signal.addEventListener("abort", () => reject(new Error("aborted")));
        }),
    );
    const second = latest.run(async () => "ok");
    expect(await second).toBe("ok");
    expect(await first).toBeNull();
  });

  it("propagates real failures of the current request", async () => {
    const latest = new LatestRequest();
    await expect(latest.run(async () => {
      throw new Error("boom");
    })).rejects.toThrow("boom");
  });
});
