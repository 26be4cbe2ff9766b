import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/controller.js";
import { Telemetry } from "../src/telemetry.js";
import {
  emptyResponse,
  jsonResponse,
  linksResponse,
  recordDetail,
  searchResponse,
} from "./fixtures.js";

/** Posted /api/log bodies, in order. */
let logged: Array<Record<string, unknown>>;
let app: App | null = null;
let root: HTMLElement;

function stubApi(overrides: Record<string, unknown> = {}): void {
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = new URL(String(input), "http://localhost");
      const routes: Record<string, unknown> = {
        "/api/search": searchResponse(),
        "/api/record/rec-1": recordDetail(),
        "/api/record/rec-1/links": linksResponse(),
        ...overrides,
      };
      if (url.pathname === "/api/log") {
        logged.push(JSON.parse(String(init?.body)));
        return jsonResponse({ accepted: true });
      }
      if (url.pathname in routes) {
        const body = routes[url.pathname];
        if (body instanceof Response) return body;
        return jsonResponse(body);
      }
      throw new Error(`unexpected request: ${url.pathname}`);
    }),
  );
}

async function startApp(query: string): Promise<App> {
  history.replaceState(null, "", query || "/");
  app = new App({
    root,
    api: new ApiClient(""),
    telemetry: new Telemetry("", localStorage, 0),
  });
  await app.start();
  return app;
}

function actions(): string[] {
  return logged.map((event) => String(event.action));
}

beforeEach(() => {
  logged = [];
  localStorage.clear();
  root = document.createElement("div");
  document.body.appendChild(root);
});

afterEach(() => {
  app?.stop();
  app = null;
  root.remove();
  vi.unstubAllGlobals();
  history.replaceState(null, "", "/");
});

describe("search flow", () => {
  it("shows tab badges equal to the API category totals", async () => {
    stubApi();
    await startApp("?q=attitudes");
    const counts: Record<string, string> = {};
    for (const tab of root.querySelectorAll<HTMLElement>(".tab")) {
      counts[tab.dataset.tab!] = tab.querySelector(".count")!.textContent!;
    }
    expect(counts).toEqual({
      all: "6",
      research_data: "2",
      publication: "4",
      question_variable: "0",
      instrument_tool: "0",
      web_page: "0",
      library_record: "0",
    });
  });

  it("logs a search event when a query URL is opened", async () => {
    stubApi();
    await startApp("?q=attitudes&type=publication");
    expect(logged).toHaveLength(1);
    expect(logged[0]).toMatchObject({
      action: "search",
      query: "attitudes",
      category: "publication",
    });
  });

  it("logs and re-queries when the form is submitted", async () => {
    stubApi();
    await startApp("");
    expect(actions()).toEqual([]); // landing page without a query logs nothing

    const input = root.querySelector<HTMLInputElement>(".search-form input")!;
    input.value = "migration";
    root.querySelector("form")!.dispatchEvent(new Event("submit", { cancelable: true }));

    await vi.waitFor(() => expect(actions()).toEqual(["search"]));
    expect(location.search).toBe("?q=migration");
    expect(logged[0]).toMatchObject({ query: "migration", category: "all" });
  });

  it("logs a category change and updates the URL", async () => {
    stubApi();
    await startApp("?q=attitudes");
    root.querySelector<HTMLElement>('[data-tab="research_data"]')!.click();
    await vi.waitFor(() =>
      expect(actions()).toEqual(["search", "change_category"]),
    );
    expect(logged[1]).toMatchObject({ category: "research_data" });
    expect(location.search).toBe("?q=attitudes&type=research_data");
  });

  it("shows the empty state on a zero-hit query", async () => {
    stubApi({ "/api/search": emptyResponse() });
    await startApp("?q=zebra");
    expect(root.querySelector(".empty-state")).not.toBeNull();
    for (const tab of root.querySelectorAll<HTMLElement>(".tab .count")) {
      expect(tab.textContent).toBe("0");
    }
  });

  it("keeps the form and shows a banner when the API fails", async () => {
    stubApi({ "/api/search": new Response("oops", { status: 503 }) });
    await startApp("?q=attitudes&type=publication");
    expect(root.querySelector(".error-banner")).not.toBeNull();
    expect(root.querySelector<HTMLInputElement>(".search-form input")!.value).toBe(
      "attitudes",
    );
    // the URL, and with it the view state, is untouched
    expect(location.search).toBe("?q=attitudes&type=publication");
  });
});

describe("detail flow", () => {
  it("logs view_record with has_links when a detail URL is opened", async () => {
    stubApi();
    await startApp("?record=rec-1");
    expect(logged).toHaveLength(1);
    expect(logged[0]).toMatchObject({
      action: "view_record",
      record_id: "rec-1",
      category: "publication",
      has_links: true,
    });
  });

  it("logs view_record_links when a link box starts unfolded", async () => {
    stubApi();
    await startApp("?record=rec-1&open=research_data");
    expect(actions()).toEqual(["view_record_links"]);
    expect(root.querySelector(".linkbox.open")).not.toBeNull();
  });

  it("emits open_linked_resources_section when a box is unfolded", async () => {
    stubApi();
    await startApp("?record=rec-1");
    expect(root.querySelector(".link-entries")).toBeNull();

    root.querySelector<HTMLElement>(".linkbox-header")!.click();
    await vi.waitFor(() =>
      expect(actions()).toEqual(["view_record", "open_linked_resources_section"]),
    );
    expect(logged[1]).toMatchObject({ category: "publication", record_id: "rec-1" });
    expect(location.search).toBe("?record=rec-1&open=research_data");
    await vi.waitFor(() => expect(root.querySelector(".link-entries")).not.toBeNull());

    // folding it back logs nothing new
    root.querySelector<HTMLElement>(".linkbox-header")!.click();
    await vi.waitFor(() => expect(location.search).toBe("?record=rec-1"));
    expect(actions()).toEqual(["view_record", "open_linked_resources_section"]);
  });

  it("logs the link direction when a linked record is followed", async () => {
    stubApi({
      "/api/record/ds-2": {
        ...recordDetail(),
        record: {
          id: "ds-2",
          category: "research_data",
          title: "Panel pilot study",
          source: "alpha",
        },
        link_counts: {},
        has_links: false,
      },
      "/api/record/ds-2/links": { record_id: "ds-2", type: null, links: [] },
    });
    await startApp("?record=rec-1&open=research_data");

    const titles = root.querySelectorAll<HTMLElement>(".entry-title");
    titles[1].click();
    await vi.waitFor(() =>
      expect(actions()).toEqual(["view_record_links", "click_on_linked_resource"]),
    );
    expect(logged[1]).toMatchObject({
      category: "publication",
      target_category: "research_data",
      record_id: "rec-1",
    });
    await vi.waitFor(() => expect(location.search).toBe("?record=ds-2"));
    await vi.waitFor(() =>
      expect(root.querySelector("h2")!.textContent).toBe("Panel pilot study"),
    );
  });

  it("restores the previous view on back navigation without logging", async () => {
    stubApi();
    const app = await startApp("?q=attitudes");
    expect(actions()).toEqual(["search"]);

    await app.goto(
      { ...app.state, record: "rec-1", open: [] },
      true,
    );
    await vi.waitFor(() => expect(actions()).toEqual(["search", "view_record"]));

    // simulate the browser back button
    history.replaceState(null, "", "?q=attitudes");
    window.dispatchEvent(new PopStateEvent("popstate"));
    await vi.waitFor(() => expect(root.querySelector(".hit")).not.toBeNull());
    expect(root.querySelector<HTMLInputElement>(".search-form input")!.value).toBe(
      "attitudes",
    );
    expect(actions()).toEqual(["search", "view_record"]); // no new events
  });
});

describe("log wire format", () => {
  it("stamps every event with the persisted client id and a timestamp", async () => {
    stubApi();
    await startApp("?q=attitudes");
    const clientId = localStorage.getItem("datanexus.client_id");
    expect(clientId).toBeTruthy();
    for (const event of logged) {
      expect(event.client_id).toBe(clientId);
      expect(typeof event.timestamp).toBe("string");
      expect(Number.isNaN(Date.parse(String(event.timestamp)))).toBe(false);
    }
  });
});
