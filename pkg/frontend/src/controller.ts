import { ApiClient, ApiError, LatestRequest } from "./api.js";
import type { EventContext } from "./telemetry.js";
import type { UiAction } from "./actions.js";
import { exportAction, materialAction } from "./actions.js";
import {
  parseState,
  serializeState,
  toggleBox,
  toggleFacet,
  withQuery,
  withRecord,
  withTab,
  withoutRecord,
  type ViewState,
} from "./state.js";
import {
  renderDetailView,
  renderErrorBanner,
  renderLoading,
  renderSearchForm,
  renderSearchView,
  type DetailHandlers,
  type SearchHandlers,
} from "./render.js";
import type { Category, LinkEntry, RecordDetail } from "./types.js";

export interface TelemetryLike {
  emit(action: UiAction, context?: EventContext): unknown;
}

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  telemetry: TelemetryLike;
  win?: Window;
}

interface DetailData {
  detail: RecordDetail;
  entries: Map<Category, LinkEntry[]>;
}

/** Wires URL state, API calls, rendering, and event logging together.
 *
 * Navigation always goes state-first: handlers compute the next
 * ViewState, push it to the history, then render from it. The popstate
 * listener renders the restored state without logging anything, so
 * going back never double-counts an interaction.
 */
export class App {
  state: ViewState;

  private readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly telemetry: TelemetryLike;
  private readonly win: Window;
  private readonly latest = new LatestRequest();
  private detailCache: { id: string; data: DetailData } | null = null;
  private readonly onPopState = () => {
    this.state = parseState(this.win.location.search);
    void this.render(false);
  };

  constructor(options: AppOptions) {
    this.root = options.root;
    this.api = options.api;
    this.telemetry = options.telemetry;
    this.win = options.win ?? window;
    this.state = parseState(this.win.location.search);
  }

  async start(): Promise<void> {
    this.win.addEventListener("popstate", this.onPopState);
    await this.render(true);
  }

  stop(): void {
    this.win.removeEventListener("popstate", this.onPopState);
  }

  /** Push the next state and render it; `entryEvent` only when the
   * navigation itself should be logged as entering a record view.
   */
  goto(next: ViewState, entryEvent = false): Promise<void> {
    const query = serializeState(next);
    this.win.history.pushState(null, "", query ? `?${query}` : this.win.location.pathname);
    this.state = next;
    return this.render(entryEvent);
  }

  private render(entryEvent: boolean): Promise<void> {
    if (this.state.record) {
      return this.renderDetail(this.state.record, entryEvent);
    }
    if (entryEvent && this.state.query) {
      this.telemetry.emit("search", { query: this.state.query, category: this.state.tab });
    }
    return this.renderSearch();
  }

  private show(...nodes: HTMLElement[]): void {
    this.root.replaceChildren(...nodes);
  }

  private searchHandlers(): SearchHandlers {
    return {
      onQuery: (query) => {
        if (query) this.telemetry.emit("search", { query, category: this.state.tab });
        void this.goto(withQuery(this.state, query));
      },
      onTab: (tab) => {
        this.telemetry.emit("change_category", { category: tab });
        void this.goto(withTab(this.state, tab));
      },
      onFacet: (field, value) => {
        void this.goto(toggleFacet(this.state, field, value));
      },
      onPage: (page) => {
        this.telemetry.emit("page", { category: this.state.tab, query: this.state.query });
        void this.goto({ ...this.state, page });
      },
      onOpenRecord: (hit) => {
        void this.goto(withRecord(this.state, hit.id), true);
      },
      onOpenRecordLinks: (hit, category) => {
        void this.goto(withRecord(this.state, hit.id, [category]), true);
      },
    };
  }

  private async renderSearch(): Promise<void> {
    const state = this.state;
    const handlers = this.searchHandlers();
    this.show(renderSearchForm(state, handlers), renderLoading());
    try {
      const response = await this.latest.run((signal) => this.api.search(state, signal));
      if (response === null || this.state !== state) return; // superseded
      this.show(renderSearchView(state, response, handlers));
    } catch (error) {
      this.show(
        renderSearchForm(state, handlers),
        renderErrorBanner(describe(error)),
      );
    }
  }

  private detailHandlers(data: DetailData): DetailHandlers {
    const record = data.detail.record;
    const context = { category: record.category, record_id: record.id };
    return {
      onBack: () => {
        void this.goto(withoutRecord(this.state));
      },
      onToggleBox: (category, willOpen) => {
        if (willOpen) {
          this.telemetry.emit("open_linked_resources_section", context);
        }
        void this.goto(toggleBox(this.state, category));
      },
      onFollowLink: (entry) => {
        this.telemetry.emit("click_on_linked_resource", {
          ...context,
          target_category: entry.category,
        });
        void this.goto(withRecord(withoutRecord(this.state), entry.record_id));
      },
      onExportOpen: () => {
        this.telemetry.emit("export_popup", context);
      },
      onExport: (format) => {
        this.telemetry.emit(exportAction(format), context);
      },
      onMaterial: (kind) => {
        this.telemetry.emit(materialAction(kind), context);
      },
      onFulltext: () => {
        this.telemetry.emit("goto_fulltext", context);
      },
    };
  }

  private async loadDetail(recordId: string): Promise<DetailData> {
    if (this.detailCache?.id === recordId) {
      return this.detailCache.data;
    }
    const [detail, links] = await Promise.all([
      this.api.record(recordId),
      this.api.links(recordId),
    ]);
    const entries = new Map<Category, LinkEntry[]>();
    for (const entry of links.links) {
      const bucket = entries.get(entry.category);
      if (bucket) {
        bucket.push(entry);
      } else {
        entries.set(entry.category, [entry]);
      }
    }
    const data = { detail, entries };
    this.detailCache = { id: recordId, data };
    return data;
  }

  private async renderDetail(recordId: string, entryEvent: boolean): Promise<void> {
    this.show(renderLoading());
    let data: DetailData;
    try {
      data = await this.loadDetail(recordId);
    } catch (error) {
      this.show(renderErrorBanner(describe(error)));
      return;
    }
    if (this.state.record !== recordId) return; // superseded
    if (entryEvent) {
      const record = data.detail.record;
      this.telemetry.emit(this.state.open.length ? "view_record_links" : "view_record", {
        category: record.category,
        record_id: record.id,
        has_links: data.detail.has_links,
      });
    }
    this.show(renderDetailView(
      data.detail,
      data.entries,
      this.state,
      this.detailHandlers(data),
      (format) => this.api.citationUrl(recordId, format),
    ));
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `The service answered with an error: ${error.message}`;
  }
  return "The service is not reachable right now. Your view is unchanged; retry in a moment.";
}
