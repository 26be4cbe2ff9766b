/** The whole view lives in the URL query string, so every state is a
 * bookmarkable address and browser back restores the previous one.
 */

import { CATEGORIES, isCategory, type Category, type Tab } from "./types.js";

export const FACET_FIELDS = ["year", "source", "language"] as const;

export type FacetField = (typeof FACET_FIELDS)[number];

export const PAGE_SIZE = 10;

export interface ViewState {
  query: string;
  tab: Tab;
  /** Selected facet values per field; sorted and deduplicated. */
  facets: Record<FacetField, string[]>;
  /** 1-based result page. */
  page: number;
  /** Record id of the open detail view, or null for the result list. */
  record: string | null;
  /** Unfolded link-box categories in the detail view. */
  open: Category[];
}

export function emptyState(): ViewState {
  return {
    query: "",
    tab: "all",
    facets: { year: [], source: [], language: [] },
    page: 1,
    record: null,
    open: [],
  };
}

function uniqueSorted(values: string[]): string[] {
  return [...new Set(values)].sort();
}

export function parseState(search: string): ViewState {
  const params = new URLSearchParams(search);
  const state = emptyState();
  state.query = params.get("q") ?? "";
  const tab = params.get("type");
  if (tab && (tab === "all" || isCategory(tab))) {
    state.tab = tab as Tab;
  }
  for (const field of FACET_FIELDS) {
    state.facets[field] = uniqueSorted(params.getAll(field).filter(Boolean));
  }
  const page = Number(params.get("page"));
  if (Number.isInteger(page) && page > 1) {
    state.page = page;
  }
  state.record = params.get("record") || null;
  state.open = uniqueSorted(params.getAll("open").filter(isCategory)) as Category[];
  return state;
}

export function serializeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.tab !== "all") params.set("type", state.tab);
  for (const field of FACET_FIELDS) {
    for (const value of uniqueSorted(state.facets[field])) {
      params.append(field, value);
    }
  }
  if (state.page > 1) params.set("page", String(state.page));
  if (state.record) params.set("record", state.record);
  for (const category of uniqueSorted(state.open)) {
    params.append("open", category);
  }
  return params.toString();
}

/** Offset passed to the search endpoint for the current page. */
export function pageOffset(state: ViewState): number {
  return (state.page - 1) * PAGE_SIZE;
}

export function pageCount(total: number): number {
  return Math.max(1, Math.ceil(total / PAGE_SIZE));
}

/** Add or remove one facet value; any change restarts paging. */
export function toggleFacet(state: ViewState, field: FacetField, value: string): ViewState {
  const selected = new Set(state.facets[field]);
  if (selected.has(value)) {
    selected.delete(value);
  } else {
    selected.add(value);
  }
  return {
    ...state,
    facets: { ...state.facets, [field]: [...selected].sort() },
    page: 1,
  };
}

/** Switch the category tab, keeping query and facets. */
export function withTab(state: ViewState, tab: Tab): ViewState {
  return { ...state, tab, page: 1 };
}

/** Start a fresh query on the current tab. */
export function withQuery(state: ViewState, query: string): ViewState {
  return { ...emptyState(), tab: state.tab, query };
}

/** Open a record's detail view, optionally with link boxes unfolded. */
export function withRecord(state: ViewState, recordId: string, open: Category[] = []): ViewState {
  return { ...state, record: recordId, open: (uniqueSorted(open) as Category[]) };
}

/** Back to the result list, dropping detail-only state. */
export function withoutRecord(state: ViewState): ViewState {
  return { ...state, record: null, open: [] };
}

export function toggleBox(state: ViewState, category: Category): ViewState {
  const open = new Set(state.open);
  if (open.has(category)) {
    open.delete(category);
  } else {
    open.add(category);
  }
  return { ...state, open: (uniqueSorted([...open]) as Category[]) };
}

export const ALL_TABS: readonly Tab[] = ["all", ...CATEGORIES];
