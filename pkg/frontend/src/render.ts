/** DOM builders for the two views. All functions are pure: data and
 * callbacks in, detached elements out. The controller owns fetching,
 * telemetry, and history.
 */

import {
  CATEGORIES,
  type Category,
  type LinkEntry,
  type RecordDetail,
  type SearchHit,
  type SearchResponse,
  type Tab,
} from "./types.js";
import { ALL_TABS, FACET_FIELDS, PAGE_SIZE, pageCount, type FacetField, type ViewState } from "./state.js";

export const TAB_LABELS: Record<Tab, string> = {
  all: "All",
  research_data: "Research data",
  publication: "Publications",
  question_variable: "Questions & variables",
  instrument_tool: "Instruments & tools",
  web_page: "Web pages",
  library_record: "Library records",
};

const FACET_LABELS: Record<FacetField, string> = {
  year: "Year",
  source: "Source",
  language: "Language",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Turn a snippet with {{...}} match markers into text with <mark> runs. */
export function renderSnippet(snippet: string): HTMLElement {
  const host = el("p", "snippet");
  const parts = snippet.split(/\{\{(.+?)\}\}/g);
  parts.forEach((part, i) => {
    if (!part) return;
    if (i % 2 === 1) {
      host.appendChild(el("mark", undefined, part));
    } else {
      host.appendChild(document.createTextNode(part));
    }
  });
  return host;
}

export interface SearchHandlers {
  onQuery(query: string): void;
  onTab(tab: Tab): void;
  onFacet(field: FacetField, value: string): void;
  onPage(page: number): void;
  onOpenRecord(hit: SearchHit): void;
  onOpenRecordLinks(hit: SearchHit, category: Category): void;
}

export function renderSearchForm(state: ViewState, handlers: SearchHandlers): HTMLElement {
  const form = el("form", "search-form");
  const input = el("input");
  input.type = "search";
  input.name = "q";
  input.value = state.query;
  input.placeholder = "Search datasets, publications, variables…";
  input.setAttribute("aria-label", "Search query");
  const button = el("button", "primary", "Search");
  button.type = "submit";
  form.append(input, button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onQuery(input.value.trim());
  });
  return form;
}

export function renderTabs(
  totals: Record<string, number>,
  active: Tab,
  onTab: (tab: Tab) => void,
): HTMLElement {
  const nav = el("nav", "tabs");
  const allCount = CATEGORIES.reduce((sum, c) => sum + (totals[c] ?? 0), 0);
  for (const tab of ALL_TABS) {
    const button = el("button", tab === active ? "tab active" : "tab");
    button.type = "button";
    button.dataset.tab = tab;
    button.append(
      el("span", "label", TAB_LABELS[tab]),
      el("span", "count", String(tab === "all" ? allCount : totals[tab] ?? 0)),
    );
    if (tab !== active) {
      button.addEventListener("click", () => onTab(tab));
    }
    nav.appendChild(button);
  }
  return nav;
}

export function renderFacetSidebar(
  facets: Record<string, Record<string, number>>,
  state: ViewState,
  onFacet: (field: FacetField, value: string) => void,
): HTMLElement {
  const aside = el("aside", "facets");
  for (const field of FACET_FIELDS) {
    const counts = facets[field] ?? {};
    const selected = new Set(state.facets[field]);
    const values = Object.keys(counts).sort((a, b) =>
      field === "year" ? b.localeCompare(a) : a.localeCompare(b),
    );
    if (values.length === 0 && selected.size === 0) continue;
    const group = el("section", "facet-group");
    group.appendChild(el("h3", undefined, FACET_LABELS[field]));
    const list = el("ul");
    // a selected value stays visible even when filtering pushed its count to 0
    for (const value of new Set([...values, ...selected])) {
      const item = el("li");
      const label = el("label");
      const box = el("input");
      box.type = "checkbox";
      box.checked = selected.has(value);
      box.addEventListener("change", () => onFacet(field, value));
      label.append(box, el("span", "value", value),
        el("span", "count", String(counts[value] ?? 0)));
      item.appendChild(label);
      list.appendChild(item);
    }
    group.appendChild(list);
    aside.appendChild(group);
  }
  return aside;
}

function hitMetaLine(hit: SearchHit): string {
  const parts: string[] = [TAB_LABELS[hit.category]];
  if (hit.creators.length) parts.push(hit.creators.join("; "));
  if (hit.year !== null) parts.push(String(hit.year));
  parts.push(hit.source);
  return parts.join(" · ");
}

export function renderHitCard(hit: SearchHit, handlers: SearchHandlers): HTMLElement {
  const card = el("article", "hit");
  const title = el("button", "hit-title");
  title.type = "button";
  title.textContent = hit.title;
  title.addEventListener("click", () => handlers.onOpenRecord(hit));
  card.append(title, el("p", "meta", hitMetaLine(hit)));
  if (hit.snippet) card.appendChild(renderSnippet(hit.snippet));

  const badges = el("div", "link-badges");
  for (const category of CATEGORIES) {
    const count = hit.link_counts[category] ?? 0;
    if (count === 0) continue;
    const badge = el("button", "link-badge");
    badge.type = "button";
    badge.dataset.category = category;
    badge.textContent = `${TAB_LABELS[category]}: ${count}`;
    badge.title = `Open linked ${TAB_LABELS[category].toLowerCase()}`;
    badge.addEventListener("click", () => handlers.onOpenRecordLinks(hit, category));
    badges.appendChild(badge);
  }
  if (badges.childElementCount) card.appendChild(badges);
  return card;
}

function renderPager(state: ViewState, total: number, onPage: (page: number) => void): HTMLElement {
  const pages = pageCount(total);
  const nav = el("nav", "pager");
  const prev = el("button", "pager-prev", "‹ previous");
  prev.type = "button";
  prev.disabled = state.page <= 1;
  prev.addEventListener("click", () => onPage(state.page - 1));
  const next = el("button", "pager-next", "next ›");
  next.type = "button";
  next.disabled = state.page >= pages;
  next.addEventListener("click", () => onPage(state.page + 1));
  nav.append(prev, el("span", "pager-status", `page ${state.page} of ${pages}`), next);
  return nav;
}

export function renderSearchView(
  state: ViewState,
  response: SearchResponse,
  handlers: SearchHandlers,
): HTMLElement {
  const view = el("div", "search-view");
  view.appendChild(renderSearchForm(state, handlers));
  view.appendChild(renderTabs(response.total_by_category, state.tab, handlers.onTab));

  const body = el("div", "search-body");
  body.appendChild(renderFacetSidebar(response.facets, state, handlers.onFacet));

  const results = el("main", "results");
  if (response.total === 0) {
    results.appendChild(el("p", "empty-state", "Nothing matched this search."));
  } else {
    results.appendChild(
      el("p", "result-count", `${response.total} result${response.total === 1 ? "" : "s"}`),
    );
    for (const hit of response.hits) {
      results.appendChild(renderHitCard(hit, handlers));
    }
    if (response.total > PAGE_SIZE) {
      results.appendChild(renderPager(state, response.total, handlers.onPage));
    }
  }
  body.appendChild(results);
  view.appendChild(body);
  return view;
}

export interface DetailHandlers {
  onBack(): void;
  onToggleBox(category: Category, willOpen: boolean): void;
  onFollowLink(entry: LinkEntry): void;
  onExportOpen(): void;
  onExport(format: string): void;
  onMaterial(kind: string): void;
  onFulltext(url: string): void;
}

function detailRow(table: HTMLElement, name: string, value: string): void {
  const row = el("div", "field");
  row.append(el("dt", undefined, name), el("dd", undefined, value));
  table.appendChild(row);
}

function renderLinkEntry(entry: LinkEntry, handlers: DetailHandlers): HTMLElement {
  const item = el("li", "link-entry");
  const head = el("div", "entry-head");
  head.appendChild(el("span", `link-label ${entry.label}`, entry.label));
  const title = el("button", "entry-title");
  title.type = "button";
  title.textContent = entry.title;
  title.addEventListener("click", () => handlers.onFollowLink(entry));
  head.append(title, el("span", "confidence", `${Math.round(entry.confidence * 100)}%`));
  item.appendChild(head);
  if (entry.passage) {
    item.appendChild(el("blockquote", "passage", entry.passage));
  }
  return item;
}

function renderLinkBox(
  category: Category,
  count: number,
  entries: LinkEntry[],
  unfolded: boolean,
  handlers: DetailHandlers,
): HTMLElement {
  const box = el("section", unfolded ? "linkbox open" : "linkbox");
  box.dataset.category = category;
  const header = el("button", "linkbox-header");
  header.type = "button";
  header.setAttribute("aria-expanded", String(unfolded));
  header.append(
    el("span", "label", TAB_LABELS[category]),
    el("span", "count", String(count)),
  );
  header.addEventListener("click", () => handlers.onToggleBox(category, !unfolded));
  box.appendChild(header);
  if (unfolded) {
    const list = el("ul", "link-entries");
    for (const entry of entries) list.appendChild(renderLinkEntry(entry, handlers));
    box.appendChild(list);
  }
  return box;
}

export function renderDetailView(
  detail: RecordDetail,
  entriesByCategory: Map<Category, LinkEntry[]>,
  state: ViewState,
  handlers: DetailHandlers,
  citationUrl: (format: string) => string,
): HTMLElement {
  const record = detail.record;
  const view = el("div", "detail-view");
  const back = el("button", "back", "‹ back to results");
  back.type = "button";
  back.addEventListener("click", () => handlers.onBack());
  view.appendChild(back);

  const head = el("header", "detail-head");
  head.appendChild(el("span", "category-chip", TAB_LABELS[record.category]));
  head.appendChild(el("h2", undefined, record.title));
  view.appendChild(head);

  const table = el("dl", "detail-fields");
  if (record.creators?.length) detailRow(table, "Creators", record.creators.join("; "));
  if (record.year != null) detailRow(table, "Year", String(record.year));
  if (record.language) detailRow(table, "Language", record.language);
  detailRow(table, "Source", record.source);
  if (record.rights?.length) detailRow(table, "Rights", record.rights.join("; "));
  for (const [scheme, value] of Object.entries(record.external_ids ?? {})) {
    detailRow(table, scheme.toUpperCase(), value);
  }
  for (const [name, value] of Object.entries(record.type_specific ?? {})) {
    detailRow(table, name, value);
  }
  view.appendChild(table);

  if (record.description) {
    view.appendChild(el("p", "description", record.description));
  }

  const doi = record.external_ids?.doi;
  if (doi) {
    const link = el("a", "fulltext");
    link.href = `https://doi.org/${doi}`;
    link.target = "_blank";
    link.rel = "noopener";
    link.textContent = "Full text via DOI";
    link.addEventListener("click", () => handlers.onFulltext(link.href));
    view.appendChild(link);
  }

  if (record.materials?.length) {
    const list = el("ul", "materials");
    for (const material of record.materials) {
      const item = el("li");
      const link = el("a");
      link.href = material.url;
      link.target = "_blank";
      link.rel = "noopener";
      link.textContent = material.kind;
      link.addEventListener("click", () => handlers.onMaterial(material.kind));
      item.appendChild(link);
      list.appendChild(item);
    }
    view.appendChild(list);
  }

  const exporter = el("details", "export");
  const summary = el("summary", undefined, "Export citation");
  exporter.appendChild(summary);
  exporter.addEventListener("toggle", () => {
    if (exporter.open) handlers.onExportOpen();
  });
  const formats = el("ul", "export-formats");
  for (const format of detail.citation_formats) {
    const item = el("li");
    const link = el("a");
    link.href = citationUrl(format);
    link.setAttribute("download", `${record.id}.${format}`);
    link.textContent = format;
    link.addEventListener("click", () => handlers.onExport(format));
    item.appendChild(link);
    formats.appendChild(item);
  }
  exporter.appendChild(formats);
  view.appendChild(exporter);

  const boxes = el("div", "linkboxes");
  const openSet = new Set(state.open);
  for (const category of CATEGORIES) {
    const count = detail.link_counts[category] ?? 0;
    if (count === 0) continue;  // boxes exist only for categories with links
    boxes.appendChild(renderLinkBox(
      category,
      count,
      entriesByCategory.get(category) ?? [],
      openSet.has(category),
      handlers,
    ));
  }
  if (boxes.childElementCount) {
    const heading = el("h3", "linked-heading", "Linked information");
    view.append(heading, boxes);
  }
  return view;
}

export function renderErrorBanner(message: string): HTMLElement {
  const banner = el("div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.textContent = message;
  return banner;
}

export function renderLoading(): HTMLElement {
  return el("p", "loading", "Loading…");
}
