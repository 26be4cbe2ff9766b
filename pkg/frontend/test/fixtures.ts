import type {
  LinkEntry,
  LinksResponse,
  RecordDetail,
  SearchHit,
  SearchResponse,
} from "../src/types.js";

export function zeroTotals(): Record<string, number> {
  return {
    research_data: 0,
    publication: 0,
    question_variable: 0,
    instrument_tool: 0,
    web_page: 0,
    library_record: 0,
  };
}

export function hit(overrides: Partial<SearchHit> = {}): SearchHit {
  return {
    id: "rec-1",
    category: "publication",
    title: "Attitudes and social inequality",
    source: "alpha",
    creators: ["Novak, B."],
    year: 2012,
    language: "en",
    score: 3.25,
    snippet: "survey of {{migration}} attitudes across {{migration}} regimes",
    link_counts: { ...zeroTotals(), research_data: 2 },
    ...overrides,
  };
}

export function searchResponse(): SearchResponse {
  return {
    total_by_category: { ...zeroTotals(), publication: 4, research_data: 2 },
    total: 6,
    hits: [
      hit(),
      hit({
        id: "rec-2",
        title: "Trust in institutions",
        snippet: "a study without query matches",
        link_counts: zeroTotals(),
      }),
    ],
    facets: {
      year: { "2011": 2, "2012": 4 },
      source: { alpha: 5, beta: 1 },
      language: { en: 4, de: 2 },
    },
  };
}

export function emptyResponse(): SearchResponse {
  return {
    total_by_category: zeroTotals(),
    total: 0,
    hits: [],
    facets: { year: {}, source: {}, language: {} },
  };
}

export function linkEntries(): LinkEntry[] {
  return [
    {
      record_id: "ds-1",
      title: "Family survey 2012",
      category: "research_data",
      label: "used",
      confidence: 1.0,
      origins: ["bibliography"],
    },
    {
      record_id: "ds-2",
      title: "Panel pilot study",
      category: "research_data",
      label: "mentioned",
      confidence: 0.5,
      origins: ["mention-extractor"],
      passage: "we used the panel 2012 wave for robustness checks",
    },
  ];
}

export function recordDetail(): RecordDetail {
  return {
    record: {
      id: "rec-1",
      category: "publication",
      title: "Attitudes and social inequality",
      source: "alpha",
      description: "A comparative study of attitudes.",
      creators: ["Novak, B."],
      year: 2012,
      language: "en",
      external_ids: { doi: "10.1000/rec-1" },
      materials: [{ kind: "questionnaire", url: "https://example.org/q.pdf" }],
    },
    link_counts: { ...zeroTotals(), research_data: 2 },
    label_counts: { used: 1, mentioned: 1 },
    has_links: true,
    citation_formats: ["bibtex", "ris", "endnote", "apa_text"],
  };
}

export function linksResponse(): LinksResponse {
  return { record_id: "rec-1", type: null, links: linkEntries() };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
