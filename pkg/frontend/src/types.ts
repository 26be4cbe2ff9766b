/** Response shapes of the HTTP API, one interface per endpoint body. */

export const CATEGORIES = [
  "research_data",
  "publication",
  "question_variable",
  "instrument_tool",
  "web_page",
  "library_record",
] as const;

export type Category = (typeof CATEGORIES)[number];

/** Category tabs include the cross-category view. */
export type Tab = Category | "all";

export function isCategory(value: string): value is Category {
  return (CATEGORIES as readonly string[]).includes(value);
}

export interface Material {
  kind: string;
  url: string;
}

export interface RecordDoc {
  id: string;
  category: Category;
  title: string;
  source: string;
  description?: string;
  creators?: string[];
  year?: number | null;
  language?: string | null;
  rights?: string[];
  external_ids?: Record<string, string>;
  materials?: Material[];
  type_specific?: Record<string, string>;
  full_text?: string | null;
}

export interface SearchHit {
  id: string;
  category: Category;
  title: string;
  source: string;
  creators: string[];
  year: number | null;
  language: string | null;
  score: number;
  /** Query matches are wrapped in {{...}} markers. */
  snippet: string;
  link_counts: Record<string, number>;
}

export interface SearchResponse {
  total_by_category: Record<string, number>;
  total: number;
  hits: SearchHit[];
  facets: Record<string, Record<string, number>>;
}

export interface RecordDetail {
  record: RecordDoc;
  link_counts: Record<string, number>;
  label_counts: Record<string, number>;
  has_links: boolean;
  citation_formats: string[];
}

export type LinkLabel = "used" | "mentioned";

export interface LinkEntry {
  record_id: string;
  title: string;
  category: Category;
  label: LinkLabel;
  confidence: number;
  origins: string[];
  passage?: string;
}

export interface LinksResponse {
  record_id: string;
  type: string | null;
  links: LinkEntry[];
}
