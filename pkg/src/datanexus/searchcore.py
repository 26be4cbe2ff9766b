"""Inverted index with BM25 ranking, category totals, facets, and snippets.

The index is rebuilt from scratch on every pipeline run and is immutable
afterwards, so readers never need locks. Scoring is field-aware BM25 with
fixed constants and per-field boosts; matching is conjunctive, so adding
terms narrows the result set.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .ingest import CorpusSnapshot
from .jsonio import dump_json_gz, load_json_gz
from .linkstore import LinkSummary
from .model import ALL_CATEGORIES, CATEGORY_VALUES, Category, Record

K1 = 1.2
B = 0.75

FIELD_BOOSTS = {
    "title": 3.0,
    "creators": 2.0,
    "description": 1.5,
    "type_specific": 1.0,
    "full_text": 1.0,
}
INDEXED_FIELDS = tuple(FIELD_BOOSTS)

FACET_FIELDS = ("year", "source", "language")

SNIPPET_WINDOW = 200

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


class QueryError(ValueError):
    """Raised for structurally invalid queries (bad paging, unknown fields)."""


def tokenize(text: str) -> list[str]:
    """Case-folded unicode word tokens; digits kept, no stemming."""
    return [t.casefold() for t in _TOKEN.findall(text)]


def _field_text(record: Record, field_name: str) -> str:
    if field_name == "title":
        return record.title
    if field_name == "description":
        return record.description
    if field_name == "creators":
        return " ".join(record.creators)
    if field_name == "type_specific":
        return " ".join(str(record.type_specific[k]) for k in sorted(record.type_specific))
    if field_name == "full_text":
        return record.full_text or ""
    raise KeyError(field_name)


@dataclass
class FieldIndex:
    """Postings for one indexed field.

    ``doc_lengths`` is aligned to ordinals with 0 marking "field absent";
    such docs do not count toward the average length.
    """

    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    doc_lengths: list[int] = field(default_factory=list)
    avg_length: float = 0.0


@dataclass
class IndexSnapshot:
    ordinal_to_id: list[str]
    records: dict[str, Record]
    fields: dict[str, FieldIndex]
    categories: list[str]
    years: list[int | None]
    sources: list[str]
    languages: list[str | None]
    link_counts: list[dict[str, int]]
    built_at: str = ""

    def __post_init__(self):
        self.id_to_ordinal = {rid: i for i, rid in enumerate(self.ordinal_to_id)}

    @property
    def doc_count(self) -> int:
        return len(self.ordinal_to_id)

    def to_json(self) -> dict[str, Any]:
        return {
            "built_at": self.built_at,
            "ordinals": self.ordinal_to_id,
            "records": [self.records[rid].to_json() for rid in self.ordinal_to_id],
            "fields": {
                name: {
                    "avg_length": fi.avg_length,
                    "doc_lengths": fi.doc_lengths,
                    "postings": {t: [list(p) for p in plist] for t, plist in fi.postings.items()},
                }
                for name, fi in self.fields.items()
            },
            "categories": self.categories,
            "years": self.years,
            "sources": self.sources,
            "languages": self.languages,
            "link_counts": self.link_counts,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "IndexSnapshot":
        records = [Record.from_json(r) for r in doc["records"]]
        return cls(
            ordinal_to_id=list(doc["ordinals"]),
            records={r.id: r for r in records},
            fields={
                name: FieldIndex(
                    postings={t: [tuple(p) for p in plist] for t, plist in fi["postings"].items()},
                    doc_lengths=list(fi["doc_lengths"]),
                    avg_length=fi["avg_length"],
                )
                for name, fi in doc["fields"].items()
            },
            categories=list(doc["categories"]),
            years=list(doc["years"]),
            sources=list(doc["sources"]),
            languages=list(doc["languages"]),
            link_counts=[dict(c) for c in doc["link_counts"]],
            built_at=doc.get("built_at", ""),
        )


def build_index(
    snapshot: CorpusSnapshot,
    summaries: dict[str, LinkSummary] | None = None,
) -> IndexSnapshot:
    """Index title/description/creators/type-specific/full-text fields.

    Ordinals follow sorted record ids, so identical corpora produce
    identical indexes byte for byte.
    """
    ordinal_to_id = sorted(snapshot.records)
    n = len(ordinal_to_id)
    fields = {name: FieldIndex(doc_lengths=[0] * n) for name in INDEXED_FIELDS}

    for ordinal, rid in enumerate(ordinal_to_id):
        record = snapshot.records[rid]
        for name, fi in fields.items():
            tokens = tokenize(_field_text(record, name))
            if not tokens:
                continue
            fi.doc_lengths[ordinal] = len(tokens)
            for term, tf in sorted(Counter(tokens).items()):
                fi.postings.setdefault(term, []).append((ordinal, tf))

    for fi in fields.values():
        lengths = [l for l in fi.doc_lengths if l > 0]
        fi.avg_length = sum(lengths) / len(lengths) if lengths else 0.0

    return IndexSnapshot(
        ordinal_to_id=ordinal_to_id,
        records=dict(snapshot.records),
        fields=fields,
        categories=[snapshot.records[rid].category.value for rid in ordinal_to_id],
        years=[snapshot.records[rid].year for rid in ordinal_to_id],
        sources=[snapshot.records[rid].source for rid in ordinal_to_id],
        languages=[snapshot.records[rid].language for rid in ordinal_to_id],
        link_counts=[
            dict((summaries or {}).get(rid).category_counts)
            if summaries and rid in summaries
            else {c.value: 0 for c in Category}
            for rid in ordinal_to_id
        ],
        built_at=snapshot.built_at,
    )


def save_index(index: IndexSnapshot, path: Path | str) -> None:
    dump_json_gz(index.to_json(), path)


def load_index(path: Path | str) -> IndexSnapshot:
    return IndexSnapshot.from_json(load_json_gz(path))


@dataclass
class SearchQuery:
    terms: list[str] = field(default_factory=list)
    category: str = ALL_CATEGORIES
    facet_filters: dict[str, set[str]] = field(default_factory=dict)
    offset: int = 0
    limit: int = 20

    def validate(self) -> None:
        if self.offset < 0:
            raise QueryError("offset must be >= 0")
        if not 1 <= self.limit <= 100:
            raise QueryError("limit must be in [1, 100]")
        if self.category != ALL_CATEGORIES and self.category not in CATEGORY_VALUES:
            raise QueryError(f"unknown category: {self.category}")
        for facet in self.facet_filters:
            if facet not in FACET_FIELDS:
                raise QueryError(f"unknown facet field: {facet}")


@dataclass
class SearchHit:
    record: Record
    score: float
    snippet: str
    link_counts: dict[str, int]

    def to_json(self) -> dict[str, Any]:
        rec = self.record
        return {
            "id": rec.id,
            "category": rec.category.value,
            "title": rec.title,
            "source": rec.source,
            "creators": list(rec.creators),
            "year": rec.year,
            "language": rec.language,
            "score": self.score,
            "snippet": self.snippet,
            "link_counts": self.link_counts,
        }


@dataclass
class SearchResult:
    total_by_category: dict[str, int]
    total: int
    hits: list[SearchHit]
    facets: dict[str, dict[str, int]]

    def to_json(self) -> dict[str, Any]:
        return {
            "total_by_category": self.total_by_category,
            "total": self.total,
            "hits": [h.to_json() for h in self.hits],
            "facets": self.facets,
        }


def _idf(n_docs: int, df: int) -> float:
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def _term_match_set(index: IndexSnapshot, terms: list[str]) -> set[int]:
    """Docs containing every term in at least one indexed field each."""
    matched = set(range(index.doc_count))
    for term in terms:
        term_docs: set[int] = set()
        for fi in index.fields.values():
            term_docs.update(ordinal for ordinal, _ in fi.postings.get(term, ()))
        matched &= term_docs
        if not matched:
            break
    return matched


def _score_docs(index: IndexSnapshot, terms: list[str], docs: set[int]) -> dict[int, float]:
    scores = dict.fromkeys(docs, 0.0)
    if not terms or not docs:
        return scores
    n = index.doc_count
    for name, fi in index.fields.items():
        boost = FIELD_BOOSTS[name]
        # Sorted so float summation order is stable across processes.
        for term in sorted(set(terms)):
            plist = fi.postings.get(term)
            if not plist:
                continue
            idf = _idf(n, len(plist))
            for ordinal, tf in plist:
                if ordinal not in scores:
                    continue
                dl = fi.doc_lengths[ordinal]
                norm = tf * (K1 + 1) / (tf + K1 * (1 - B + B * dl / fi.avg_length))
                scores[ordinal] += boost * idf * norm
    return scores


def _facet_value(index: IndexSnapshot, facet: str, ordinal: int) -> str | None:
    if facet == "year":
        year = index.years[ordinal]
        return str(year) if year is not None else None
    if facet == "source":
        return index.sources[ordinal]
    if facet == "language":
        return index.languages[ordinal]
    raise KeyError(facet)


def _passes_facets(
    index: IndexSnapshot, ordinal: int, filters: dict[str, set[str]], skip: str | None = None
) -> bool:
    for facet, wanted in filters.items():
        if facet == skip or not wanted:
            continue
        if _facet_value(index, facet, ordinal) not in wanted:
            return False
    return True


def execute_query(index: IndexSnapshot, query: SearchQuery) -> SearchResult:
    """Conjunctive match, BM25 ranking, multi-select facet counting.

    Category totals are computed with every filter except the category
    itself, so the tab counts stay visible while one tab is active. Each
    facet's counts likewise ignore that facet's own filter.
    """
    query.validate()
    term_docs = _term_match_set(index, query.terms)

    total_by_category = {c: 0 for c in CATEGORY_VALUES}
    for ordinal in term_docs:
        if _passes_facets(index, ordinal, query.facet_filters):
            total_by_category[index.categories[ordinal]] += 1

    def in_category(ordinal: int) -> bool:
        return query.category == ALL_CATEGORIES or index.categories[ordinal] == query.category

    facets: dict[str, dict[str, int]] = {}
    for facet in FACET_FIELDS:
        counts: Counter[str] = Counter()
        for ordinal in term_docs:
            if not in_category(ordinal):
                continue
            if not _passes_facets(index, ordinal, query.facet_filters, skip=facet):
                continue
            value = _facet_value(index, facet, ordinal)
            if value is not None:
                counts[value] += 1
        facets[facet] = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))

    active = [
        ordinal
        for ordinal in term_docs
        if in_category(ordinal) and _passes_facets(index, ordinal, query.facet_filters)
    ]
    scores = _score_docs(index, query.terms, set(active))

    def sort_key(ordinal: int):
        year = index.years[ordinal]
        return (-scores[ordinal], year is None, -(year or 0), index.ordinal_to_id[ordinal])

    active.sort(key=sort_key)
    page = active[query.offset : query.offset + query.limit]

    hits = []
    for ordinal in page:
        record = index.records[index.ordinal_to_id[ordinal]]
        hits.append(
            SearchHit(
                record=record,
                score=scores[ordinal],
                snippet=make_snippet(record, query.terms),
                link_counts=index.link_counts[ordinal],
            )
        )
    return SearchResult(
        total_by_category=total_by_category,
        total=len(active),
        hits=hits,
        facets=facets,
    )


def _occurrences(text: str, terms: set[str]) -> list[tuple[int, int]]:
    return [
        (m.start(), m.end()) for m in _TOKEN.finditer(text) if m.group().casefold() in terms
    ]


def _render_window(text: str, start: int, end: int, occs: list[tuple[int, int]]) -> str:
    parts = []
    if start > 0:
        parts.append("…")
    cursor = start
    for o_start, o_end in occs:
        if o_start < start or o_end > end:
            continue
        parts.append(text[cursor:o_start])
        parts.append("{{" + text[o_start:o_end] + "}}")
        cursor = o_end
    parts.append(text[cursor:end])
    if end < len(text):
        parts.append("…")
    return "".join(parts)


def make_snippet(record: Record, terms: list[str]) -> str:
    """Earliest ≤200-char window with the most distinct query terms.

    The window is taken from the description, then the full text; the
    title is only used when both are empty. When no term occurs in the
    searched text, the head of the description is shown unhighlighted.
    """
    term_set = {t.casefold() for t in terms if t}
    sources = [record.description, record.full_text or ""]
    if not any(sources):
        sources = [record.title]

    for text in sources:
        if not text or not term_set:
            continue
        occs = _occurrences(text, term_set)
        if not occs:
            continue
        best_i = best_j = 0
        best_distinct = 0
        i = 0
        seen: Counter[str] = Counter()
        for j, (j_start, j_end) in enumerate(occs):
            seen[text[j_start:j_end].casefold()] += 1
            while i < j and j_end - occs[i][0] > SNIPPET_WINDOW:
                left = text[occs[i][0] : occs[i][1]].casefold()
                seen[left] -= 1
                if seen[left] == 0:
                    del seen[left]
                i += 1
            if len(seen) > best_distinct:
                best_distinct = len(seen)
                best_i, best_j = i, j
        group_start, group_end = occs[best_i][0], occs[best_j][1]
        pad = max(0, SNIPPET_WINDOW - (group_end - group_start)) // 2
        win_start = max(0, group_start - pad)
        win_end = min(len(text), win_start + SNIPPET_WINDOW)
        win_start = max(0, min(win_start, win_end - SNIPPET_WINDOW, group_start))
        return _render_window(text, win_start, win_end, occs)

    fallback = record.description or record.title
    if len(fallback) > SNIPPET_WINDOW:
        return fallback[:SNIPPET_WINDOW] + "…"
    return fallback
