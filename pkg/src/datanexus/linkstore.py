"""Typed links between records: import, endpoint resolution, merging, summaries.

Links arrive from two directions: curated bibliography files (manual) and
the mention extractor (automatic). Both are folded into one canonical set
here. Publications referenced by a link but absent from the corpus are
created on the fly in a literature pool so the link always has a live
endpoint.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .ingest import CorpusSnapshot
from .jsonio import dump_jsonl, iter_jsonl, now_iso
from .model import (
    Category,
    ID_SCHEMES,
    InvalidIdentifierError,
    Record,
    composite_key,
    normalize_identifier,
)

LINK_METHODS = ("manual", "automatic")
LABEL_USED = "used"
LABEL_MENTIONED = "mentioned"

POOL_SOURCE = "pool"


class LinkError(ValueError):
    """Raised for link values that violate the link invariants."""


class UnresolvableReferenceError(LinkError):
    """Raised when a publication reference has neither title nor DOI."""


def classify_link_label(confidence: float) -> str:
    """A link counts as "used" only at full confidence; anything below is "mentioned"."""
    if not 0.0 <= confidence <= 1.0:
        raise LinkError(f"confidence out of range [0, 1]: {confidence}")
    return LABEL_USED if confidence == 1.0 else LABEL_MENTIONED


def link_id(from_id: str, to_id: str, method: str) -> str:
    digest = hashlib.sha1(f"{from_id}\x1f{to_id}\x1f{method}".encode("utf-8")).hexdigest()
    return f"link-{digest[:16]}"


@dataclass
class ProvenanceEntry:
    origin: str
    method: str
    imported_at: str
    note: str | None = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "origin": self.origin,
            "method": self.method,
            "imported_at": self.imported_at,
        }
        if self.note is not None:
            doc["note"] = self.note
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "ProvenanceEntry":
        return cls(doc["origin"], doc["method"], doc["imported_at"], doc.get("note"))


@dataclass
class Link:
    from_id: str
    to_id: str
    from_category: Category
    to_category: Category
    method: str
    confidence: float
    evidence_passage: str | None = None
    provenance: list[ProvenanceEntry] = field(default_factory=list)

    @property
    def id(self) -> str:
        return link_id(self.from_id, self.to_id, self.method)

    @property
    def label(self) -> str:
        return classify_link_label(self.confidence)

    def validate(self) -> None:
        if self.method not in LINK_METHODS:
            raise LinkError(f"unknown link method: {self.method!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise LinkError(f"confidence out of range [0, 1]: {self.confidence}")
        if self.method == "manual" and self.confidence != 1.0:
            raise LinkError("manual links must have confidence 1.0")
        if self.from_id == self.to_id:
            raise LinkError(f"self-link on {self.from_id}")
        if not self.provenance:
            raise LinkError("link provenance must be non-empty")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "id": self.id,
            "from": self.from_id,
            "to": self.to_id,
            "from_category": self.from_category.value,
            "to_category": self.to_category.value,
            "method": self.method,
            "confidence": self.confidence,
            "label": self.label,
        }
        if self.evidence_passage is not None:
            doc["passage"] = self.evidence_passage
        doc["provenance"] = [p.to_json() for p in self.provenance]
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Link":
        return cls(
            from_id=doc["from"],
            to_id=doc["to"],
            from_category=Category(doc["from_category"]),
            to_category=Category(doc["to_category"]),
            method=doc["method"],
            confidence=doc["confidence"],
            evidence_passage=doc.get("passage"),
            provenance=[ProvenanceEntry.from_json(p) for p in doc.get("provenance", [])],
        )


class LiteraturePool:
    """Match-or-create store for publications known only from references.

    Matching tries the normalized DOI first, then the metadata composite
    key. A miss creates a fresh publication record with a ``pool-{n}`` id,
    so repeated imports of the same bibliography stay stable.
    """

    def __init__(self, records: Iterable[Record] = ()):
        self.records: dict[str, Record] = {}
        self._by_doi: dict[str, str] = {}
        self._by_composite: dict[str, str] = {}
        self._counter = 1
        for rec in records:
            self._admit(rec)

    def _admit(self, rec: Record) -> None:
        self.records[rec.id] = rec
        doi = rec.external_ids.get("doi")
        if doi:
            self._by_doi.setdefault(doi, rec.id)
        if rec.title:
            self._by_composite.setdefault(composite_key(rec.title, rec.year, rec.creators), rec.id)
        if rec.id.startswith("pool-"):
            try:
                self._counter = max(self._counter, int(rec.id.split("-", 1)[1]) + 1)
            except ValueError:
                pass

    def resolve(self, ref: Mapping[str, Any]) -> str:
        """Return the pool id matching ``ref``, creating a record on a miss."""
        raw_doi = ref.get("doi")
        title = (ref.get("title") or "").strip()
        if not raw_doi and not title:
            raise UnresolvableReferenceError("reference needs a title or a DOI")
        doi = None
        if raw_doi:
            try:
                doi = normalize_identifier("doi", str(raw_doi))
            except InvalidIdentifierError:
                doi = None
        if doi and doi in self._by_doi:
            return self._by_doi[doi]
        creators = [str(c) for c in ref.get("creators") or []]
        year = ref.get("year")
        year = int(year) if isinstance(year, (int, str)) and str(year).isdigit() else None
        if title:
            hit = self._by_composite.get(composite_key(title, year, creators))
            if hit is not None:
                return hit
        rec = Record(
            id=f"pool-{self._counter}",
            category=Category.PUBLICATION,
            title=title or doi or "",
            source=POOL_SOURCE,
            creators=creators,
            year=year if year is not None and 1800 <= year <= 2100 else None,
            external_ids={"doi": doi} if doi else {},
        )
        self._counter += 1
        self._admit(rec)
        return rec.id


def resolve_publication_reference(ref: Mapping[str, Any], pool: LiteraturePool) -> str:
    return pool.resolve(ref)


@dataclass
class LinkReject:
    line_no: int
    reason: str

    def to_json(self) -> dict[str, Any]:
        return {"line_no": self.line_no, "reason": self.reason}


def _resolve_endpoint(
    value: str, snapshot: CorpusSnapshot, pool: LiteraturePool
) -> tuple[str | None, Record | None]:
    """Map a links-file endpoint to a live record, consulting the pool last.

    Accepts internal ids (including merged-away aliases) and scheme:value
    references. An unknown DOI endpoint is creatable: it becomes a new
    pool publication. Anything else unknown stays unresolved.
    """
    hit = snapshot.resolve_id(value)
    if hit is not None:
        return hit, snapshot.records[hit]
    if value in pool.records:
        return value, pool.records[value]
    scheme, _, rest = value.partition(":")
    if rest and scheme in ID_SCHEMES:
        try:
            normalized = normalize_identifier(scheme, rest)
        except InvalidIdentifierError:
            return None, None
        hit = snapshot.resolve_id(f"{scheme}:{normalized}")
        if hit is not None:
            return hit, snapshot.records[hit]
        if scheme == "doi":
            pool_id = pool.resolve({"doi": normalized})
            return pool_id, pool.records[pool_id]
    return None, None


def import_link_records(
    lines: Iterable[str],
    origin: str,
    snapshot: CorpusSnapshot,
    pool: LiteraturePool,
    imported_at: str | None = None,
) -> tuple[list[Link], list[LinkReject]]:
    """Parse a links file into Link values, resolving endpoints as we go.

    Manual rows are trusted and pinned to confidence 1.0. Automatic rows
    must bring their own confidence. Rows whose endpoints cannot be
    resolved or created are rejected with a reason, never fatal.
    """
    stamp = imported_at or now_iso()
    links: list[Link] = []
    rejects: list[LinkReject] = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
            if not isinstance(row, dict):
                raise ValueError("row must be an object")
        except ValueError:
            rejects.append(LinkReject(line_no, "malformed"))
            continue
        method = row.get("method", "manual")
        if method not in LINK_METHODS:
            rejects.append(LinkReject(line_no, "unknown-method"))
            continue
        if method == "manual":
            confidence = 1.0
        else:
            confidence = row.get("confidence")
            if not isinstance(confidence, (int, float)):
                rejects.append(LinkReject(line_no, "confidence-required"))
                continue
            confidence = float(confidence)
        if not 0.0 <= confidence <= 1.0:
            rejects.append(LinkReject(line_no, "confidence-range"))
            continue
        from_ref, to_ref = row.get("from"), row.get("to")
        if not from_ref or not to_ref:
            rejects.append(LinkReject(line_no, "endpoint-required"))
            continue
        from_id, from_rec = _resolve_endpoint(str(from_ref), snapshot, pool)
        if from_id is None:
            rejects.append(LinkReject(line_no, f"unknown-endpoint:{from_ref}"))
            continue
        to_id, to_rec = _resolve_endpoint(str(to_ref), snapshot, pool)
        if to_id is None:
            rejects.append(LinkReject(line_no, f"unknown-endpoint:{to_ref}"))
            continue
        if from_id == to_id:
            rejects.append(LinkReject(line_no, "self-link"))
            continue
        link = Link(
            from_id=from_id,
            to_id=to_id,
            from_category=from_rec.category,
            to_category=to_rec.category,
            method=method,
            confidence=confidence,
            evidence_passage=row.get("passage"),
            provenance=[ProvenanceEntry(origin, method, stamp, row.get("note"))],
        )
        link.validate()
        links.append(link)
    return links, rejects


def merge_duplicate_links(links: list[Link]) -> list[Link]:
    """Collapse links sharing (from, to, method) into one, keeping all provenance.

    The merged confidence is the group maximum and the passage follows the
    first maximal member, so merge order never matters. Provenance entries
    are deduplicated by (origin, note).
    """
    groups: dict[tuple[str, str, str], list[Link]] = {}
    for link in links:
        groups.setdefault((link.from_id, link.to_id, link.method), []).append(link)
    merged: list[Link] = []
    for (from_id, to_id, method), members in groups.items():
        best = max(members, key=lambda l: l.confidence)
        provenance: list[ProvenanceEntry] = []
        seen: set[tuple[str, str | None]] = set()
        for member in members:
            for entry in member.provenance:
                key = (entry.origin, entry.note)
                if key not in seen:
                    seen.add(key)
                    provenance.append(entry)
        merged.append(
            Link(
                from_id=from_id,
                to_id=to_id,
                from_category=members[0].from_category,
                to_category=members[0].to_category,
                method=method,
                confidence=best.confidence,
                evidence_passage=best.evidence_passage,
                provenance=provenance,
            )
        )
    return merged


@dataclass
class LinkEntry:
    """One row in a record's link list, as shown next to the record."""

    record_id: str
    title: str
    category: Category
    label: str
    confidence: float
    evidence_passage: str | None = None
    origins: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "record_id": self.record_id,
            "title": self.title,
            "category": self.category.value,
            "label": self.label,
            "confidence": self.confidence,
            "origins": list(self.origins),
        }
        if self.evidence_passage is not None:
            doc["passage"] = self.evidence_passage
        return doc


@dataclass
class LinkSummary:
    record_id: str
    category_counts: dict[str, int] = field(default_factory=dict)
    label_counts: dict[str, int] = field(default_factory=dict)
    entries: list[LinkEntry] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "record_id": self.record_id,
            "category_counts": self.category_counts,
            "label_counts": self.label_counts,
            "links": [e.to_json() for e in self.entries],
        }


def build_link_summaries(
    snapshot: CorpusSnapshot,
    links: list[Link],
    pool: LiteraturePool | None = None,
) -> tuple[dict[str, LinkSummary], list[dict[str, str]]]:
    """Index links by record, symmetrically, and report dangling endpoints.

    Every record (corpus and pool) gets a summary even with zero links so
    lookups never miss. A link contributes an entry to both endpoints;
    entries are ordered used-first, then confidence descending, then
    linked title.
    """
    pool_records = pool.records if pool is not None else {}

    def live(record_id: str) -> Record | None:
        return snapshot.records.get(record_id) or pool_records.get(record_id)

    summaries: dict[str, LinkSummary] = {}
    for record_id in list(snapshot.records) + list(pool_records):
        summaries[record_id] = LinkSummary(
            record_id=record_id,
            category_counts={c.value: 0 for c in Category},
            label_counts={LABEL_USED: 0, LABEL_MENTIONED: 0},
        )

    dangling: list[dict[str, str]] = []
    for link in links:
        from_rec, to_rec = live(link.from_id), live(link.to_id)
        if from_rec is None or to_rec is None:
            missing = link.from_id if from_rec is None else link.to_id
            dangling.append({"link_id": link.id, "missing": missing})
            continue
        label = link.label
        origins = list(dict.fromkeys(p.origin for p in link.provenance))
        for here, there in ((from_rec, to_rec), (to_rec, from_rec)):
            summary = summaries[here.id]
            summary.entries.append(
                LinkEntry(
                    record_id=there.id,
                    title=there.title,
                    category=there.category,
                    label=label,
                    confidence=link.confidence,
                    evidence_passage=link.evidence_passage,
                    origins=origins,
                )
            )
            summary.category_counts[there.category.value] += 1
            summary.label_counts[label] += 1

    for summary in summaries.values():
        summary.entries.sort(
            key=lambda e: (e.label != LABEL_USED, -e.confidence, e.title, e.record_id)
        )
    return summaries, dangling


def write_links(links: list[Link], path: Path | str) -> None:
    ordered = sorted(links, key=lambda l: (l.from_id, l.to_id, l.method))
    dump_jsonl((l.to_json() for l in ordered), path)


def load_links(path: Path | str) -> list[Link]:
    return [Link.from_json(doc) for doc in iter_jsonl(path)]


def write_pool(pool: LiteraturePool, path: Path | str) -> None:
    def sort_key(rec: Record) -> tuple[int, str]:
        _, _, suffix = rec.id.partition("-")
        return (int(suffix), rec.id) if suffix.isdigit() else (1 << 31, rec.id)

    dump_jsonl((r.to_json() for r in sorted(pool.records.values(), key=sort_key)), path)


def load_pool(path: Path | str) -> LiteraturePool:
    path = Path(path)
    if not path.exists():
        return LiteraturePool()
    return LiteraturePool(Record.from_json(doc) for doc in iter_jsonl(path))
