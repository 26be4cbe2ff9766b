"""Common record schema, identifier normalization, and deduplication keys.

Every item in the integrated index is a :class:`Record` tagged with exactly
one :class:`Category`. Records arriving from different sources are folded
together when they agree on a :func:`dedup_key`.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Category(str, Enum):
    RESEARCH_DATA = "research_data"
    PUBLICATION = "publication"
    QUESTION_VARIABLE = "question_variable"
    INSTRUMENT_TOOL = "instrument_tool"
    WEB_PAGE = "web_page"
    LIBRARY_RECORD = "library_record"


CATEGORY_VALUES = tuple(c.value for c in Category)

#: Pseudo-category accepted in queries only; never stored on a record.
ALL_CATEGORIES = "all"

#: Identifier schemes in dedup priority order (most reliable first).
ID_SCHEMES = ("doi", "dara", "urn", "source_local")

MATERIAL_KINDS = ("dataset", "codebook", "questionnaire", "fulltext", "method_report", "other")

_DOI_URL_PREFIX = re.compile(r"^https?://(dx\.)?doi\.org/", re.IGNORECASE)
_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)
_WS = re.compile(r"\s+")


class InvalidIdentifierError(ValueError):
    """Raised when an identifier is empty or unusable after normalization."""


class RecordInvariantError(ValueError):
    """Raised when a record violates the schema invariants."""


def normalize_identifier(scheme: str, raw: str) -> str:
    """Canonicalize an external identifier value.

    DOIs lose any ``https://doi.org/`` style prefix and are lowercased;
    all other schemes are trimmed and lowercased.
    """
    value = raw.strip()
    if scheme == "doi":
        while True:
            stripped = _DOI_URL_PREFIX.sub("", value)
            if stripped == value:
                break
            value = stripped
    value = value.strip().lower()
    if not value:
        raise InvalidIdentifierError(f"empty {scheme} identifier after normalization: {raw!r}")
    return value


def _normalize_phrase(text: str) -> str:
    return _WS.sub(" ", _PUNCT.sub(" ", text.lower())).strip()


def _first_creator_surname(creators: list[str]) -> str:
    if not creators:
        return ""
    name = creators[0]
    surname = name.split(",", 1)[0] if "," in name else name.split()[-1] if name.split() else ""
    return _normalize_phrase(surname)


@dataclass
class Material:
    kind: str
    url: str

    def to_json(self) -> dict[str, str]:
        return {"kind": self.kind, "url": self.url}


@dataclass
class Record:
    """One information item in the common metadata schema."""

    id: str
    category: Category
    title: str
    source: str
    description: str = ""
    creators: list[str] = field(default_factory=list)
    year: int | None = None
    language: str | None = None
    rights: str | None = None
    external_ids: dict[str, str] = field(default_factory=dict)
    materials: list[Material] = field(default_factory=list)
    type_specific: dict[str, str] = field(default_factory=dict)
    full_text: str | None = None

    def validate(self) -> None:
        if not self.id:
            raise RecordInvariantError("record id must be non-empty")
        if not isinstance(self.category, Category):
            raise RecordInvariantError(f"invalid category: {self.category!r}")
        if self.year is not None and not (1800 <= self.year <= 2100):
            raise RecordInvariantError(f"year out of range [1800, 2100]: {self.year}")
        for scheme in self.external_ids:
            if scheme not in ID_SCHEMES:
                raise RecordInvariantError(f"unknown identifier scheme: {scheme}")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "id": self.id,
            "category": self.category.value,
            "title": self.title,
            "source": self.source,
        }
        if self.description:
            doc["description"] = self.description
        if self.creators:
            doc["creators"] = list(self.creators)
        if self.year is not None:
            doc["year"] = self.year
        if self.language:
            doc["language"] = self.language
        if self.rights:
            doc["rights"] = self.rights
        if self.external_ids:
            doc["external_ids"] = dict(sorted(self.external_ids.items()))
        if self.materials:
            doc["materials"] = [m.to_json() for m in self.materials]
        if self.type_specific:
            doc["type_specific"] = dict(sorted(self.type_specific.items()))
        if self.full_text is not None:
            doc["full_text"] = self.full_text
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Record":
        return cls(
            id=doc["id"],
            category=Category(doc["category"]),
            title=doc.get("title", ""),
            source=doc.get("source", ""),
            description=doc.get("description", ""),
            creators=list(doc.get("creators", [])),
            year=doc.get("year"),
            language=doc.get("language"),
            rights=doc.get("rights"),
            external_ids=dict(doc.get("external_ids", {})),
            materials=[Material(m["kind"], m["url"]) for m in doc.get("materials", [])],
            type_specific=dict(doc.get("type_specific", {})),
            full_text=doc.get("full_text"),
        )


def composite_key(title: str, year: int | None, creators: list[str]) -> str:
    """Metadata-based fallback key: normalized title, year, first creator surname."""
    year_part = year if year is not None else ""
    return f"meta:{_normalize_phrase(title)}|{year_part}|{_first_creator_surname(creators)}"


def dedup_key(record: Record) -> str:
    """Deterministic grouping key used to find duplicates across sources.

    The strongest available external id wins (doi > dara > urn >
    source_local); records without any id fall back to a composite of
    normalized title, year, and first creator surname.
    """
    for scheme in ID_SCHEMES:
        value = record.external_ids.get(scheme)
        if value:
            return f"{scheme}:{value}"
    return composite_key(record.title, record.year, record.creators)


@dataclass
class SourceDescriptor:
    """Configuration for one file-based record source."""

    key: str
    path: str
    default_category: Category
    format: str = "records-jsonl"
    field_map: dict[str, str] = field(default_factory=dict)
    priority: int = 0

    def validate(self) -> None:
        if not self.key:
            raise ValueError("source key must be non-empty")
        if self.key == "pool":
            raise ValueError("source key 'pool' is reserved for the literature pool")
        if self.format != "records-jsonl":
            raise ValueError(f"unsupported source format: {self.format}")
        if self.priority < 0:
            raise ValueError("source priority must be >= 0")
