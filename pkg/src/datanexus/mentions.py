"""Find dataset mentions in publication full texts and score them.

A registry of known datasets (ids, titles, declared aliases, survey years)
drives a dictionary matcher. Each hit is resolved back against the
registry; ambiguous aliases split their confidence across the candidates,
which is what later keeps such links labeled "mentioned" instead of
"used".
"""

import re
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Any, Iterable

from .jsonio import iter_jsonl

_WS = re.compile(r"\s+")
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)
_YEAR_TOKEN = re.compile(r"^(18|19|20)\d\d$")

#: How far a year may trail the alias, in tokens.
_YEAR_LOOKAHEAD = 2

_PASSAGE_RADIUS = 120


def _norm(text: str) -> str:
    return _WS.sub(" ", text.casefold()).strip()


@dataclass
class RegistryDataset:
    id: str
    title: str
    aliases: list[str] = field(default_factory=list)
    years: list[int] = field(default_factory=list)

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "RegistryDataset":
        return cls(
            id=doc["id"],
            title=doc.get("title", ""),
            aliases=[str(a) for a in doc.get("aliases", [])],
            years=[int(y) for y in doc.get("years", [])],
        )


class DatasetRegistry:
    def __init__(self, datasets: Iterable[RegistryDataset]):
        self.datasets: dict[str, RegistryDataset] = {d.id: d for d in datasets}
        self.alias_table = build_alias_table(self.datasets.values())


def load_registry(path: Path | str) -> DatasetRegistry:
    return DatasetRegistry(RegistryDataset.from_json(doc) for doc in iter_jsonl(path))


def build_alias_table(datasets: Iterable[RegistryDataset]) -> dict[str, tuple[str, ...]]:
    """Alias → dataset ids, covering titles, declared aliases, and title+year forms."""
    table: dict[str, set[str]] = {}

    def add(alias: str, dataset_id: str) -> None:
        normalized = _norm(alias)
        if normalized:
            table.setdefault(normalized, set()).add(dataset_id)

    for ds in datasets:
        add(ds.title, ds.id)
        for alias in ds.aliases:
            add(alias, ds.id)
        for year in ds.years:
            if ds.title:
                add(f"{ds.title} {year}", ds.id)
    return {alias: tuple(sorted(ids)) for alias, ids in table.items()}


@dataclass
class Mention:
    document_id: str
    surface: str
    start: int
    end: int
    year_token: str | None
    context_passage: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _alias_pattern(alias: str) -> re.Pattern[str]:
    # Whole-word match; underscores count as boundaries like the tokenizer.
    body = r"\s+".join(re.escape(part) for part in alias.split())
    return re.compile(rf"(?<![^\W_]){body}(?![^\W_])", re.IGNORECASE | re.UNICODE)


def _trailing_year(text: str, end: int) -> str | None:
    for token in islice(_TOKEN.finditer(text, end), _YEAR_LOOKAHEAD):
        if _YEAR_TOKEN.match(token.group()):
            return token.group()
    return None


def _passage(text: str, start: int, end: int) -> str:
    left_raw = max(0, start - _PASSAGE_RADIUS)
    right_raw = min(len(text), end + _PASSAGE_RADIUS)
    left_dot = text.rfind(".", left_raw, start)
    left = left_dot + 1 if left_dot != -1 else left_raw
    right_dot = text.find(".", end, right_raw)
    right = right_dot + 1 if right_dot != -1 else right_raw
    return text[left:right].strip()


def extract_mentions(
    text: str, alias_table: dict[str, tuple[str, ...]], document_id: str = ""
) -> list[Mention]:
    """Whole-word, case-insensitive alias scan with overlap pruning.

    Overlapping hits keep only the longest alias, so "ISSP 2010 Family"
    suppresses a nested "ISSP". A trailing 4-digit year within two tokens
    is captured for year-aware resolution.
    """
    if not text:
        return []
    raw: list[tuple[int, int]] = []
    for alias in sorted(alias_table):
        for match in _alias_pattern(alias).finditer(text):
            raw.append((match.start(), match.end()))
    raw = sorted(set(raw), key=lambda m: (m[0] - m[1], m[0]))

    kept: list[tuple[int, int]] = []
    for start, end in raw:
        if all(end <= k_start or start >= k_end for k_start, k_end in kept):
            kept.append((start, end))
    kept.sort()

    return [
        Mention(
            document_id=document_id,
            surface=text[start:end],
            start=start,
            end=end,
            year_token=_trailing_year(text, end),
            context_passage=_passage(text, start, end),
        )
        for start, end in kept
    ]


@dataclass
class Candidate:
    dataset_id: str
    similarity: float
    confidence: float


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def similarity_ratio(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def resolve_mention(mention: Mention, registry: DatasetRegistry) -> list[Candidate]:
    """Score every dataset the matched alias could refer to.

    An exact alias hit (with an agreeing year when both sides have one)
    scores 1.0; otherwise the surface plus year is compared to the dataset
    title by normalized edit distance. Ambiguity divides confidence by the
    candidate count, and hopeless (zero-similarity) candidates are
    dropped.
    """
    ids = registry.alias_table.get(_norm(mention.surface), ())
    if not ids:
        return []
    k = len(ids)
    candidates: list[Candidate] = []
    for dataset_id in ids:
        ds = registry.datasets[dataset_id]
        if mention.year_token is not None and ds.years and int(mention.year_token) not in ds.years:
            probe = _norm(f"{mention.surface} {mention.year_token}")
            sim = similarity_ratio(probe, _norm(ds.title))
        else:
            sim = 1.0
        if sim <= 0.0:
            continue
        candidates.append(Candidate(dataset_id, sim, sim if k == 1 else sim / k))
    candidates.sort(key=lambda c: (-c.confidence, c.dataset_id))
    return candidates


def mention_link_rows(
    document_id: str, text: str, registry: DatasetRegistry
) -> list[dict[str, Any]]:
    """Turn one document's mentions into automatic link rows (links file shape)."""
    rows: list[dict[str, Any]] = []
    for mention in extract_mentions(text, registry.alias_table, document_id):
        for candidate in resolve_mention(mention, registry):
            rows.append(
                {
                    "from": document_id,
                    "to": candidate.dataset_id,
                    "method": "automatic",
                    "confidence": candidate.confidence,
                    "passage": mention.context_passage,
                    "note": f"alias match: {mention.surface}",
                }
            )
    return rows
