"""Nightly-style corpus rebuild: load source files, normalize, dedup, merge.

Each source is a JSON-lines file described by a :class:`SourceDescriptor`.
A build reads every source from scratch, groups records by
:func:`~datanexus.model.dedup_key`, and folds each group into one record,
so identical inputs always produce an identical snapshot.
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from datanexus import jsonio
from datanexus.model import (
    ID_SCHEMES,
    MATERIAL_KINDS,
    Category,
    InvalidIdentifierError,
    Material,
    Record,
    SourceDescriptor,
    dedup_key,
    normalize_identifier,
)

_YEAR_RE = re.compile(r"^(\d{4})")


class SourceFileError(RuntimeError):
    """A source file could not be read at all; aborts the build."""

    def __init__(self, source_key: str, path: str, cause: str):
        super().__init__(f"source {source_key!r}: cannot read {path}: {cause}")
        self.source_key = source_key
        self.path = path


class MergeKeyError(ValueError):
    """merge_records called on records with different dedup keys."""


@dataclass
class RejectReport:
    line_no: int
    reason: str
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"line_no": self.line_no, "reason": self.reason}
        if self.detail:
            doc["detail"] = self.detail
        return doc


@dataclass
class SourceReport:
    read: int = 0
    accepted: int = 0
    rejected: int = 0
    merged: int = 0
    rejects: list[RejectReport] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "read": self.read,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "merged": self.merged,
            "rejects": [r.to_json() for r in self.rejects],
        }


@dataclass
class CorpusSnapshot:
    """Immutable result of one full rebuild."""

    records: dict[str, Record]
    built_at: str
    source_report: dict[str, SourceReport]
    id_aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self._by_external_id: dict[str, str] = {}
        for rec in self.records.values():
            for scheme, value in rec.external_ids.items():
                self._by_external_id[f"{scheme}:{value}"] = rec.id

    def resolve_id(self, ref: str) -> str | None:
        """Map an internal id (possibly merged away) or scheme:value ref to a live record id."""
        if ref in self.records:
            return ref
        alias = self.id_aliases.get(ref)
        if alias is not None and alias in self.records:
            return alias
        return self._by_external_id.get(ref)

    def counts_by_category(self) -> dict[str, int]:
        counts = {c.value: 0 for c in Category}
        for rec in self.records.values():
            counts[rec.category.value] += 1
        return counts


def _parse_year(value: Any) -> int | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        year = value
    else:
        m = _YEAR_RE.match(str(value).strip())
        if not m:
            return None
        year = int(m.group(1))
    return year if 1800 <= year <= 2100 else None


def _parse_creators(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value.strip()] if value.strip() else []
    return [str(v).strip() for v in value if str(v).strip()]


def _parse_materials(value: Any) -> list[Material]:
    materials = []
    for item in value or []:
        if not isinstance(item, dict) or not item.get("url"):
            continue
        kind = item.get("kind", "other")
        if kind not in MATERIAL_KINDS:
            kind = "other"
        materials.append(Material(kind=kind, url=str(item["url"])))
    return materials


def _parse_external_ids(row: dict[str, Any]) -> dict[str, str]:
    ids: dict[str, str] = {}
    declared = row.get("external_ids", {})
    if isinstance(declared, list):
        declared = {e["scheme"]: e["value"] for e in declared if isinstance(e, dict)}
    for scheme, value in declared.items():
        if scheme in ID_SCHEMES and value is not None:
            ids[scheme] = str(value)
    # shorthand top-level id fields
    for scheme in ("doi", "urn", "dara"):
        if row.get(scheme):
            ids.setdefault(scheme, str(row[scheme]))
    normalized = {}
    for scheme, value in ids.items():
        try:
            normalized[scheme] = normalize_identifier(scheme, value)
        except InvalidIdentifierError:
            continue
    return normalized


def _apply_field_map(row: dict[str, Any], field_map: dict[str, str]) -> dict[str, Any]:
    if not field_map:
        return row
    mapped: dict[str, Any] = {}
    for key, value in row.items():
        target = field_map.get(key, key)
        if target.startswith("type_specific."):
            mapped.setdefault("type_specific", {})
            mapped["type_specific"][target.split(".", 1)[1]] = value
        else:
            mapped[target] = value
    return mapped


def load_and_normalize(
    descriptor: SourceDescriptor,
    lines: Iterable[str],
    base_dir: Path | None = None,
) -> tuple[list[Record], list[RejectReport]]:
    """Turn one source's lines into schema records, collecting per-line rejects."""
    records: list[Record] = []
    rejects: list[RejectReport] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            rejects.append(RejectReport(line_no, "malformed", str(exc)))
            continue
        if not isinstance(row, dict):
            rejects.append(RejectReport(line_no, "malformed", "line is not an object"))
            continue
        row = _apply_field_map(row, descriptor.field_map)

        row_id = str(row.get("id") or "").strip()
        if not row_id:
            rejects.append(RejectReport(line_no, "id-required"))
            continue
        internal_id = f"{descriptor.key}-{row_id}"
        if internal_id in seen_ids:
            rejects.append(RejectReport(line_no, "duplicate-id", internal_id))
            continue

        title = str(row.get("title") or "").strip()
        if not title:
            rejects.append(RejectReport(line_no, "title-required"))
            continue

        raw_category = row.get("category")
        if raw_category is None:
            category = descriptor.default_category
        else:
            try:
                category = Category(str(raw_category))
            except ValueError:
                rejects.append(RejectReport(line_no, "unknown-category", str(raw_category)))
                continue

        full_text = row.get("full_text")
        if full_text is None and row.get("full_text_path"):
            text_path = Path(row["full_text_path"])
            if base_dir is not None and not text_path.is_absolute():
                text_path = base_dir / text_path
            try:
                full_text = text_path.read_text(encoding="utf-8")
            except OSError as exc:
                rejects.append(RejectReport(line_no, "fulltext-unreadable", str(exc)))
                continue

        type_specific = {
            str(k): str(v) for k, v in (row.get("type_specific") or {}).items() if v is not None
        }

        record = Record(
            id=internal_id,
            category=category,
            title=title,
            source=descriptor.key,
            description=str(row.get("description") or ""),
            creators=_parse_creators(row.get("creators")),
            year=_parse_year(row.get("year")),
            language=str(row["language"]).strip().lower() if row.get("language") else None,
            rights=str(row["rights"]) if row.get("rights") else None,
            external_ids=_parse_external_ids(row),
            materials=_parse_materials(row.get("materials")),
            type_specific=type_specific,
            full_text=str(full_text) if full_text is not None else None,
        )
        try:
            record.validate()
        except Exception as exc:
            rejects.append(RejectReport(line_no, "invariant", str(exc)))
            continue
        seen_ids.add(internal_id)
        records.append(record)
    return records, rejects


def merge_records(a: Record, b: Record, priorities: dict[str, int] | None = None) -> Record:
    """Fold two records that share a dedup key into one.

    The record whose source carries the lower priority number wins scalar
    conflicts; identifiers and materials are unioned.
    """
    if dedup_key(a) != dedup_key(b):
        raise MergeKeyError(f"dedup keys differ: {dedup_key(a)!r} vs {dedup_key(b)!r}")
    priorities = priorities or {}
    pa, pb = priorities.get(a.source, 0), priorities.get(b.source, 0)
    win, lose = (b, a) if pb < pa else (a, b)

    external_ids = dict(win.external_ids)
    for scheme, value in lose.external_ids.items():
        external_ids.setdefault(scheme, value)

    materials = list(win.materials)
    seen = {(m.kind, m.url) for m in materials}
    for m in lose.materials:
        if (m.kind, m.url) not in seen:
            seen.add((m.kind, m.url))
            materials.append(m)

    type_specific = dict(lose.type_specific)
    type_specific.update(win.type_specific)

    return Record(
        id=min(a.id, b.id),
        category=win.category,
        title=win.title or lose.title,
        source=win.source,
        description=win.description or lose.description,
        creators=win.creators or lose.creators,
        year=win.year if win.year is not None else lose.year,
        language=win.language or lose.language,
        rights=win.rights or lose.rights,
        external_ids=external_ids,
        materials=materials,
        type_specific=type_specific,
        full_text=win.full_text if win.full_text is not None else lose.full_text,
    )


def build_snapshot(
    descriptors: list[SourceDescriptor],
    base_dir: Path | None = None,
    built_at: str | None = None,
) -> CorpusSnapshot:
    """Full rebuild over all sources; deterministic for identical inputs."""
    keys = [d.key for d in descriptors]
    if len(keys) != len(set(keys)):
        raise ValueError(f"duplicate source keys in configuration: {keys}")
    for d in descriptors:
        d.validate()
    priorities = {d.key: d.priority for d in descriptors}

    report: dict[str, SourceReport] = {}
    loaded: list[Record] = []
    for descriptor in descriptors:
        path = Path(descriptor.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise SourceFileError(descriptor.key, str(path), str(exc)) from exc
        records, rejects = load_and_normalize(descriptor, lines, base_dir=path.parent)
        report[descriptor.key] = SourceReport(
            read=len(records) + len(rejects),
            accepted=len(records),
            rejected=len(rejects),
            rejects=rejects,
        )
        loaded.extend(records)

    groups: dict[str, list[Record]] = {}
    for record in loaded:
        groups.setdefault(dedup_key(record), []).append(record)

    merged_records: dict[str, Record] = {}
    id_aliases: dict[str, str] = {}
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda r: (priorities.get(r.source, 0), r.source, r.id))
        acc = members[0]
        for nxt in members[1:]:
            acc = merge_records(acc, nxt, priorities)
            report[nxt.source].merged += 1
        if acc.id in merged_records:
            raise ValueError(f"internal id collision across dedup groups: {acc.id}")
        merged_records[acc.id] = acc
        for member in members:
            id_aliases[member.id] = acc.id

    return CorpusSnapshot(
        records=merged_records,
        built_at=built_at or jsonio.now_iso(),
        source_report=report,
        id_aliases=id_aliases,
    )


# --- source configuration and snapshot artifacts ---------------------------

def load_source_config(path: Path | str) -> tuple[list[SourceDescriptor], Path]:
    """Read the sources config file; relative source paths resolve against it."""
    path = Path(path)
    doc = jsonio.load_json(path)
    entries = doc["sources"] if isinstance(doc, dict) else doc
    descriptors = []
    for i, entry in enumerate(entries):
        descriptors.append(
            SourceDescriptor(
                key=entry["key"],
                path=entry["path"],
                default_category=Category(entry["default_category"]),
                format=entry.get("format", "records-jsonl"),
                field_map=dict(entry.get("field_map", {})),
                priority=int(entry.get("priority", i)),
            )
        )
    return descriptors, path.parent


SNAPSHOT_FILE = "snapshot.jsonl"
SNAPSHOT_META_FILE = "snapshot_meta.json"
SOURCE_REPORT_FILE = "source_report.json"


def write_snapshot(snapshot: CorpusSnapshot, out_dir: Path | str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonio.dump_jsonl(
        (snapshot.records[rid].to_json() for rid in sorted(snapshot.records)),
        out / SNAPSHOT_FILE,
    )
    jsonio.dump_json(
        {"built_at": snapshot.built_at, "id_aliases": dict(sorted(snapshot.id_aliases.items()))},
        out / SNAPSHOT_META_FILE,
    )
    jsonio.dump_json(
        {key: rep.to_json() for key, rep in sorted(snapshot.source_report.items())},
        out / SOURCE_REPORT_FILE,
    )


def load_snapshot(out_dir: Path | str) -> CorpusSnapshot:
    out = Path(out_dir)
    records = {}
    for doc in jsonio.iter_jsonl(out / SNAPSHOT_FILE):
        rec = Record.from_json(doc)
        records[rec.id] = rec
    meta = jsonio.load_json(out / SNAPSHOT_META_FILE)
    report = {}
    report_path = out / SOURCE_REPORT_FILE
    if report_path.exists():
        for key, rep in jsonio.load_json(report_path).items():
            report[key] = SourceReport(
                read=rep["read"],
                accepted=rep["accepted"],
                rejected=rep["rejected"],
                merged=rep["merged"],
                rejects=[RejectReport(r["line_no"], r["reason"], r.get("detail", "")) for r in rep["rejects"]],
            )
    return CorpusSnapshot(
        records=records,
        built_at=meta["built_at"],
        source_report=report,
        id_aliases=meta.get("id_aliases", {}),
    )
