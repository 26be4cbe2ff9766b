"""Plain-text citation renderers for the record export endpoint."""

from .model import Category, Record

CITATION_FORMATS = ("bibtex", "ris", "endnote", "apa_text")

_RIS_TYPES = {
    Category.RESEARCH_DATA: "DATA",
    Category.PUBLICATION: "JOUR",
}

_ENDNOTE_TYPES = {
    Category.RESEARCH_DATA: "Dataset",
    Category.PUBLICATION: "Journal Article",
}


class UnknownCitationFormatError(ValueError):
    pass


def render_citation(record: Record, fmt: str) -> str:
    if fmt == "bibtex":
        return to_bibtex(record)
    if fmt == "ris":
        return to_ris(record)
    if fmt == "endnote":
        return to_endnote(record)
    if fmt == "apa_text":
        return to_apa_text(record)
    raise UnknownCitationFormatError(f"unknown citation format: {fmt}")


def to_bibtex(record: Record) -> str:
    lines = [f"@misc{{{record.id},"]
    if record.title:
        lines.append(f"  title = {{{record.title}}},")
    if record.creators:
        lines.append(f"  author = {{{' and '.join(record.creators)}}},")
    if record.year is not None:
        lines.append(f"  year = {{{record.year}}},")
    doi = record.external_ids.get("doi")
    if doi:
        lines.append(f"  doi = {{{doi}}},")
    lines.append("}")
    return "\n".join(lines)


def to_ris(record: Record) -> str:
    lines = [f"TY  - {_RIS_TYPES.get(record.category, 'GEN')}"]
    if record.title:
        lines.append(f"TI  - {record.title}")
    for creator in record.creators:
        lines.append(f"AU  - {creator}")
    if record.year is not None:
        lines.append(f"PY  - {record.year}")
    doi = record.external_ids.get("doi")
    if doi:
        lines.append(f"DO  - {doi}")
    lines.append("ER  - ")
    return "\n".join(lines)


def to_endnote(record: Record) -> str:
    lines = [f"%0 {_ENDNOTE_TYPES.get(record.category, 'Generic')}"]
    if record.title:
        lines.append(f"%T {record.title}")
    for creator in record.creators:
        lines.append(f"%A {creator}")
    if record.year is not None:
        lines.append(f"%D {record.year}")
    doi = record.external_ids.get("doi")
    if doi:
        lines.append(f"%R {doi}")
    return "\n".join(lines)


def to_apa_text(record: Record) -> str:
    segments = []
    if record.creators:
        segments.append(", ".join(record.creators))
    if record.year is not None:
        segments.append(f"({record.year})")
    if record.title:
        segments.append(record.title)
    if record.source:
        segments.append(record.source)
    text = " ".join(seg if seg.endswith(".") else seg + "." for seg in segments)
    doi = record.external_ids.get("doi")
    if doi:
        text = f"{text} https://doi.org/{doi}" if text else f"https://doi.org/{doi}"
    return text
