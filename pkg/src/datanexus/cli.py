"""Operator commands: ingest, link processing, index build, serve, analyze.

Stages communicate through files in one artifacts directory, so each
stage can be re-run (and tested) on its own:

    snapshot.jsonl / snapshot_meta.json / source_report.json   (ingest)
    links_raw.jsonl / pool.jsonl                               (links import|extract)
    links.jsonl / link_report.json                             (links merge)
    index.json.gz                                              (build-index)

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import sys
from datetime import timedelta
from pathlib import Path

import click

from . import analytics
from .apiserver import ServerState, create_app
from .ingest import (
    CorpusSnapshot,
    SourceFileError,
    build_snapshot,
    load_snapshot,
    load_source_config,
    write_snapshot,
)
from .jsonio import canonical_dumps, dump_json, now_iso
from .linkstore import (
    Link,
    LiteraturePool,
    build_link_summaries,
    import_link_records,
    load_links,
    load_pool,
    merge_duplicate_links,
    write_links,
    write_pool,
)
from .mentions import load_registry, mention_link_rows
from .searchcore import build_index, save_index


class DataError(RuntimeError):
    """Input data or artifacts are missing or unusable; exit code 2."""


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise DataError(f"missing {hint}: {path}")
    return path


def _load_corpus(out_dir: Path) -> CorpusSnapshot:
    _require(out_dir / "snapshot.jsonl", "snapshot file (run `ingest` first)")
    return load_snapshot(out_dir)


def _append_raw_links(out_dir: Path, links: list[Link]) -> None:
    with open(out_dir / "links_raw.jsonl", "a", encoding="utf-8") as handle:
        for link in links:
            handle.write(canonical_dumps(link.to_json()) + "\n")


@click.group()
@click.option("--verbose", is_flag=True, default=False, help="Chattier progress output.")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """Integrated research-information search: build, serve, analyze."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose


@cli.command()
@click.option("--sources", "sources_path", required=True, type=click.Path(), help="Source config JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Artifacts directory.")
def ingest(sources_path: str, out_dir: str) -> None:
    """Load all sources, deduplicate, write the corpus snapshot."""
    config = _require(Path(sources_path), "source config")
    try:
        descriptors, base_dir = load_source_config(config)
        snapshot = build_snapshot(descriptors, base_dir=base_dir)
    except (ValueError, KeyError, SourceFileError) as exc:
        raise DataError(str(exc)) from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_snapshot(snapshot, out)
    merged = sum(r.merged for r in snapshot.source_report.values())
    rejected = sum(len(r.rejects) for r in snapshot.source_report.values())
    click.echo(f"ingested {len(snapshot.records)} records ({merged} merged, {rejected} rejected)")


@cli.group()
def links() -> None:
    """Import, extract, and merge links between records."""


@links.command("import")
@click.option("--file", "links_path", required=True, type=click.Path(), help="Links JSONL file.")
@click.option("--origin", required=True, help="Provenance origin key.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Artifacts directory.")
def links_import(links_path: str, origin: str, out_dir: str) -> None:
    """Resolve a curated links file against the snapshot and stage it."""
    out = Path(out_dir)
    snapshot = _load_corpus(out)
    pool = load_pool(out / "pool.jsonl")
    path = _require(Path(links_path), "links file")
    with open(path, encoding="utf-8") as handle:
        imported, rejects = import_link_records(handle, origin, snapshot, pool, now_iso())
    _append_raw_links(out, imported)
    write_pool(pool, out / "pool.jsonl")
    click.echo(f"imported {len(imported)} links from {origin} ({len(rejects)} rejected)")
    for reject in rejects[:10]:
        click.echo(f"  line {reject.line_no}: {reject.reason}", err=True)


@links.command("extract")
@click.option("--registry", "registry_path", required=True, type=click.Path(),
              help="Dataset registry JSONL (id, title, aliases, years).")
@click.option("--fulltexts", "fulltexts_dir", type=click.Path(), default=None,
              help="Directory of <record-id>.txt files; snapshot full texts are always scanned.")
@click.option("--origin", default="mention-extractor", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def links_extract(registry_path: str, fulltexts_dir: str | None, origin: str, out_dir: str) -> None:
    """Scan full texts for dataset mentions and stage the automatic links."""
    out = Path(out_dir)
    snapshot = _load_corpus(out)
    pool = load_pool(out / "pool.jsonl")
    registry = load_registry(_require(Path(registry_path), "dataset registry"))

    documents: dict[str, str] = {}
    for record in snapshot.records.values():
        if record.full_text:
            documents[record.id] = record.full_text
    if fulltexts_dir:
        for path in sorted(Path(fulltexts_dir).glob("*.txt")):
            resolved = snapshot.resolve_id(path.stem)
            if resolved is not None:
                documents[resolved] = path.read_text(encoding="utf-8")

    stamp = now_iso()
    total, rejected = 0, 0
    staged: list[Link] = []
    for doc_id in sorted(documents):
        rows = mention_link_rows(doc_id, documents[doc_id], registry)
        if not rows:
            continue
        lines = [canonical_dumps(row) for row in rows]
        imported, rejects = import_link_records(lines, origin, snapshot, pool, stamp)
        staged.extend(imported)
        total += len(imported)
        rejected += len(rejects)
    _append_raw_links(out, staged)
    write_pool(pool, out / "pool.jsonl")
    click.echo(f"extracted {total} automatic links from {len(documents)} documents "
               f"({rejected} unresolved)")


@links.command("merge")
@click.option("--out", "out_dir", required=True, type=click.Path())
def links_merge(out_dir: str) -> None:
    """Collapse staged duplicates into the canonical link set."""
    out = Path(out_dir)
    snapshot = _load_corpus(out)
    pool = load_pool(out / "pool.jsonl")
    raw_path = _require(out / "links_raw.jsonl", "staged links (run `links import` first)")
    merged = merge_duplicate_links(load_links(raw_path))
    _, dangling = build_link_summaries(snapshot, merged, pool)
    write_links(merged, out / "links.jsonl")
    dump_json(
        {"links": len(merged), "dangling": dangling, "merged_at": now_iso()},
        out / "link_report.json",
    )
    click.echo(f"merged to {len(merged)} links ({len(dangling)} dangling)")


@cli.command("build-index")
@click.option("--out", "out_dir", required=True, type=click.Path())
def build_index_command(out_dir: str) -> None:
    """Build the search index from the snapshot, links, and literature pool."""
    out = Path(out_dir)
    snapshot = _load_corpus(out)
    pool = load_pool(out / "pool.jsonl")
    links_path = out / "links.jsonl"
    link_set = load_links(links_path) if links_path.exists() else []

    # Pool publications become first-class records so link targets are
    # always viewable and searchable.
    combined = dict(snapshot.records)
    combined.update(pool.records)
    corpus = CorpusSnapshot(
        records=combined,
        built_at=snapshot.built_at,
        source_report=snapshot.source_report,
        id_aliases=snapshot.id_aliases,
    )
    summaries, dangling = build_link_summaries(corpus, link_set)
    index = build_index(corpus, summaries)
    save_index(index, out / "index.json.gz")
    click.echo(f"indexed {index.doc_count} records, {len(link_set)} links "
               f"({len(dangling)} dangling)")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Artifacts directory.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--event-log", "event_log_path", default=None, type=click.Path(),
              help="Usage-event sink (default: <out>/events.jsonl).")
def serve(out_dir: str, host: str, port: int, event_log_path: str | None) -> None:
    """Serve the HTTP API over the built artifacts."""
    if not 1 <= port <= 65535:
        raise click.UsageError("port must be in [1, 65535]")
    out = Path(out_dir)
    _require(out / "index.json.gz", "search index (run `build-index` first)")
    event_log = Path(event_log_path) if event_log_path else out / "events.jsonl"
    state = ServerState.from_artifacts(out, event_log)
    import uvicorn

    uvicorn.run(create_app(state), host=host, port=port, log_level="warning")


@cli.command()
@click.option("--logs", "log_paths", required=True, multiple=True, type=click.Path(),
              help="Event-log file (repeatable).")
@click.option("--timeout-min", default=30.0, show_default=True, type=float,
              help="Session inactivity timeout in minutes.")
@click.option("--path-depth", default=8, show_default=True, type=int)
@click.option("--out", "report_path", required=True, type=click.Path())
def analyze(log_paths: tuple[str, ...], timeout_min: float, path_depth: int, report_path: str) -> None:
    """Compute the usage report from event logs."""
    if path_depth < 1:
        raise click.UsageError("path depth must be >= 1")
    if timeout_min <= 0:
        raise click.UsageError("timeout must be positive")
    lines: list[str] = []
    for log_path in log_paths:
        path = _require(Path(log_path), "event log")
        lines.extend(path.read_text(encoding="utf-8").splitlines())
    events, rejected = analytics.parse_events(lines)
    sessions = analytics.sessionize(events, timedelta(minutes=timeout_min))
    report = analytics.compute_report(sessions, path_depth)
    doc = report.to_json()
    doc["parse_rejects"] = rejected
    dump_json(doc, report_path)
    click.echo(f"analyzed {report.event_count} events in {report.session_count} sessions "
               f"({rejected} lines rejected)")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
def stats(out_dir: str) -> None:
    """Print corpus and link counts."""
    out = Path(out_dir)
    snapshot = _load_corpus(out)
    pool = load_pool(out / "pool.jsonl")
    links_path = out / "links.jsonl"
    link_set = load_links(links_path) if links_path.exists() else []
    pairs: dict[str, int] = {}
    for link in link_set:
        key = "|".join(sorted((link.from_category.value, link.to_category.value)))
        pairs[key] = pairs.get(key, 0) + 1
    click.echo(
        canonical_dumps(
            {
                "built_at": snapshot.built_at,
                "records_by_category": snapshot.counts_by_category(),
                "pool_records": len(pool.records),
                "link_count": len(link_set),
                "links_by_category_pair": dict(sorted(pairs.items())),
            }
        )
    )


def run_command(argv: list[str] | None = None) -> int:
    """Dispatch one command; exit codes 0 (ok), 1 (usage), 2 (data)."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
