"""Canonical JSON serialization helpers shared by all pipeline stages.

Every artifact the pipeline writes goes through these functions so that
identical inputs yield byte-identical files (sorted keys, fixed separators,
gzip with zeroed mtime, timestamps overridable via SOURCE_DATE_EPOCH).
"""

import gzip
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dump_json(obj: Any, path: Path | str) -> None:
    Path(path).write_text(canonical_dumps(obj) + "\n", encoding="utf-8")


def load_json(path: Path | str) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def dump_jsonl(rows: Iterable[Any], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(canonical_dumps(row) + "\n")


def iter_jsonl(path: Path | str) -> Iterator[Any]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def dump_json_gz(obj: Any, path: Path | str) -> None:
    # mtime=0 keeps the gzip header reproducible across runs
    with open(path, "wb") as raw:
        with gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as fh:
            fh.write((canonical_dumps(obj) + "\n").encode("utf-8"))


def load_json_gz(path: Path | str) -> Any:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        return json.load(fh)


def now_iso() -> str:
    """Current UTC time, honoring SOURCE_DATE_EPOCH for reproducible builds."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.replace(microsecond=0).isoformat()
