"""Command-line pipeline tests over the committed demo fixtures.

Exit-code contract: 0 success, 1 usage error, 2 data error.
"""

import hashlib
import json
from pathlib import Path

import pytest

from datanexus.cli import run_command
from datanexus.linkstore import load_links, load_pool
from datanexus.searchcore import load_index

FIXTURES = Path(__file__).parent / "fixtures" / "demo"


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    # Pin all build stamps so artifact bytes are comparable across runs.
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def ingest(art: Path) -> None:
    assert run_command(["ingest", "--sources", str(FIXTURES / "sources.json"),
                        "--out", str(art)]) == 0


def stage_links(art: Path, origin: str = "gesis-bib") -> None:
    assert run_command(["links", "import", "--file", str(FIXTURES / "links_manual.jsonl"),
                        "--origin", origin, "--out", str(art)]) == 0


def extract_links(art: Path) -> None:
    assert run_command(["links", "extract", "--registry", str(FIXTURES / "registry.jsonl"),
                        "--fulltexts", str(FIXTURES / "fulltexts"), "--out", str(art)]) == 0


def full_pipeline(art: Path) -> None:
    ingest(art)
    stage_links(art)
    extract_links(art)
    assert run_command(["links", "merge", "--out", str(art)]) == 0
    assert run_command(["build-index", "--out", str(art)]) == 0


class TestIngest:
    def test_builds_snapshot_with_merged_duplicate(self, tmp_path):
        ingest(tmp_path)
        lines = (tmp_path / "snapshot.jsonl").read_text().splitlines()
        records = {json.loads(l)["id"]: json.loads(l) for l in lines}
        # 7 accepted rows, the ssoar DOI duplicate folds into the gesis record
        assert len(records) == 6
        assert "ssoar-d1" not in records
        merged = records["gesis-ZA5900"]
        assert merged["external_ids"]["doi"] == "10.4232/1.11564"
        assert merged["external_ids"]["urn"] == "urn:nbn:de:0168-za5900"
        assert merged["rights"] == "CC BY 4.0"  # only the duplicate carried it
        meta = json.loads((tmp_path / "snapshot_meta.json").read_text())
        assert meta["built_at"] == "2023-11-14T22:13:20+00:00"
        assert meta["id_aliases"]["ssoar-d1"] == "gesis-ZA5900"
        report = json.loads((tmp_path / "source_report.json").read_text())
        assert report["ssoar"]["merged"] == 1
        assert report["gesis"]["accepted"] == 4

    def test_missing_config_is_data_error(self, tmp_path, capsys):
        code = run_command(["ingest", "--sources", str(tmp_path / "nope.json"),
                            "--out", str(tmp_path)])
        assert code == 2
        assert "nope.json" in capsys.readouterr().err

    def test_unreadable_source_file_is_data_error(self, tmp_path, capsys):
        config = tmp_path / "sources.json"
        config.write_text(json.dumps({"sources": [
            {"key": "x", "path": "absent.jsonl", "default_category": "publication"},
        ]}))
        code = run_command(["ingest", "--sources", str(config), "--out", str(tmp_path)])
        assert code == 2
        assert "absent.jsonl" in capsys.readouterr().err

    def test_malformed_config_is_data_error(self, tmp_path):
        config = tmp_path / "sources.json"
        config.write_text("{not json")
        assert run_command(["ingest", "--sources", str(config), "--out", str(tmp_path)]) == 2

    def test_missing_required_option_is_usage_error(self, tmp_path):
        assert run_command(["ingest", "--out", str(tmp_path)]) == 1


class TestLinkCommands:
    def test_import_stages_links_and_grows_pool(self, tmp_path):
        ingest(tmp_path)
        stage_links(tmp_path)
        staged = load_links(tmp_path / "links_raw.jsonl")
        assert len(staged) == 3
        assert all(l.confidence == 1.0 for l in staged)  # manual rows are pinned
        pool = load_pool(tmp_path / "pool.jsonl")
        assert list(pool.records) == ["pool-1"]
        assert pool.records["pool-1"].external_ids["doi"] == "10.9999/external-pub"

    def test_import_without_snapshot_is_data_error(self, tmp_path, capsys):
        code = run_command(["links", "import", "--file", str(FIXTURES / "links_manual.jsonl"),
                            "--origin", "x", "--out", str(tmp_path)])
        assert code == 2
        assert "snapshot" in capsys.readouterr().err

    def test_import_reports_unresolvable_rows(self, tmp_path, capsys):
        ingest(tmp_path)
        bad = tmp_path / "bad_links.jsonl"
        bad.write_text('{"from": "no-such-record", "to": "gesis-ZA5900", "method": "manual"}\n')
        assert run_command(["links", "import", "--file", str(bad),
                            "--origin", "x", "--out", str(tmp_path)]) == 0
        assert "unknown-endpoint" in capsys.readouterr().err
        assert load_links(tmp_path / "links_raw.jsonl") == []

    def test_extract_finds_planted_mentions(self, tmp_path):
        ingest(tmp_path)
        extract_links(tmp_path)
        staged = {(l.from_id, l.to_id): l for l in load_links(tmp_path / "links_raw.jsonl")}
        assert len(staged) == 3

        # snapshot full text: "ISSP 2012" reaches two registry datasets
        exact = staged[("ssoar-p1", "gesis-ZA5900")]
        assert exact.method == "automatic"
        assert exact.confidence == pytest.approx(0.5)
        assert "ISSP 2012" in exact.evidence_passage
        fuzzy = staged[("ssoar-p1", "gesis-ZA5800")]
        assert 0.0 < fuzzy.confidence < 0.5

        # fulltexts directory: unambiguous ALLBUS mention with matching year
        direct = staged[("ssoar-p2", "gesis-ZA4600")]
        assert direct.confidence == 1.0
        assert "ALLBUS 2006" in direct.evidence_passage

    def test_merge_collapses_duplicates_across_origins(self, tmp_path):
        ingest(tmp_path)
        stage_links(tmp_path, origin="gesis-bib")
        stage_links(tmp_path, origin="datacite")
        assert len(load_links(tmp_path / "links_raw.jsonl")) == 6
        assert run_command(["links", "merge", "--out", str(tmp_path)]) == 0
        merged = load_links(tmp_path / "links.jsonl")
        assert len(merged) == 3
        origins = {tuple(p.origin for p in l.provenance) for l in merged}
        assert origins == {("gesis-bib", "datacite")}
        report = json.loads((tmp_path / "link_report.json").read_text())
        assert report["links"] == 3
        assert report["dangling"] == []

    def test_merge_without_staged_links_is_data_error(self, tmp_path, capsys):
        ingest(tmp_path)
        assert run_command(["links", "merge", "--out", str(tmp_path)]) == 2
        assert "links_raw.jsonl" in capsys.readouterr().err


class TestBuildIndex:
    def test_without_snapshot_names_missing_file(self, tmp_path, capsys):
        assert run_command(["build-index", "--out", str(tmp_path)]) == 2
        assert "snapshot.jsonl" in capsys.readouterr().err

    def test_index_covers_snapshot_and_pool(self, tmp_path):
        full_pipeline(tmp_path)
        index = load_index(tmp_path / "index.json.gz")
        assert index.doc_count == 7
        assert "pool-1" in index.records
        # p1 carries three links: one manual plus two automatic mentions
        p1_counts = index.link_counts[index.id_to_ordinal["ssoar-p1"]]
        assert p1_counts["research_data"] == 3
        assert sum(p1_counts.values()) == 3

    def test_works_without_links(self, tmp_path):
        ingest(tmp_path)
        assert run_command(["build-index", "--out", str(tmp_path)]) == 0
        index = load_index(tmp_path / "index.json.gz")
        assert index.doc_count == 6
        assert all(sum(counts.values()) == 0 for counts in index.link_counts)


class TestServe:
    def test_without_index_is_data_error(self, tmp_path, capsys):
        ingest(tmp_path)
        assert run_command(["serve", "--out", str(tmp_path)]) == 2
        assert "index.json.gz" in capsys.readouterr().err

    def test_bad_port_is_usage_error(self, tmp_path):
        assert run_command(["serve", "--out", str(tmp_path), "--port", "70000"]) == 1


class TestAnalyze:
    def test_matches_committed_golden_report(self, tmp_path):
        out = tmp_path / "report.json"
        assert run_command(["analyze", "--logs", str(FIXTURES / "events.jsonl"),
                            "--out", str(out)]) == 0
        assert out.read_bytes() == (FIXTURES / "golden_report.json").read_bytes()

    def test_multiple_logs_accumulate(self, tmp_path):
        extra = tmp_path / "extra.jsonl"
        extra.write_text(json.dumps({
            "timestamp": "2026-02-01T09:00:00Z", "client_id": "z", "action": "search",
            "category": "all", "query": "trust",
        }) + "\n")
        out = tmp_path / "report.json"
        assert run_command(["analyze", "--logs", str(FIXTURES / "events.jsonl"),
                            "--logs", str(extra), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["session_count"] == 5
        assert report["event_count"] == 14

    def test_missing_log_is_data_error(self, tmp_path):
        assert run_command(["analyze", "--logs", str(tmp_path / "absent.jsonl"),
                            "--out", str(tmp_path / "r.json")]) == 2

    def test_invalid_depth_is_usage_error(self, tmp_path):
        assert run_command(["analyze", "--logs", str(FIXTURES / "events.jsonl"),
                            "--path-depth", "0", "--out", str(tmp_path / "r.json")]) == 1

    def test_invalid_timeout_is_usage_error(self, tmp_path):
        assert run_command(["analyze", "--logs", str(FIXTURES / "events.jsonl"),
                            "--timeout-min", "0", "--out", str(tmp_path / "r.json")]) == 1


class TestStats:
    def test_prints_corpus_and_link_counts(self, tmp_path, capsys):
        full_pipeline(tmp_path)
        capsys.readouterr()
        assert run_command(["stats", "--out", str(tmp_path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["records_by_category"] == {
            "research_data": 3, "publication": 2, "instrument_tool": 1,
            "question_variable": 0, "web_page": 0, "library_record": 0,
        }
        assert doc["pool_records"] == 1
        assert doc["link_count"] == 6
        assert doc["links_by_category_pair"] == {
            "instrument_tool|research_data": 1,
            "publication|research_data": 5,
        }


class TestExitCodes:
    def test_unknown_command_is_usage_error(self):
        assert run_command(["frobnicate"]) == 1

    def test_no_command_is_usage_error(self):
        assert run_command([]) == 1

    def test_help_exits_cleanly(self):
        assert run_command(["--help"]) == 0
        assert run_command(["links", "--help"]) == 0


class TestDeterminism:
    def test_pipeline_artifacts_are_byte_identical(self, tmp_path):
        digests = []
        for name in ("one", "two"):
            art = tmp_path / name
            full_pipeline(art)
            digests.append({
                f.name: hashlib.sha256(f.read_bytes()).hexdigest()
                for f in sorted(art.iterdir())
            })
        assert digests[0] == digests[1]
        assert set(digests[0]) == {
            "snapshot.jsonl", "snapshot_meta.json", "source_report.json",
            "links_raw.jsonl", "pool.jsonl", "links.jsonl", "link_report.json",
            "index.json.gz",
        }
