"""CLI wiring: exit codes, outputs, offline demo defaults."""

import json

import pytest

from docrelay.service.cli import build_parser, bundled_data_path, main

from support import scenario_markdown


def write_script(tmp_path, *rules) -> str:
    path = tmp_path / "script.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rules) + "\n",
                    encoding="utf-8")
    return str(path)


class TestScenarioCommand:
    def test_bundled_demo_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "out.csv"
        xlsx = tmp_path / "out.xlsx"
        code = main(["scenario", "--fsd", str(bundled_data_path("sample_fsd.md")),
                     "--section", "Password", "--lang", "en",
                     "--out", str(out), "--xlsx", str(xlsx)])
        assert code == 0
        assert out.read_bytes().startswith(b"Title,")
        assert xlsx.read_bytes()[:4] == b"PK\x03\x04"
        assert "completed successfully" in capsys.readouterr().out

    def test_missing_section_is_domain_error(self, tmp_path, capsys):
        code = main(["scenario", "--fsd", str(bundled_data_path("sample_fsd.md")),
                     "--section", "Billing", "--lang", "en",
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "chapter not found" in capsys.readouterr().err

    def test_json_output(self, tmp_path, capsys):
        out = tmp_path / "out.csv"
        code = main(["--json", "scenario",
                     "--fsd", str(bundled_data_path("sample_fsd.md")),
                     "--section", "Password", "--lang", "en",
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "done"
        assert payload["files"] == [str(out)]


class TestQueryCommands:
    def test_query_without_text_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["query"])
        assert excinfo.value.code == 2

    def test_trace_on_empty_store_prints_notice(self, capsys):
        code = main(["trace", "password requirement"])
        assert code == 0
        assert "not found" in capsys.readouterr().out

    def test_query_json_structure(self, capsys):
        code = main(["--json", "query", "--mode", "qa", "is 2FA required?"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["results"][0]["report"]["answerable"] is False

    def test_query_with_custom_script_and_store(self, tmp_path, capsys):
        store_dir = tmp_path / "store"
        body = tmp_path / "doc.txt"
        body.write_text("two factor authentication is mandatory for admins",
                        encoding="utf-8")
        assert main(["--store", str(store_dir), "ingest", "--doc-id", "auth",
                     "--title", "Auth Spec", "--file", str(body),
                     "--meta", "project=apollo"]) == 0
        script = write_script(
            tmp_path,
            {"role": "qa-judge", "reply": "JUDGMENT: KEEP"},
            {"role": "qa-answerer", "reply": "ANSWER: Yes, for admins."},
            {"role": "qa-aggregator", "reply": "Yes, for admins."},
        )
        capsys.readouterr()
        code = main(["--store", str(store_dir), "--script", script,
                     "query", "--mode", "qa", "is 2FA mandatory?"])
        assert code == 0
        assert "Yes, for admins." in capsys.readouterr().out


class TestIngestCommand:
    def test_ingest_versions_increment(self, tmp_path, capsys):
        store_dir = str(tmp_path / "store")
        body = tmp_path / "b.txt"
        body.write_text("first body", encoding="utf-8")
        assert main(["--store", store_dir, "ingest", "--doc-id", "d",
                     "--title", "T", "--file", str(body)]) == 0
        assert "version 1" in capsys.readouterr().out
        body.write_text("second body", encoding="utf-8")
        assert main(["--store", store_dir, "ingest", "--doc-id", "d",
                     "--title", "T", "--file", str(body)]) == 0
        assert "version 2" in capsys.readouterr().out

    def test_bad_meta_is_usage_error(self, tmp_path, capsys):
        body = tmp_path / "b.txt"
        body.write_text("x", encoding="utf-8")
        code = main(["ingest", "--doc-id", "d", "--title", "T",
                     "--file", str(body), "--meta", "notkeyvalue"])
        assert code == 2


class TestConfigFile:
    def test_config_file_values_used(self, tmp_path, capsys):
        config = tmp_path / "docrelay.conf"
        config.write_text("# demo config\nbackend = scripted\n"
                          f"store_path = {tmp_path / 'store'}\n"
                          "top_k = 5\n", encoding="utf-8")
        code = main(["--config", str(config), "--json", "query",
                     "--mode", "qa", "anything"])
        assert code == 0

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        config = tmp_path / "bad.conf"
        config.write_text("wibble = 3\n", encoding="utf-8")
        assert main(["--config", str(config), "query", "x"]) == 2
        assert "unknown config key" in capsys.readouterr().err


def test_parser_has_all_subcommands():
    parser = build_parser()
    text = parser.format_help()
    for name in ("ingest", "query", "trace", "read", "scenario", "serve"):
        assert name in text
