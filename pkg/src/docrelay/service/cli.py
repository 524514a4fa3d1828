"""Command-line interface.

Subcommands: ingest, query (--mode), trace, read, scenario, serve. Exit
codes: 0 success, 1 domain error, 2 usage error. --json switches output to
machine-readable JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, DocRelayError
from ..gateway import HttpBackend, ModelGateway, ScriptedBackend
from ..retrieval.runner import MODES, answer_query
from ..scenario.pipeline import ScenarioJobConfig, run_scenario_job
from ..store import DocumentStore
from .config import ServiceConfig, build_config

logger = logging.getLogger(__name__)

SAMPLE_FSD = "sample_fsd.md"
SAMPLE_SCRIPT = "sample_script.jsonl"


def bundled_data_path(name: str) -> Path:
    return Path(str(resources.files("docrelay").joinpath("data", name)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docrelay",
        description="Agent pipelines for software-engineering documents: "
                    "test scenario generation and versioned document retrieval.")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--store", help="document store directory")
    parser.add_argument("--backend", choices=["scripted", "http"],
                        help="model backend (default: scripted)")
    parser.add_argument("--script", help="JSONL script for the scripted backend")
    parser.add_argument("--json", action="store_true", help="JSON output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="add a document version to the store")
    p.add_argument("--doc-id", required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--file", required=True, help="UTF-8 body file")
    p.add_argument("--meta", action="append", default=[], metavar="KEY=VALUE")

    p = sub.add_parser("query", help="run a retrieval query")
    p.add_argument("text")
    p.add_argument("--mode", choices=list(MODES), default="auto")

    p = sub.add_parser("trace", help="trace a requirement across versions")
    p.add_argument("text")

    p = sub.add_parser("read", help="read one long document for a query")
    p.add_argument("text")

    p = sub.add_parser("scenario", help="generate a test scenario spreadsheet")
    p.add_argument("--fsd", required=True, help="FSD text/markdown file")
    p.add_argument("--section", required=True)
    p.add_argument("--lang", help="target language tag or name")
    p.add_argument("--images", help="sidecar directory with referenced images")
    p.add_argument("--out", default="scenario.csv", help="CSV output path")
    p.add_argument("--xlsx", help="also write the XLSX twin here")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--frontend", help="static console directory to serve at /")

    return parser


def make_gateway(config: ServiceConfig) -> ModelGateway:
    if config.backend == "http":
        return ModelGateway(backend=HttpBackend())
    script = config.script_path or str(bundled_data_path(SAMPLE_SCRIPT))
    if config.script_path is None:
        logger.info("no --script given; using the bundled demo script")
    return ModelGateway(backend=ScriptedBackend.from_jsonl(script))


def open_store(config: ServiceConfig) -> DocumentStore:
    if config.store_path and Path(config.store_path).exists():
        return DocumentStore.load_from_dir(config.store_path,
                                           chunk_budget=config.chunk_budget)
    return DocumentStore(chunk_budget=config.chunk_budget)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = build_config(args.config, store_path=args.store,
                              backend=args.backend, script_path=args.script)
        return _dispatch(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DocRelayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace, config: ServiceConfig) -> int:
    if args.command == "ingest":
        return _cmd_ingest(args, config)
    if args.command in ("query", "trace", "read"):
        return _cmd_query(args, config)
    if args.command == "scenario":
        return _cmd_scenario(args, config)
    return _cmd_serve(args, config)


def _cmd_ingest(args: argparse.Namespace, config: ServiceConfig) -> int:
    metadata = {}
    for item in args.meta:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: --meta expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        metadata[key.strip()] = value.strip()
    store = open_store(config)
    record = store.ingest_version(
        doc_id=args.doc_id, title=args.title,
        body=Path(args.file).read_text(encoding="utf-8"), metadata=metadata)
    if config.store_path:
        store.save_to_dir(config.store_path)
    payload = {"doc_id": record.doc_id, "version_no": record.version_no}
    print(json.dumps(payload) if args.json
          else f"ingested {record.doc_id} version {record.version_no}")
    return 0


def _cmd_query(args: argparse.Namespace, config: ServiceConfig) -> int:
    mode = args.mode if args.command == "query" else args.command
    gateway = make_gateway(config)
    store = open_store(config)
    response = answer_query(gateway, store, args.text, mode=mode,
                            config=config.retrieval_config())
    if args.json:
        print(json.dumps(response.to_json_dict(), ensure_ascii=False, indent=2))
    else:
        print(response.text)
    return 0


def _cmd_scenario(args: argparse.Namespace, config: ServiceConfig) -> int:
    gateway = make_gateway(config)
    fsd_text = Path(args.fsd).read_text(encoding="utf-8")
    prompt = f"Please create a test scenario based on section {args.section}."
    result = run_scenario_job(
        gateway, fsd_text, prompt, images=args.images,
        config=ScenarioJobConfig(section=args.section, target_language=args.lang,
                                 engine=config.engine_config()),
        source_name=Path(args.fsd).name, declared_order=config.order)
    if result.status != "done" or result.csv_bytes is None:
        print(f"error: scenario job aborted: {result.diagnostic}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.write_bytes(result.csv_bytes)
    written = [str(out)]
    if args.xlsx and result.xlsx_bytes is not None:
        Path(args.xlsx).write_bytes(result.xlsx_bytes)
        written.append(args.xlsx)
    if args.json:
        print(json.dumps({"status": result.status, "files": written,
                          "final_text": result.final_text}, ensure_ascii=False))
    else:
        print(result.final_text)
        for path in written:
            print(f"wrote {path}")
    return 0


def _cmd_serve(args: argparse.Namespace, config: ServiceConfig) -> int:
    import uvicorn

    from .http import create_app

    host = args.host or config.host
    port = args.port or config.port
    app = create_app(open_store(config), make_gateway(config), config=config,
                     frontend_dir=args.frontend)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
