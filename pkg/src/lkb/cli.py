"""Operator command line.

Every subcommand drives the same store methods the HTTP service uses, so
--json output is identical to the corresponding endpoint's response
body. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import LkbError
from .store import CorpusStore

_FORMAT_BY_SUFFIX = {".csv": "csv", ".md": "markdown", ".markdown": "markdown"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the CLI contract wants 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_shared_flags(parser: argparse.ArgumentParser, top_level: bool) -> None:
    # Present on the top-level parser and on every subcommand, so flags
    # work in either position. SUPPRESS keeps a subcommand's defaults
    # from wiping values already parsed at the top level.
    default = None if top_level else argparse.SUPPRESS
    json_default = False if top_level else argparse.SUPPRESS
    parser.add_argument("--config", default=default, help="path to a key=value config file")
    parser.add_argument("--data-dir", default=default, help="override data.dir")
    parser.add_argument(
        "--json", action="store_true", default=json_default,
        help="machine-readable output",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="lkb", description="Local knowledge base retrieval engine")
    _add_shared_flags(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="load and index documents")
    ingest.add_argument("paths", nargs="+", metavar="path")
    ingest.add_argument("--format", choices=("plain-text", "markdown", "csv"))
    ingest.add_argument("--chunk-size", type=int)
    ingest.add_argument("--overlap", type=int)

    search = sub.add_parser("search", help="retrieve chunks for a query")
    search.add_argument("query")
    search.add_argument("--k", type=int)
    search.add_argument("--mode", choices=("flat", "ivf", "ivfpq"))
    search.add_argument("--nprobe", type=int)

    ask = sub.add_parser("ask", help="retrieve, build the prompt, and ask the LLM")
    ask.add_argument("query")
    ask.add_argument("--k", type=int)
    ask.add_argument("--budget", type=int)
    ask.add_argument("--mock-llm", action="store_true", help="force the deterministic mock")

    index = sub.add_parser("index", help="index maintenance")
    index_sub = index.add_subparsers(dest="index_command", required=True)
    rebuild = index_sub.add_parser("rebuild", help="retrain the index from stored vectors")
    rebuild.add_argument("--mode", choices=("flat", "ivf", "ivfpq"), default="ivf")
    rebuild.add_argument("--nlist", type=int)
    rebuild.add_argument("--m", dest="pq_m", type=int)
    rebuild.add_argument("--bits", dest="pq_bits", type=int)
    stats = index_sub.add_parser("stats", help="show index statistics")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)

    for command in (ingest, search, ask, rebuild, stats, serve):
        _add_shared_flags(command, top_level=False)

    return parser


def _make_store(args) -> CorpusStore:
    overrides: dict[str, str] = {}
    if args.data_dir:
        overrides["data.dir"] = args.data_dir
    if getattr(args, "chunk_size", None) is not None:
        overrides["splitter.chunk_size"] = str(args.chunk_size)
    if getattr(args, "overlap", None) is not None:
        overrides["splitter.overlap"] = str(args.overlap)
    config = load_config(path=args.config, overrides=overrides)
    return CorpusStore(config)


def _emit(payload: dict, as_json: bool, human) -> None:
    if as_json:
        print(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
    else:
        human(payload)


def _cmd_ingest(args) -> int:
    store = _make_store(args)
    results = []
    for raw_path in args.paths:
        path = Path(raw_path)
        if not path.is_file():
            print(f"error: no such file: {raw_path}", file=sys.stderr)
            return 2
        format = args.format or _FORMAT_BY_SUFFIX.get(path.suffix.lower(), "plain-text")
        doc, chunk_count, created = store.ingest(path.read_bytes(), format, str(path))
        results.append(
            {"doc_id": doc.doc_id, "chunk_count": chunk_count, "created": created}
        )

    def human(payload):
        for entry in payload["documents"]:
            note = "" if entry["created"] else " (already ingested)"
            print(f"{entry['doc_id']}  chunks={entry['chunk_count']}{note}")

    _emit({"documents": results}, args.json, human)
    return 0


def _cmd_search(args) -> int:
    store = _make_store(args)
    payload = store.query_payload(args.query, k=args.k, mode=args.mode, nprobe=args.nprobe)

    def human(body):
        for hit in body["hits"]:
            preview = hit["text"][:72].replace("\n", " ")
            print(f"{hit['score']:+.4f}  {hit['chunk_id']}  {preview}")
        if not body["hits"]:
            print("no hits")

    _emit(payload, args.json, human)
    return 0


def _cmd_ask(args) -> int:
    store = _make_store(args)
    payload = store.ask_payload(
        args.query, k=args.k, budget=args.budget, force_mock=args.mock_llm
    )

    def human(body):
        print(body["answer"])
        print()
        print(f"model: {body['model_id']}  prompt_chars: {body['prompt_chars']}"
              f"  truncated: {body['truncated']}")
        for hit in body["hits"]:
            print(f"  {hit['score']:+.4f}  {hit['chunk_id']}  ({hit['doc_id']})")

    _emit(payload, args.json, human)
    return 0


def _cmd_index(args) -> int:
    store = _make_store(args)
    if args.index_command == "rebuild":
        payload = store.rebuild(
            args.mode, nlist=args.nlist, pq_m=args.pq_m, pq_bits=args.pq_bits
        )
    else:
        payload = store.index_stats()

    def human(body):
        print(f"kind: {body['kind']}  vectors: {body['vectors']}  docs: {body['docs']}")
        sizes = body["list_sizes"]
        if body["nlist"] is not None and sizes:
            print(f"nlist: {body['nlist']}  list sizes: min={min(sizes)} "
                  f"max={max(sizes)} total={sum(sizes)}")

    _emit(payload, args.json, human)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = _make_store(args)
    host = args.host or str(store.config["listen.host"])
    port = args.port or int(store.config["listen.port"])
    uvicorn.run(create_app(store), host=host, port=port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "ingest": _cmd_ingest,
        "search": _cmd_search,
        "ask": _cmd_ask,
        "index": _cmd_index,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (LkbError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
