"""Command-line driver for the pipeline stages and the QA service."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, OutputExists, SlicError
from .pipeline import (
    AwaitingDecisions,
    StageError,
    load_config,
    run_pipeline,
    stage_factorize,
    stage_graph,
    stage_index,
    stage_ingest,
    stage_prune,
    write_manifest,
)

EXIT_CONFIG = 2
EXIT_EXISTS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slic",
        description="Build a domain corpus, topic model, knowledge graph and "
        "vector store, then answer questions over them.",
    )
    parser.add_argument("command", choices=["run", "ingest", "prune", "factorize", "graph", "index", "ask", "serve"])
    parser.add_argument("--config", required=True, help="path to the pipeline JSON config")
    parser.add_argument("--seed", type=int, default=None, help="override the configured seed")
    parser.add_argument("--auto-keep", action="store_true", help="keep every review cluster (non-interactive)")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("--question", help="question text for the ask command")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            manifest = run_pipeline(config, auto_keep=args.auto_keep, force=args.force)
            print(json.dumps(manifest, indent=2, sort_keys=True))
        elif args.command == "ingest":
            corpus = stage_ingest(config)
            print(f"assembled {len(corpus)} documents")
        elif args.command == "prune":
            corpus = stage_prune(config, auto_keep=args.auto_keep)
            print(f"pruned corpus has {len(corpus)} documents")
        elif args.command == "factorize":
            corpus, topics = stage_factorize(config)
            print(f"{len(topics)} topics over {len(corpus)} documents")
        elif args.command == "graph":
            stage_graph(config)
            print("graph triplets written")
        elif args.command == "index":
            stage_index(config)
            write_manifest(config)
            print("vector store written")
        elif args.command == "ask":
            if not args.question:
                print("ask requires --question", file=sys.stderr)
                return EXIT_CONFIG
            from .rag.orchestrator import answer_question
            from .server import ServiceState

            state = ServiceState(config)
            answer = answer_question(args.question, state.system)
            print(json.dumps(answer.to_dict(), indent=2, ensure_ascii=False))
        elif args.command == "serve":
            from .server import serve

            serve(config)
    except OutputExists as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_EXISTS
    except AwaitingDecisions as exc:
        print(str(exc), file=sys.stderr)
        return 0
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        print(json.dumps(exc.partial_manifest, indent=2, sort_keys=True), file=sys.stderr)
        return 1
    except SlicError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
