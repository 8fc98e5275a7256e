"""Command line entry points: serve, chat, ingest, validate-flows, simulate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from opendialog.config import load_config
from opendialog.errors import EngineError, FlowLoadError


def _build_engine(args):
    from opendialog.engine import Engine

    overrides = {}
    if getattr(args, "data_dir", None):
        overrides["data_dir"] = Path(args.data_dir)
    if getattr(args, "flows_dir", None):
        overrides["flows_dir"] = Path(args.flows_dir)
    config_path = Path(args.config) if getattr(args, "config", None) else None
    return Engine(load_config(config_path, overrides))


def cmd_serve(args) -> int:
    import uvicorn

    from opendialog.service import create_app

    engine = _build_engine(args)
    ui_dir = Path(args.ui_dir) if args.ui_dir else None
    app = create_app(engine, ui_dir=ui_dir)
    port = args.port or int(os.environ.get("ENGINE_PORT", "8000"))
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


def cmd_chat(args) -> int:
    engine = _build_engine(args)
    session_id = engine.create_session(seed=args.seed)
    print("Chat started. Type /quit to leave, /debug to toggle the candidate table.")
    show_debug = False
    while True:
        try:
            line = input("you> ").strip()
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        if not line:
            continue
        if line == "/quit":
            return 0
        if line == "/debug":
            show_debug = not show_debug
            print(f"debug {'on' if show_debug else 'off'}")
            continue
        result = engine.handle_turn(session_id, text=line)
        print(f"bot> {result.reply.display_text}")
        if show_debug:
            for item in sorted(result.debug["pool"],
                               key=lambda c: -c["final_confidence"]):
                marker = "*" if item["id"] == result.debug["winner_id"] else " "
                print(f"  {marker} {item['final_confidence']:.3f} "
                      f"{item['source_module']:>16}  {item['text'][:60]}")
        if result.ended:
            return 0


def cmd_ingest(args) -> int:
    from opendialog.resources import iter_jsonl, load_wordlist
    from opendialog.retrieval import IngestFilters, ingest

    config = load_config(Path(args.config) if args.config else None,
                         {"data_dir": Path(args.data_dir)} if args.data_dir else None)
    lex = config.data_dir / "lexicons"
    filters = IngestFilters(
        pronouns=load_wordlist(lex / "pronouns_third_person.txt"),
        temporal=load_wordlist(lex / "temporal_deixis.txt"),
        agreement_openers=load_wordlist(lex / "agreement_openers.txt"),
        profanity=load_wordlist(lex / "profanity.txt"),
        whitelist_ids=set(args.whitelist.split(",")) if args.whitelist else set(),
    )
    records = [record for _, record in iter_jsonl(Path(args.pack))]
    accepted, report = ingest(records, filters)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    accepted_path = out_dir / "accepted.jsonl"
    with accepted_path.open("w", encoding="utf-8") as fh:
        for item in accepted:
            fh.write(json.dumps({
                "id": item.id, "text": item.text, "kind": item.kind,
                "topic": item.topic, "entities": list(item.entities),
                "dialogue_act": item.dialogue_act.value,
                "intimacy_level": item.intimacy_level,
                "safe": item.safe, "source": item.source,
            }) + "\n")
    report_path = out_dir / "rejections.jsonl"
    with report_path.open("w", encoding="utf-8") as fh:
        for entry in report:
            fh.write(json.dumps(entry) + "\n")
    print(f"accepted {len(accepted)} item(s) -> {accepted_path}")
    print(f"rejected {len(report)} item(s) -> {report_path}")
    return 0


def cmd_validate_flows(args) -> int:
    from opendialog.flows import build_default_registry, load_flow
    from opendialog.resources import load_json

    config = load_config(Path(args.config) if args.config else None)
    nutrition = load_json(config.data_dir / "packs" / "nutrition_arguments.json")
    registry = build_default_registry(nutrition.get("facts", []))

    directory = Path(args.directory) if args.directory else config.flows_dir
    failures = 0
    seen: set[str] = set()
    for path in sorted(directory.glob("*.json")):
        try:
            flow = load_flow(path, registry)
            if flow.id in seen:
                raise FlowLoadError(f"{path.name}: duplicate flow id {flow.id!r}",
                                    rule="duplicate-id")
            seen.add(flow.id)
        except FlowLoadError as exc:
            failures += 1
            print(f"FAIL {path.name}: [{exc.rule}] {exc}")
        else:
            print(f"ok   {path.name} ({len(flow.nodes)} nodes)")
    print(f"{len(seen)} valid flow(s), {failures} failure(s)")
    return 1 if failures else 0


def cmd_simulate(args) -> int:
    engine = _build_engine(args)
    try:
        transcript = engine.simulate_file(Path(args.script), seed=args.seed)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    output = json.dumps(transcript, indent=None if args.compact else 2, sort_keys=True)
    print(output)
    if transcript["failures"]:
        for failure in transcript["failures"]:
            print(f"assertion failed at line {failure['line']}: {failure['failure']}",
                  file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opendialog",
                                     description="Open-domain dialogue engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file (or $ENGINE_CONFIG)")
        p.add_argument("--data-dir", help="resource directory (or $ENGINE_DATA_DIR)")
        p.add_argument("--flows-dir", help="flow files directory")

    p = sub.add_parser("serve", help="run the HTTP API")
    common(p)
    p.add_argument("--port", type=int, default=None, help="port (or $ENGINE_PORT)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="static chat UI bundle to mount at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("chat", help="interactive REPL")
    common(p)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("ingest", help="filter a raw content pack")
    p.add_argument("--pack", required=True, help="JSON-lines input pack")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--whitelist", help="comma-separated dialogue_turn ids to keep")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--data-dir", help="resource directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate-flows", help="validate every flow file in a directory")
    p.add_argument("directory", nargs="?", help="flow directory (default: configured)")
    p.add_argument("--config", help="key=value config file")
    p.set_defaults(func=cmd_validate_flows)

    p = sub.add_parser("simulate", help="run a scripted session")
    common(p)
    p.add_argument("script", help="script file: one utterance or JSON object per line")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--compact", action="store_true", help="single-line JSON output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
