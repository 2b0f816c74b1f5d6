"""Command-line front door: synth, simulate, export-dot, serve, corpus."""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys

from . import corpus as corpus_mod
from . import documents, dot, executor, pipeline
from .defaults import data_json, default_domain
from .errors import DocumentError, SketchSynthError
from .knowledge import load_domain

EXIT_OK = 0
EXIT_SYNTH = 1
EXIT_INPUT = 2


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise DocumentError(f"{path}: {err}") from err


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_domain(args):
    if args.domain or args.lexicon:
        domain_doc = _read_json(args.domain) if args.domain else data_json("domain.json")
        lexicon_doc = _read_json(args.lexicon) if args.lexicon else data_json("lexicon.json")
        return load_domain(domain_doc, lexicon_doc)
    return default_domain()


def cmd_synth(args) -> int:
    domain = _load_domain(args)
    map_model = documents.decode_map(_read_json(args.map))
    world = documents.decode_world(_read_json(args.world))
    recordings = tuple(documents.decode_recording(_read_json(p)) for p in args.recording)
    bundle = pipeline.SessionBundle(domain, map_model, world, recordings)
    result = pipeline.synthesize(bundle)
    _write(args.out, documents.canonical_json(documents.encode_program(result.program)))
    if args.out_delta:
        _write(args.out_delta, documents.canonical_json(documents.encode_delta(result.delta)))
    if args.dot:
        _write(args.dot, dot.to_dot(result.program))
    for diag in result.diagnostics:
        print(f"note: {diag}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    domain = _load_domain(args)
    program = documents.decode_program(_read_json(args.program))
    world = documents.decode_world(_read_json(args.world))
    script = documents.decode_script(_read_json(args.script))
    log = executor.run(domain, program, world, script)
    _write(args.out, documents.canonical_json(documents.encode_log(log)))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    program = documents.decode_program(_read_json(args.program))
    _write(args.out, dot.to_dot(program))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(session_path=args.session)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_corpus(args) -> int:
    results = corpus_mod.run_corpus(update_golden=args.update_golden)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "ok  " if r.ok else "FAIL"
        line = f"{status} {r.name:<{width}} {r.scenario:<9} {r.seconds * 1000:8.1f} ms"
        if r.detail:
            line += f"  {r.detail}"
        print(line)
    times = [r.seconds for r in results if r.ok]
    passed = sum(1 for r in results if r.ok)
    print(f"{passed}/{len(results)} cases passed", end="")
    if times:
        print(f"; latency mean {statistics.mean(times) * 1000:.1f} ms, "
              f"max {max(times) * 1000:.1f} ms", end="")
    print()
    return EXIT_OK if passed == len(results) else EXIT_SYNTH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchsynth",
        description="Synthesize robot task automata from an utterance plus a sketch.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a program from recording documents")
    p.add_argument("--domain", help="domain document (default: bundled)")
    p.add_argument("--lexicon", help="lexicon document (default: bundled)")
    p.add_argument("--map", required=True, help="map document")
    p.add_argument("--world", required=True, help="world document")
    p.add_argument("--recording", required=True, nargs="+", help="recording documents, in order")
    p.add_argument("--out", default="-", help="program document output (default: stdout)")
    p.add_argument("--out-delta", help="world-delta document output")
    p.add_argument("--dot", help="also write a DOT rendering here")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("simulate", help="run a program against a scripted stimulus stream")
    p.add_argument("--domain", help="domain document (default: bundled)")
    p.add_argument("--lexicon", help="lexicon document (default: bundled)")
    p.add_argument("--program", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--out", default="-", help="log document output (default: stdout)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("export-dot", help="render a program document as DOT")
    p.add_argument("--program", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_export_dot)

    p = sub.add_parser("serve", help="run the HTTP service the authoring UI talks to")
    p.add_argument("--host", default=os.environ.get("SKETCHSYNTH_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("SKETCHSYNTH_PORT", "8675")))
    p.add_argument("--session", default=os.environ.get("SKETCHSYNTH_SESSION"),
                   help="session bundle file to load/persist")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("corpus", help="run the bundled scenario suite")
    p.add_argument("--update-golden", metavar="DIR",
                   help="write golden program documents into DIR instead of comparing")
    p.set_defaults(fn=cmd_corpus)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DocumentError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except SketchSynthError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SYNTH


if __name__ == "__main__":
    raise SystemExit(main())
