"""Codecs for the document types exchanged on disk and over the API.

Every document is JSON with a ``format_version`` field. Decoding is strict:
unknown fields are rejected so typos surface instead of being ignored.
Encoding is canonical (sorted keys, fixed separators, trailing newline) so
identical values always produce byte-identical documents.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from . import assembler, executor, geomap, knowledge, language, planner
from .errors import DocumentError, SketchSynthError

FORMAT_VERSION = "1"


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _require(doc: Mapping, keys: set[str], optional: set[str], what: str) -> None:
    if not isinstance(doc, Mapping):
        raise DocumentError(f"{what}: expected an object")
    missing = keys - set(doc)
    if missing:
        raise DocumentError(f"{what}: missing fields {sorted(missing)}")
    unknown = set(doc) - keys - optional
    if unknown:
        raise DocumentError(f"{what}: unknown fields {sorted(unknown)}")
    if "format_version" in keys and str(doc["format_version"]) != FORMAT_VERSION:
        raise DocumentError(f"{what}: unsupported format_version {doc['format_version']!r}")


# ---------------------------------------------------------------------------
# Map documents
# ---------------------------------------------------------------------------


def decode_map(doc: Mapping) -> geomap.MapModel:
    _require(doc, {"format_version", "regions"}, {"frame", "icons"}, "map document")
    regions = []
    for r in doc["regions"]:
        _require(r, {"id", "polygon"}, {"label"}, "map region")
        polygon = tuple((float(x), float(y)) for x, y in r["polygon"])
        regions.append(geomap.Region(r["id"], r.get("label", r["id"]), polygon))
    icons = []
    for icon in doc.get("icons", []):
        _require(icon, {"entity", "point"}, set(), "map icon")
        icons.append((icon["entity"], (float(icon["point"][0]), float(icon["point"][1]))))
    return geomap.MapModel(tuple(regions), tuple(icons))


def encode_map(map_model: geomap.MapModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "frame": {"units": "meters"},
        "regions": [
            {"id": r.id, "label": r.label, "polygon": [[x, y] for x, y in r.polygon]}
            for r in map_model.regions
        ],
        "icons": [
            {"entity": eid, "point": [p[0], p[1]]} for eid, p in map_model.icons
        ],
    }


# ---------------------------------------------------------------------------
# World documents
# ---------------------------------------------------------------------------


def decode_world(doc: Mapping) -> knowledge.World:
    _require(doc, {"format_version", "regions", "robot_at"}, {"entities"}, "world document")
    entities = []
    for e in doc.get("entities", []):
        _require(e, {"id", "type", "location"}, {"provenance", "units"}, "world entity")
        provenance = e.get("provenance", "user")
        if provenance not in ("user", "synthesized"):
            raise DocumentError(f"world entity {e['id']!r}: bad provenance {provenance!r}")
        units = int(e.get("units", 1))
        if units < 1:
            raise DocumentError(f"world entity {e['id']!r}: units must be >= 1")
        entities.append(knowledge.EntityRecord(e["id"], e["type"], e["location"], provenance, units))
    world = knowledge.World(
        regions=frozenset(doc["regions"]),
        entities=tuple(entities),
        robot_at=doc["robot_at"],
    )
    ids = [r.id for r in world.entities]
    if len(ids) != len(set(ids)):
        raise DocumentError("world document: duplicate entity ids")
    for rec in world.entities:
        if not world.has_location(rec.location):
            raise DocumentError(f"world entity {rec.id!r}: unknown location {rec.location!r}")
        world.region_of(rec.id)  # raises on containment cycles
    if not world.has_location(world.robot_at):
        raise DocumentError(f"world document: unknown robot_at {world.robot_at!r}")
    return world


def encode_world(world: knowledge.World) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "regions": sorted(world.regions),
        "entities": [
            {"id": r.id, "type": r.type, "location": r.location,
             "provenance": r.provenance, "units": r.units}
            for r in sorted(world.entities, key=lambda r: r.id)
        ],
        "robot_at": world.robot_at,
    }


# ---------------------------------------------------------------------------
# Commands (shared by several documents)
# ---------------------------------------------------------------------------


def decode_command(doc: Mapping) -> knowledge.Command:
    _require(doc, {"schema"}, {"args"}, "command")
    args = []
    for a in doc.get("args", []):
        _require(a, {"kind"}, {"id", "text", "category", "type"}, "command arg")
        kind = a["kind"]
        if kind == "entity":
            args.append(knowledge.EntityArg(a["id"]))
        elif kind == "region":
            args.append(knowledge.RegionArg(a["id"]))
        elif kind == "text":
            args.append(knowledge.TextArg(a["text"]))
        elif kind == "hole":
            args.append(knowledge.Hole(a.get("category"), a.get("type")))
        else:
            raise DocumentError(f"command arg: unknown kind {kind!r}")
    return knowledge.Command(doc["schema"], tuple(args))


def encode_command(command: knowledge.Command) -> dict:
    args = []
    for a in command.args:
        if isinstance(a, knowledge.EntityArg):
            args.append({"kind": "entity", "id": a.id})
        elif isinstance(a, knowledge.RegionArg):
            args.append({"kind": "region", "id": a.id})
        elif isinstance(a, knowledge.TextArg):
            args.append({"kind": "text", "text": a.text})
        else:
            entry: dict[str, Any] = {"kind": "hole"}
            if a.category:
                entry["category"] = a.category
            if a.type_name:
                entry["type"] = a.type_name
            args.append(entry)
    doc: dict[str, Any] = {"schema": command.schema}
    if args:
        doc["args"] = args
    return doc


# ---------------------------------------------------------------------------
# Recording documents
# ---------------------------------------------------------------------------


def decode_recording(doc: Mapping):
    from .pipeline import Recording  # circular import at module load otherwise

    _require(doc, {"format_version", "id", "utterance", "sketch"}, {"attach"}, "recording document")
    sk = doc["sketch"]
    _require(sk, {"points"}, set(), "recording sketch")
    points = tuple((float(p[0]), float(p[1]), float(p[2])) for p in sk["points"])
    attach = None
    if doc.get("attach") is not None:
        _require(doc["attach"], {"host"}, {"region"}, "recording attachment")
        attach = (doc["attach"]["host"], doc["attach"].get("region"))
    try:
        sketch = geomap.Sketch(points)
    except SketchSynthError as err:
        raise DocumentError(f"recording sketch: {err}") from err
    return Recording(
        id=doc["id"],
        utterance=language.Utterance.from_text(doc["utterance"]),
        sketch=sketch,
        attach=attach,
    )


def encode_recording(recording) -> dict:
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "id": recording.id,
        "utterance": recording.utterance.text,
        "sketch": {"points": [[x, y, t] for x, y, t in recording.sketch.points]},
    }
    if recording.attach is not None:
        host, region = recording.attach
        attach: dict[str, Any] = {"host": host}
        if region is not None:
            attach["region"] = region
        doc["attach"] = attach
    return doc


# ---------------------------------------------------------------------------
# Trace serialization (canonical text, used for goldens and tie-breaking)
# ---------------------------------------------------------------------------


def trace_to_text(trace: planner.Trace) -> str:
    lines = []
    for i, step in enumerate(trace.steps):
        if i == 0:
            lines.append(step.action.token())
        else:
            event = step.event.token() if step.event is not None else "."
            lines.append(f"{event} -> {step.action.token()}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Program documents
# ---------------------------------------------------------------------------


def encode_program(program: assembler.Program) -> dict:
    states = [
        {"id": s.id, "action": encode_command(s.action), "location": s.location}
        for s in program.states
    ]
    transitions = []
    for t in program.transitions:
        label: dict[str, Any] = {"kind": t.label.kind}
        if t.label.event is not None:
            label["event"] = encode_command(t.label.event)
        if t.label.guard:
            label["guard"] = [p.text() for p in t.label.guard]
        transitions.append({"src": t.src, "label": label, "dst": t.dst})
    return {
        "format_version": FORMAT_VERSION,
        "initial": program.initial,
        "states": states,
        "transitions": transitions,
        "diagnostics": list(program.diagnostics),
    }


def decode_program(doc: Mapping) -> assembler.Program:
    _require(doc, {"format_version", "initial", "states", "transitions"},
             {"diagnostics"}, "program document")
    states = []
    for s in doc["states"]:
        _require(s, {"id", "action"}, {"location"}, "program state")
        states.append(assembler.State(s["id"], decode_command(s["action"]), s.get("location")))
    transitions = []
    for t in doc["transitions"]:
        _require(t, {"src", "label", "dst"}, set(), "program transition")
        label_doc = t["label"]
        _require(label_doc, {"kind"}, {"event", "guard"}, "transition label")
        kind = label_doc["kind"]
        if kind not in ("event", "epsilon", "guarded", "exit"):
            raise DocumentError(f"transition label: unknown kind {kind!r}")
        event = decode_command(label_doc["event"]) if "event" in label_doc else None
        guard = tuple(knowledge.Predicate.parse(p) for p in label_doc.get("guard", []))
        transitions.append(assembler.Transition(
            t["src"], assembler.Label(kind, event, guard), t["dst"]))
    program = assembler.Program(
        states=tuple(states),
        transitions=tuple(transitions),
        initial=doc["initial"],
        diagnostics=tuple(doc.get("diagnostics", [])),
    )
    known = {s.id for s in program.states}
    for t in program.transitions:
        if t.src not in known or (t.dst is not None and t.dst not in known):
            raise DocumentError(f"program transition references unknown state: {t}")
    if program.initial not in known:
        raise DocumentError(f"program initial state {program.initial!r} is unknown")
    return program


# ---------------------------------------------------------------------------
# Script and log documents
# ---------------------------------------------------------------------------


def decode_script(doc: Mapping) -> executor.Script:
    _require(doc, {"format_version", "stimuli"}, set(), "script document")
    stimuli = []
    for s in doc["stimuli"]:
        _require(s, {"kind"}, {"schema", "args"}, "script stimulus")
        if s["kind"] == "tick":
            stimuli.append(executor.TICK)
        elif s["kind"] == "event":
            stimuli.append(decode_command({"schema": s["schema"], "args": s.get("args", [])}))
        else:
            raise DocumentError(f"script stimulus: unknown kind {s['kind']!r}")
    return executor.Script(tuple(stimuli))


def encode_script(script: executor.Script) -> dict:
    stimuli: list[dict] = []
    for s in script.stimuli:
        if s is executor.TICK:
            stimuli.append({"kind": "tick"})
        else:
            cmd = encode_command(s)
            stimuli.append({"kind": "event", "schema": cmd["schema"], "args": cmd.get("args", [])})
    return {"format_version": FORMAT_VERSION, "stimuli": stimuli}


def encode_log(log) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "entries": [encode_command(cmd) for cmd in log],
    }


def decode_log(doc: Mapping) -> list[knowledge.Command]:
    _require(doc, {"format_version", "entries"}, set(), "log document")
    return [decode_command(e) for e in doc["entries"]]


# ---------------------------------------------------------------------------
# World-delta documents
# ---------------------------------------------------------------------------


def encode_delta(delta: planner.WorldDelta) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "insertions": [
            {"type": t, "location": loc, "id": eid}
            for t, loc, eid in delta.insertions
        ],
    }


def decode_delta(doc: Mapping) -> planner.WorldDelta:
    _require(doc, {"format_version", "insertions"}, set(), "delta document")
    insertions = []
    for ins in doc["insertions"]:
        _require(ins, {"type", "location", "id"}, set(), "delta insertion")
        insertions.append((ins["type"], ins["location"], ins["id"]))
    return planner.WorldDelta(tuple(insertions))


# ---------------------------------------------------------------------------
# Session documents (one bundle on disk)
# ---------------------------------------------------------------------------


def encode_session(bundle) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "map": encode_map(bundle.map_model),
        "world": encode_world(bundle.world),
        "recordings": [encode_recording(r) for r in bundle.recordings],
        "delta": encode_delta(bundle.delta),
        "diagnostics": list(bundle.diagnostics),
    }
    if bundle.program is not None:
        doc["program"] = encode_program(bundle.program)
    return doc


def decode_session(doc: Mapping, domain):
    from .pipeline import SessionBundle

    _require(doc, {"format_version", "map", "world", "recordings"},
             {"program", "delta", "diagnostics"}, "session document")
    return SessionBundle(
        domain=domain,
        map_model=decode_map(doc["map"]),
        world=decode_world(doc["world"]),
        recordings=tuple(decode_recording(r) for r in doc["recordings"]),
        program=decode_program(doc["program"]) if "program" in doc else None,
        diagnostics=tuple(doc.get("diagnostics", [])),
        delta=decode_delta(doc["delta"]) if "delta" in doc else planner.WorldDelta(),
    )
