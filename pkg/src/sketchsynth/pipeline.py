"""End-to-end synthesis: recordings in, program out.

Each recording is parsed (utterance and sketch), loop-extended, planned, and
folded; later recordings attach as branches at a region of an earlier sketch.
Synthesis is atomic: any failure raises with the recording id and stage, and
the caller's bundle keeps its previous program.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import assembler, geomap, language, planner
from .assembler import AttachmentPoint, Program
from .errors import SketchSynthError, SynthesisError
from .geomap import MapModel, Sketch
from .knowledge import Domain, World, world_insert
from .language import Utterance
from .planner import Trace, WorldDelta


@dataclass(frozen=True)
class Recording:
    id: str
    utterance: Utterance
    sketch: Sketch
    attach: Optional[tuple[str, Optional[str]]] = None  # (host recording, region)


@dataclass(frozen=True)
class SessionBundle:
    domain: Domain
    map_model: MapModel
    world: World
    recordings: tuple[Recording, ...] = ()
    program: Optional[Program] = None
    diagnostics: tuple[str, ...] = ()
    delta: WorldDelta = WorldDelta()
    traces: tuple[tuple[str, Trace], ...] = ()  # per recording, for regression


def synthesize(bundle: SessionBundle) -> SessionBundle:
    """Re-synthesize the whole session from its recordings, in order."""
    if not bundle.recordings:
        raise SynthesisError("-", "validate", SketchSynthError("no recordings"))
    domain = bundle.domain
    world = bundle.world
    program: Optional[Program] = None
    diagnostics: list[str] = []
    insertions: tuple = ()
    traces: list[tuple[str, Trace]] = []
    sketch_info: dict[str, tuple[Optional[str], tuple[str, ...]]] = {}
    attach_specs: list[assembler.AttachSpec] = []

    for index, recording in enumerate(bundle.recordings):
        attached = recording.attach is not None
        if index == 0 and attached:
            raise SynthesisError(recording.id, "validate",
                                 SketchSynthError("first recording cannot be attached"))
        if index > 0 and not attached:
            raise SynthesisError(recording.id, "validate",
                                 SketchSynthError("later recordings must attach to one"))

        def stage(name, fn, *args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except SketchSynthError as err:
                raise SynthesisError(recording.id, name, err) from err

        cores = stage("parse_utterance", language.parse_utterance,
                      domain, world, recording.utterance, diagnostics)
        seq = stage("parse_sketch", geomap.parse_sketch,
                    bundle.map_model, recording.sketch, attached)

        attach_point = None
        if attached:
            host_id, explicit_region = recording.attach
            region = explicit_region or seq.attachment
            stage("validate_attachment", _validate_attachment,
                  sketch_info, host_id, region)
            attach_point = AttachmentPoint(region, host_id)

        first_region = seq.attachment if attached else _first_region(
            bundle.map_model, recording.sketch)
        sketch_info[recording.id] = (first_region, seq.regions)

        seq, loop = stage("detect_and_extend", assembler.detect_and_extend,
                          seq, diagnostics)

        plan_world = world
        if attach_point is not None:
            plan_world = replace(world, robot_at=attach_point.region)
        trace, delta = stage("plan_trace", planner.plan_trace,
                             domain, plan_world, cores, seq, loop)
        traces.append((recording.id, trace))

        folded_world = _apply_delta(domain, plan_world, delta)
        piece = stage("fold", assembler.fold, trace, loop, domain, folded_world)

        if program is None:
            program = piece
        else:
            gate = trace.steps[1].event if len(trace.steps) > 1 else None
            guard = () if gate is not None else assembler.branch_guard(trace)
            session_view = _apply_delta(domain, world, delta)
            program, spec = stage("attach", assembler.attach_program,
                                  program, piece, attach_point, gate,
                                  session_view, guard)
            if spec is not None:
                attach_specs.append(spec)

        world = _apply_delta(domain, world, delta)
        insertions += delta.insertions

    # branches grafted later must also arm the entries of earlier ones
    program = assembler.apply_attachments(program, attach_specs, world)
    structure_notes = assembler.check_determinism(program)
    program = replace(program, diagnostics=program.diagnostics + tuple(structure_notes))
    diagnostics.extend(structure_notes)
    return replace(
        bundle,
        world=world,
        program=program,
        diagnostics=tuple(diagnostics),
        delta=WorldDelta(insertions),
        traces=tuple(traces),
    )


def _first_region(map_model: MapModel, sketch: Sketch) -> Optional[str]:
    for x, y, _t in sketch.points:
        region = geomap.region_at(map_model, (x, y))
        if region is not None:
            return region
    return None


def _validate_attachment(sketch_info, host_id: str, region: Optional[str]) -> None:
    if region is None:
        raise SketchSynthError("attached recording has no attachment region")
    if host_id not in sketch_info:
        raise SketchSynthError(f"attachment host {host_id!r} does not exist")
    first, regions = sketch_info[host_id]
    if region != first and region not in regions:
        raise SketchSynthError(
            f"attachment region {region!r} is not on recording {host_id!r}'s sketch")


def _apply_delta(domain: Domain, world: World, delta: WorldDelta) -> World:
    for etype, region, eid in delta.insertions:
        if world.entity(eid) is None:
            world, _ = world_insert(world, domain, etype, region, "synthesized",
                                    entity_id=eid)
    return world
