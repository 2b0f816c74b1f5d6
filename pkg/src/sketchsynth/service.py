"""HTTP service the authoring UI talks to.

One session per server. Every mutation runs under the session lock, so
concurrent synthesis requests queue up and the last writer's program wins;
reads see consistent snapshots. The session can persist to a single bundle
document on disk between restarts.
"""

from __future__ import annotations

import os
import threading
from dataclasses import replace
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from . import documents, dot, executor, geomap, pipeline
from .defaults import default_domain
from .errors import DocumentError, SketchSynthError, SynthesisError
from .knowledge import Domain, World


class SessionStore:
    def __init__(self, domain: Domain, bundle: pipeline.SessionBundle,
                 session_path: Optional[str] = None):
        self.domain = domain
        self.bundle = bundle
        self.session_path = session_path
        self.version = 0
        self.lock = threading.Lock()

    @staticmethod
    def fresh(domain: Domain, session_path: Optional[str] = None) -> "SessionStore":
        if session_path and os.path.exists(session_path):
            import json

            with open(session_path, encoding="utf-8") as fh:
                bundle = documents.decode_session(json.load(fh), domain)
        else:
            bundle = pipeline.SessionBundle(
                domain=domain, map_model=geomap.MapModel(), world=World())
        return SessionStore(domain, bundle, session_path)

    def persist(self) -> None:
        if self.session_path:
            doc = documents.canonical_json(documents.encode_session(self.bundle))
            with open(self.session_path, "w", encoding="utf-8") as fh:
                fh.write(doc)


def _fail(status: int, stage: str, message: str, recording: Optional[str] = None):
    detail: dict[str, Any] = {"stage": stage, "message": message}
    if recording is not None:
        detail["recording"] = recording
    raise HTTPException(status_code=status, detail=detail)


def build_app(domain: Optional[Domain] = None,
              session_path: Optional[str] = None) -> FastAPI:
    domain = domain or default_domain()
    store = SessionStore.fresh(domain, session_path)
    app = FastAPI(title="sketchsynth", version="0.1.0")
    app.state.store = store

    @app.get("/session")
    def session_summary():
        with store.lock:
            b = store.bundle
            return {
                "version": store.version,
                "regions": [r.id for r in b.map_model.regions],
                "entities": [r.id for r in b.world.entities],
                "recordings": [r.id for r in b.recordings],
                "has_program": b.program is not None,
                "diagnostics": list(b.diagnostics),
            }

    @app.get("/map")
    def get_map():
        with store.lock:
            return documents.encode_map(store.bundle.map_model)

    @app.put("/map")
    def put_map(doc: dict):
        with store.lock:
            try:
                map_model = documents.decode_map(doc)
            except DocumentError as err:
                _fail(400, "decode_map", str(err))
            world = replace(store.bundle.world,
                            regions=frozenset(r.id for r in map_model.regions))
            store.bundle = replace(store.bundle, map_model=map_model, world=world)
            store.version += 1
            store.persist()
            return {"version": store.version}

    @app.post("/map/regions")
    def add_region(body: dict):
        with store.lock:
            try:
                polygon = tuple((float(x), float(y)) for x, y in body["polygon"])
                label = str(body["label"])
                map_model = geomap.add_region(store.bundle.map_model, polygon, label)
            except (KeyError, TypeError, ValueError) as err:
                _fail(400, "add_region", f"bad polygon payload: {err}")
            except SketchSynthError as err:
                _fail(400, "add_region", str(err))
            region_id = map_model.regions[-1].id
            world = replace(store.bundle.world,
                            regions=store.bundle.world.regions | {region_id})
            store.bundle = replace(store.bundle, map_model=map_model, world=world)
            store.version += 1
            store.persist()
            return {"region": region_id, "version": store.version}

    @app.post("/map/icons")
    def place_icon(body: dict):
        with store.lock:
            try:
                point = (float(body["point"][0]), float(body["point"][1]))
                map_model, world, entity_id = geomap.place_icon(
                    store.bundle.map_model, store.bundle.world, domain,
                    str(body["entity_type"]), point)
            except (KeyError, TypeError, ValueError) as err:
                _fail(400, "place_icon", f"bad icon payload: {err}")
            except SketchSynthError as err:
                _fail(400, "place_icon", str(err))
            store.bundle = replace(store.bundle, map_model=map_model, world=world)
            store.version += 1
            store.persist()
            return {"entity": entity_id, "version": store.version}

    @app.get("/world")
    def get_world():
        with store.lock:
            return documents.encode_world(store.bundle.world)

    @app.put("/world")
    def put_world(doc: dict):
        with store.lock:
            try:
                world = documents.decode_world(doc)
            except DocumentError as err:
                _fail(400, "decode_world", str(err))
            store.bundle = replace(store.bundle, world=world)
            store.version += 1
            store.persist()
            return {"version": store.version}

    @app.post("/recordings")
    def append_recording(doc: dict):
        with store.lock:
            try:
                recording = documents.decode_recording(doc)
            except (DocumentError, SketchSynthError) as err:
                _fail(400, "decode_recording", str(err))
            if any(r.id == recording.id for r in store.bundle.recordings):
                _fail(409, "append_recording", f"recording {recording.id!r} already exists")
            store.bundle = replace(
                store.bundle, recordings=store.bundle.recordings + (recording,))
            store.version += 1
            store.persist()
            return {"recordings": len(store.bundle.recordings), "version": store.version}

    @app.delete("/recordings")
    def clear_recordings():
        with store.lock:
            store.bundle = replace(store.bundle, recordings=(), program=None,
                                   diagnostics=(), traces=())
            store.version += 1
            store.persist()
            return {"version": store.version}

    @app.post("/synthesize")
    def synthesize():
        # the lock queues concurrent synthesis; last writer wins
        with store.lock:
            try:
                store.bundle = pipeline.synthesize(store.bundle)
            except SynthesisError as err:
                _fail(422, err.stage, str(err.cause), err.recording_id)
            store.version += 1
            store.persist()
            return {
                "version": store.version,
                "diagnostics": list(store.bundle.diagnostics),
                "delta": documents.encode_delta(store.bundle.delta),
            }

    @app.get("/program")
    def get_program():
        with store.lock:
            if store.bundle.program is None:
                _fail(404, "program", "no program synthesized yet")
            doc = documents.encode_program(store.bundle.program)
            return {"version": store.version, "program": doc}

    @app.get("/program.dot", response_class=PlainTextResponse)
    def get_program_dot():
        with store.lock:
            if store.bundle.program is None:
                _fail(404, "program", "no program synthesized yet")
            return dot.to_dot(store.bundle.program)

    @app.post("/simulate")
    def simulate(doc: dict):
        with store.lock:
            if store.bundle.program is None:
                _fail(404, "program", "no program synthesized yet")
            try:
                script = documents.decode_script(doc)
            except DocumentError as err:
                _fail(400, "decode_script", str(err))
            try:
                log = executor.run(domain, store.bundle.program,
                                   store.bundle.world, script)
            except SketchSynthError as err:
                _fail(422, "simulate", str(err))
            return documents.encode_log(log)

    return app
