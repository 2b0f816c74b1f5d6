"""Bundled scenario suite: grocery, spill, hospital, and tidying cases plus
the documented failure categories.

Each case carries the same inputs a user session would: a world document, a
map (with any drawn regions), and recordings of utterance text plus sketch
strokes. Strokes are generated from waypoint paths over the bundled maps;
routes thread the uncolored gaps between regions so only the intended
regions are touched.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Optional

from . import documents, geomap
from .defaults import data_json, data_text, default_domain
from .geomap import MapModel, Sketch
from .language import Utterance
from .pipeline import Recording, SessionBundle

SAMPLE_SPACING = 0.25  # meters between authored stroke samples
SAMPLE_DT = 30.0       # milliseconds between samples


def load_map(name: str) -> MapModel:
    return documents.decode_map(data_json(f"maps/{name}.json"))


# waypoint anchors (region centroids)
HOME = {
    "living room": (1.75, 1.75), "garage": (5.75, 1.75), "kitchen": (9.75, 1.75),
    "bedroom": (1.75, 5.75), "hallway": (5.75, 5.75), "den": (9.75, 5.75),
}
STORE = {
    "cashiers": (1.75, 1.75), "beverages": (9.75, 1.75),
    "produce": (1.75, 5.75), "snacks": (9.75, 5.75),
}
HOSPITAL = {
    "entrance": (1.75, 1.75), "visitor center": (9.75, 1.75),
    "ward": (1.75, 5.75), "cafe": (9.75, 5.75),
}

SPILL_POLYGON = [[4.5, 0.5], [7.0, 0.5], [7.0, 3.0], [4.5, 3.0]]

# the corridor rows/columns between regions are uncolored; these waypoint
# paths ride them to skip regions that sit in between
HOME_DETOURS = {
    ("living room", "kitchen"): [(1.75, 3.75), (9.75, 3.75)],
    ("kitchen", "living room"): [(9.75, 3.75), (1.75, 3.75)],
    ("den", "bedroom"): [(9.75, 3.75), (1.75, 3.75)],
    ("bedroom", "den"): [(1.75, 3.75), (9.75, 3.75)],
    ("living room", "hallway"): [(3.75, 1.75), (3.75, 5.75)],
    ("hallway", "living room"): [(3.75, 5.75), (3.75, 1.75)],
    ("living room", "den"): [(1.75, 3.75), (9.75, 3.75)],
    ("den", "kitchen"): [(9.75, 3.9)],
    ("kitchen", "den"): [(9.75, 3.9)],
    ("garage", "bedroom"): [(5.75, 3.75), (1.75, 3.75)],
    ("bedroom", "garage"): [(1.75, 3.75), (5.75, 3.75)],
}
STORE_DETOURS = {
    ("cashiers", "beverages"): [(1.75, 3.75), (9.75, 3.75)],
    ("beverages", "cashiers"): [(9.75, 3.75), (1.75, 3.75)],
}
HOSPITAL_DETOURS = {
    ("entrance", "visitor center"): [(1.75, 3.75), (9.75, 3.75)],
    ("visitor center", "entrance"): [(9.75, 3.75), (1.75, 3.75)],
}

_ANCHORS = {"home": HOME, "store": STORE, "hospital": HOSPITAL}
_DETOURS = {"home": HOME_DETOURS, "store": STORE_DETOURS, "hospital": HOSPITAL_DETOURS}


def path(map_name: str, *regions: str, direct: bool = False) -> list[tuple[float, float]]:
    """Waypoints visiting the named regions in order, threading the gaps."""
    anchors = _ANCHORS[map_name]
    detours = {} if direct else _DETOURS[map_name]
    points = [anchors[regions[0]]]
    for a, b in zip(regions, regions[1:]):
        points.extend(detours.get((a, b), []))
        points.append(anchors[b])
    return points


def circle(center: tuple[float, float], radius: float = 0.9, n: int = 24
           ) -> list[tuple[float, float]]:
    return [
        (center[0] + radius * math.cos(2 * math.pi * i / n),
         center[1] + radius * math.sin(2 * math.pi * i / n))
        for i in range(n + 1)
    ]


def stroke(waypoints: list[tuple[float, float]]) -> Sketch:
    """Resample a waypoint path into a timed stroke."""
    points: list[tuple[float, float, float]] = []
    t = 0.0
    prev = None
    for wp in waypoints:
        if prev is None:
            points.append((wp[0], wp[1], t))
        else:
            dist = math.dist(prev, wp)
            steps = max(1, int(dist / SAMPLE_SPACING))
            for i in range(1, steps + 1):
                t += SAMPLE_DT
                x = prev[0] + (wp[0] - prev[0]) * i / steps
                y = prev[1] + (wp[1] - prev[1]) * i / steps
                points.append((x, y, t))
        prev = wp
    return Sketch(tuple(points))


@dataclass(frozen=True)
class Case:
    name: str
    scenario: str
    map_name: str
    world: dict
    recordings: tuple[Recording, ...]
    extra_regions: tuple[tuple[str, tuple], ...] = ()
    notes: str = ""
    expect_diagnostic: Optional[str] = None

    def map_model(self) -> MapModel:
        m = load_map(self.map_name)
        for label, polygon in self.extra_regions:
            m = geomap.add_region(m, tuple(map(tuple, polygon)), label)
        return m

    def bundle(self) -> SessionBundle:
        return SessionBundle(
            domain=default_domain(),
            map_model=self.map_model(),
            world=documents.decode_world(self.world),
            recordings=self.recordings,
        )


def rec(rid: str, text: str, sketch: Sketch, attach=None) -> Recording:
    return Recording(rid, Utterance.from_text(text), sketch, attach)


def world_doc(regions, entities, robot_at) -> dict:
    return {
        "format_version": "1",
        "regions": sorted(regions),
        "entities": entities,
        "robot_at": robot_at,
    }


def entity(eid, etype, location, units=1):
    e = {"id": eid, "type": etype, "location": location, "provenance": "user"}
    if units != 1:
        e["units"] = units
    return e


HOME_REGIONS = list(HOME)
STORE_REGIONS = list(STORE) + ["spill"]
HOSPITAL_REGIONS = list(HOSPITAL)

GROCERY_ENTITIES = [
    entity("kitchen cabinets", "cabinet", "kitchen"),
    entity("groceries", "groceries", "garage"),
]


def _cases() -> list[Case]:
    cases: list[Case] = []
    add = cases.append

    # ----- grocery ---------------------------------------------------------
    add(Case(
        "grocery_shortened", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "when I arrive, bring in the groceries",
             stroke(path("home", "living room", "garage", "kitchen", direct=True))),),
        notes="single-visit variant; the published five-command trace",
    ))
    add(Case(
        "grocery_loop", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "when I arrive, bring in the groceries",
             stroke(path("home", "living room", "garage", "kitchen", "garage",
                         direct=True))),),
        notes="garage repeats; loop extended to two identical iterations",
    ))
    add(Case(
        "grocery_vague_present", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "when I arrive, bring them in",
             stroke(path("home", "living room", "garage", "kitchen", direct=True))),),
        notes="pronoun with no referent still resolves via the world database",
    ))
    add(Case(
        "grocery_vague_empty", "grocery", "home",
        world_doc(HOME_REGIONS, [entity("kitchen cabinets", "cabinet", "kitchen")],
                  "living room"),
        (rec("r1", "when I arrive, bring them in",
             stroke(path("home", "living room", "garage", "kitchen", direct=True))),),
        notes="failure category: insufficient information from speech; the "
              "planner inserts the lexicographically least grabbable type",
    ))
    add(Case(
        "grocery_missing_named", "grocery", "home",
        world_doc(HOME_REGIONS, [entity("kitchen cabinets", "cabinet", "kitchen")],
                  "living room"),
        (rec("r1", "when I arrive, bring in the groceries",
             stroke(path("home", "living room", "garage", "kitchen", direct=True))),),
        notes="named entity absent from the world is inserted with a penalty",
    ))
    add(Case(
        "grocery_movement_only", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "", stroke(path("home", "living room", "kitchen"))),),
        notes="sketch-only recording",
    ))
    add(Case(
        "grocery_explicit_move", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "go to the kitchen", stroke(path("home", "living room", "kitchen"))),),
        notes="a moveTo core satisfies the sketched region with one command",
    ))
    add(Case(
        "grocery_three_sentences", "grocery", "home",
        world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
        (rec("r1", "Go to the garage. Grab the groceries. Go to the kitchen.",
             stroke(path("home", "living room", "garage", "kitchen", direct=True))),),
        notes="more sentences than recordings usually carry; warn but accept",
        expect_diagnostic="sentences",
    ))

    # ----- spill -----------------------------------------------------------
    spill_world = world_doc(STORE_REGIONS, [], "cashiers")
    spill_regions = (("Spill", tuple(map(tuple, SPILL_POLYGON))),)
    spill_r1 = rec("r1", "", stroke(path("store", "cashiers", "beverages")))
    spill_r2 = rec(
        "r2",
        "When someone approaches, say, 'Please avoid the spill in this area. "
        "It will be cleaned shortly'",
        stroke(circle(STORE["beverages"])), attach=("r1", None))
    spill_r3 = rec("r3", "When I say 'go home'",
                   stroke(path("store", "beverages", "cashiers")),
                   attach=("r1", None))
    add(Case("spill_full", "spill", "store", spill_world,
             (spill_r1, spill_r2, spill_r3), extra_regions=spill_regions,
             notes="alert loop in the aisle plus a spoken go-home branch"))
    add(Case("spill_first_only", "spill", "store", spill_world,
             (spill_r1,), extra_regions=spill_regions,
             notes="navigation-only first recording, circumventing the spill"))
    add(Case("spill_alert_only", "spill", "store", spill_world,
             (spill_r1, spill_r2), extra_regions=spill_regions,
             notes="trigger-action alert loop with no exit branch"))
    add(Case("spill_ungated_return", "spill", "store", spill_world,
             (spill_r1, spill_r2,
              rec("r3", "", stroke(path("store", "beverages", "cashiers")),
                  attach=("r1", None))),
             extra_regions=spill_regions,
             notes="attached recording without a core event command",
             expect_diagnostic="empty-event"))
    add(Case("spill_through", "spill", "store", spill_world,
             (rec("r1", "", stroke(path("store", "cashiers", "beverages",
                                        direct=True))),),
             extra_regions=spill_regions,
             notes="sketching straight through the spill makes it a visit"))

    # ----- hospital --------------------------------------------------------
    hospital_world = world_doc(
        HOSPITAL_REGIONS, [entity("person", "person", "entrance")], "entrance")
    hosp_r1 = rec(
        "r1",
        "Tell people the directions to the visitor center. "
        "Say, 'would you like me to escort you there?'",
        stroke(path("hospital", "entrance", "visitor center")))
    hosp_r2 = rec("r2", "If they say 'yes'",
                  stroke(path("hospital", "entrance", "visitor center", "entrance")),
                  attach=("r1", None))
    add(Case("hospital_full", "hospital", "hospital", hospital_world,
             (hosp_r1, hosp_r2),
             notes="escort branch ends at the entrance, so the program loops forever"))
    add(Case("hospital_greet_only", "hospital", "hospital", hospital_world,
             (hosp_r1,), notes="greeting happens at the entrance, by the person icon"))
    add(Case("hospital_no_return", "hospital", "hospital", hospital_world,
             (hosp_r1,
              rec("r2", "If they say 'yes'",
                  stroke(path("hospital", "entrance", "visitor center")),
                  attach=("r1", None))),
             notes="failure category: without the sketched return path the "
                   "escort loop is not inserted"))
    add(Case("hospital_no_person", "hospital", "hospital",
             world_doc(HOSPITAL_REGIONS, [], "entrance"),
             (hosp_r1,),
             notes="failure category flavor: with no person icon the planner "
                   "synthesizes an audience at the cheapest location"))

    # ----- tidying ---------------------------------------------------------
    tidy_world = world_doc(HOME_REGIONS, [], "den")
    tidy_r1 = rec("r1", "Put the toys in the chest",
                  stroke(path("home", "den", "bedroom", "living room", "bedroom")))
    tidy_r2 = rec("r2", "Put the toys in the chest",
                  stroke(path("home", "living room", "kitchen", "living room")),
                  attach=("r1", None))
    tidy_r3 = rec("r3", "Put the toys in the chest",
                  stroke(path("home", "living room", "hallway", "living room")),
                  attach=("r1", None))
    add(Case("tidying_full", "tidying", "home", tidy_world,
             (tidy_r1, tidy_r2, tidy_r3),
             notes="loops over three rooms, dropping toys in one chest",
             expect_diagnostic="empty-event"))
    add(Case("tidying_first_only", "tidying", "home", tidy_world, (tidy_r1,),
             notes="toy and chest are invented and placed by the planner"))
    add(Case("tidying_single_room", "tidying", "home", tidy_world,
             (rec("r1", "pick up the toys",
                  stroke(path("home", "den", "kitchen", "living room", "bedroom"))),),
             notes="failure category: insufficient domain knowledge; toys are "
                   "collected from a single room rather than each room"))
    add(Case("tidying_preplaced", "tidying", "home",
             world_doc(HOME_REGIONS, [
                 entity("toy", "toy", "bedroom", units=2),
                 entity("chest", "chest", "living room"),
             ], "den"),
             (tidy_r1,), notes="no insertions needed when the world is populated"))
    add(Case("tidying_chest_only", "tidying", "home",
             world_doc(HOME_REGIONS, [entity("chest", "chest", "living room")], "den"),
             (tidy_r1,), notes="only the toys need inventing"))

    # ----- focused micro cases ---------------------------------------------
    add(Case("micro_stay_put", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "", stroke([(1.0, 1.0), (2.5, 2.5)])),),
             notes="stroke inside one region: empty sequence, stay in place"))
    add(Case("micro_two_rooms", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "", stroke(path("home", "living room", "bedroom", "hallway"))),),
             notes="plain two-region walk"))
    add(Case("micro_self_loop_initial", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "", stroke(path("home", "living room", "garage")
                                   + circle(HOME["garage"], 0.9))),),
             notes="closed curve inside the garage reads as a self-loop",
             expect_diagnostic=None))
    add(Case("micro_multi_lap", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "when I arrive, bring in the groceries",
                  stroke(path("home", "living room", "garage", "kitchen", "garage",
                              "kitchen", "garage", direct=True))),),
             notes="three laps sketched; folded into the same two-iteration loop",
             expect_diagnostic="laps"))
    add(Case("micro_loop_tail", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "", stroke(path("home", "living room", "garage", "kitchen",
                                        "garage", direct=True)
                                   + path("home", "garage", "bedroom",
                                          direct=False)[1:])),),
             notes="loop with a tail region visited after the second lap"))
    add(Case("micro_speech_gate", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "When I say 'clean up', go to the kitchen",
                  stroke(path("home", "living room", "kitchen"))),),
             notes="speech-triggered movement"))
    add(Case("micro_multi_verb", "grocery", "home",
             world_doc(HOME_REGIONS, [
                 entity("kitchen cabinets", "cabinet", "kitchen"),
                 entity("toy", "toy", "garage"),
             ], "living room"),
             (rec("r1", "go grab the toys", stroke(path("home", "living room", "garage"))),),
             notes="two candidate verbs in one clause: first wins, rest noted",
             expect_diagnostic="extra verb"))
    add(Case("micro_pronoun", "tidying", "home",
             world_doc(HOME_REGIONS, [
                 entity("toy", "toy", "bedroom"),
                 entity("chest", "chest", "living room"),
             ], "den"),
             (rec("r1", "Grab the toy. Put it in the chest",
                  stroke(path("home", "den", "bedroom", "living room"))),),
             notes="pronoun resolves to the most recent grounded noun"))
    add(Case("micro_ask", "hospital", "hospital", hospital_world,
             (rec("r1", "Ask 'do you need any help?'",
                  stroke(path("hospital", "entrance", "ward"))),),
             notes="asking happens where the person is"))
    add(Case("micro_tell", "hospital", "hospital", hospital_world,
             (rec("r1", "Tell people the directions to the visitor center",
                  stroke(path("hospital", "entrance", "visitor center"))),),
             notes="unquoted narrative binds the clause remainder"))
    add(Case("micro_say_no_person", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "Say 'dinner is ready'",
                  stroke(path("home", "living room", "kitchen"))),),
             notes="speech with nobody around synthesizes an audience"))
    add(Case("micro_ground_put", "grocery", "home",
             world_doc(HOME_REGIONS, GROCERY_ENTITIES, "living room"),
             (rec("r1", "put the groceries in the kitchen cabinets",
                  stroke(path("home", "living room", "garage", "kitchen",
                              direct=True))),),
             notes="fully ground core command, no holes to resolve"))
    return cases


ALL_CASES: tuple[Case, ...] = tuple(_cases())
CASE_INDEX = {c.name: c for c in ALL_CASES}


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


@dataclass
class CaseResult:
    name: str
    scenario: str
    ok: bool
    seconds: float
    detail: str = ""


def run_case(case: Case):
    from . import pipeline

    start = time.perf_counter()
    bundle = pipeline.synthesize(case.bundle())
    return bundle, time.perf_counter() - start


def golden_text(name: str) -> Optional[str]:
    try:
        return data_text(f"corpus/golden/{name}.json")
    except FileNotFoundError:
        return None


def run_corpus(update_golden: Optional[str] = None) -> list[CaseResult]:
    """Synthesize every case and compare against the checked-in goldens.

    ``update_golden`` names a directory to (re)write golden documents into;
    normal runs pass None and only compare.
    """
    results = []
    for case in ALL_CASES:
        try:
            bundle, elapsed = run_case(case)
        except Exception as err:  # noqa: BLE001 - report, don't crash the suite
            results.append(CaseResult(case.name, case.scenario, False, 0.0,
                                      f"{type(err).__name__}: {err}"))
            continue
        doc = documents.canonical_json(documents.encode_program(bundle.program))
        detail = ""
        ok = True
        if case.expect_diagnostic is not None and not any(
                case.expect_diagnostic in d for d in bundle.diagnostics):
            ok = False
            detail = f"expected diagnostic containing {case.expect_diagnostic!r}"
        if update_golden is not None:
            out = os.path.join(update_golden, f"{case.name}.json")
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(doc)
        else:
            want = golden_text(case.name)
            if want is None:
                ok = False
                detail = "missing golden document"
            elif want != doc:
                ok = False
                detail = "program does not match golden document"
        results.append(CaseResult(case.name, case.scenario, ok, elapsed, detail))
    return results
