import pytest

from sketchsynth import knowledge as kn
from sketchsynth import planner as pl
from sketchsynth.assembler import detect_and_extend
from sketchsynth.defaults import default_domain
from sketchsynth.errors import PlanError, UnresolvableHoleError
from sketchsynth.geomap import RegionSequence
from sketchsynth.language import CoreCommand, Utterance, parse_utterance


@pytest.fixture(scope="module")
def domain():
    return default_domain()


def grocery_world(with_groceries=True):
    entities = [kn.EntityRecord("kitchen cabinets", "cabinet", "kitchen")]
    if with_groceries:
        entities.append(kn.EntityRecord("groceries", "groceries", "garage"))
    return kn.World(
        regions=frozenset({"living room", "garage", "kitchen"}),
        entities=tuple(entities),
        robot_at="living room",
    )


def cores_for(domain, world, text):
    return parse_utterance(domain, world, Utterance.from_text(text))


def step_tokens(trace):
    out = []
    for step in trace.steps:
        ev = step.event.token() if step.event else "."
        out.append((ev, step.action.token()))
    return out


GOLDEN_A = [
    (".", "idle"),
    ("eventApproach", "moveTo garage"),
    (".", "grab groceries"),
    (".", "moveTo kitchen cabinets"),
    (".", "put groceries, kitchen cabinets"),
]

GOLDEN_B = GOLDEN_A + [
    (".", "moveTo garage"),
    (".", "grab groceries"),
    (".", "moveTo kitchen cabinets"),
    (".", "put groceries, kitchen cabinets"),
]


class TestGoldenTraces:
    def test_shortened_grocery_case(self, domain):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        trace, delta = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        assert step_tokens(trace) == GOLDEN_A
        assert delta.insertions == ()
        assert pl.cost_of(trace, delta) == 5

    def test_loop_extended_grocery_case(self, domain):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        seq, loop = detect_and_extend(RegionSequence(("garage", "kitchen", "garage")))
        assert seq.regions == ("garage", "kitchen", "garage", "kitchen")
        trace, delta = pl.plan_trace(domain, world, cores, seq, loop)
        assert step_tokens(trace) == GOLDEN_B
        assert delta.insertions == ()


class TestCostOf:
    def test_published_trace_costs_five(self, domain):
        # derived by hand-applying the three weighted penalty rules
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        trace, delta = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        assert pl.cost_of(trace, delta) == 5

    def test_empty_trace_costs_zero(self):
        trace = pl.Trace((pl.TraceStep(None, kn.IDLE, "garage"),))
        assert pl.cost_of(trace, pl.WorldDelta()) == 0

    def test_missing_groceries_adds_insertion_penalty(self, domain):
        world = grocery_world(with_groceries=False)
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        trace, delta = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        assert len(delta.insertions) == 1
        assert pl.cost_of(trace, delta) == 10

    def test_visit_without_action_penalized(self):
        trace = pl.Trace((
            pl.TraceStep(None, kn.IDLE, "living room"),
            pl.TraceStep(None, kn.Command("moveTo", (kn.RegionArg("kitchen"),)), "kitchen"),
        ))
        assert pl.cost_of(trace, pl.WorldDelta()) == 3  # 1 move + 2 идle visit


class TestResolveHole:
    def test_fills_with_container_at_kitchen(self, domain):
        world = grocery_world()
        partial = kn.Command("put", (kn.EntityArg("groceries"), kn.Hole(category="container")))
        resolved = pl.resolve_hole(domain, world, partial, "kitchen")
        assert resolved.args[1] == kn.EntityArg("kitchen cabinets")

    def test_identity_on_ground_command(self, domain):
        world = grocery_world()
        cmd = kn.Command("moveTo", (kn.RegionArg("kitchen"),))
        assert pl.resolve_hole(domain, world, cmd, "kitchen") is cmd

    def test_no_candidate_here_raises_plan_error(self, domain):
        world = grocery_world()
        partial = kn.Command("put", (kn.EntityArg("groceries"), kn.Hole(category="container")))
        with pytest.raises(PlanError):
            pl.resolve_hole(domain, world, partial, "garage")

    def test_unresolvable_when_domain_has_no_fit(self, domain):
        world = grocery_world()
        partial = kn.Command("put", (kn.Hole(type_name="unobtainium"), kn.Hole()))
        with pytest.raises(UnresolvableHoleError):
            pl.resolve_hole(domain, world, partial, "kitchen")


class TestPlanTrace:
    def test_movement_only_plan(self, domain):
        world = grocery_world()
        trace, delta = pl.plan_trace(domain, world, [], RegionSequence(("kitchen",)))
        assert step_tokens(trace) == [(".", "idle"), (".", "moveTo kitchen")]
        assert delta.insertions == ()

    def test_empty_everything(self, domain):
        world = grocery_world()
        trace, delta = pl.plan_trace(domain, world, [], RegionSequence(()))
        assert step_tokens(trace) == [(".", "idle")]

    def test_tidying_inserts_toy_and_chest(self, domain):
        world = kn.World(
            regions=frozenset({"den", "bedroom", "living room", "kitchen", "hallway"}),
            robot_at="den",
        )
        cores = cores_for(domain, world, "Put the toys in the chest")
        raw = RegionSequence(("bedroom", "living room", "bedroom"))
        seq, loop = detect_and_extend(raw)
        trace, delta = pl.plan_trace(domain, world, cores, seq, loop)
        inserted = {(t, r) for t, r, _ in delta.insertions}
        assert inserted == {("toy", "bedroom"), ("chest", "living room")}
        tokens = [t for _, t in step_tokens(trace)]
        assert tokens.count("grab toy") == 2
        assert tokens.count("put toy, chest") == 2

    def test_unknown_region_rejected(self, domain):
        with pytest.raises(PlanError):
            pl.plan_trace(domain, grocery_world(), [], RegionSequence(("attic",)))

    def test_unresolvable_hole_reported(self, domain):
        world = grocery_world()
        cores = [CoreCommand(kn.Command("say", (kn.Hole(category="text"),)), 0, False)]
        with pytest.raises(UnresolvableHoleError):
            pl.plan_trace(domain, world, cores, RegionSequence(()))

    def test_vague_with_groceries_present_resolves_them(self, domain):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring them in")
        trace, delta = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        assert step_tokens(trace) == GOLDEN_A
        assert delta.insertions == ()

    def test_vague_with_empty_world_inserts_least_grabbable(self, domain):
        world = kn.World(
            regions=frozenset({"living room", "garage", "kitchen"}),
            entities=(kn.EntityRecord("kitchen cabinets", "cabinet", "kitchen"),),
            robot_at="living room",
        )
        cores = cores_for(domain, world, "when I arrive, bring them in")
        trace, delta = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        grabbables = sorted(t for t in domain.entity_types
                            if kn.is_a(domain, t, "grabbable"))
        assert delta.insertions[0][0] == grabbables[0] == "box"

    def test_deterministic(self, domain):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        a = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        b = pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")))
        assert a == b


class TestSearchDebug:
    def test_debug_dot_dumps_search_graph(self, domain, tmp_path):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        out = tmp_path / "search.dot"
        pl.plan_trace(domain, world, cores, RegionSequence(("garage", "kitchen")),
                      debug_dot=str(out))
        text = out.read_text()
        assert text.startswith("digraph search {")
        assert "moveTo garage" in text
        assert "eventApproach" in text


class TestHeuristic:
    def make_node(self, world, seq_index=0, cores_done=0):
        return pl.SearchNode(world=world, seq_index=seq_index, cores_done=cores_done,
                             steps=(), g=0)

    def test_goal_node_is_zero(self, domain):
        node = self.make_node(grocery_world(), seq_index=2, cores_done=2)
        cores = cores_for(domain, grocery_world(), "when I arrive, bring in the groceries")
        assert pl.heuristic(node, ("garage", "kitchen"), cores) == 0

    def test_grocery_start_bounded_by_true_cost(self, domain):
        world = grocery_world()
        cores = cores_for(domain, world, "when I arrive, bring in the groceries")
        node = self.make_node(world)
        h = pl.heuristic(node, ("garage", "kitchen"), cores)
        assert h == 4  # 2 regions + 2 non-move cores
        assert h <= 5  # true optimal cost

    def test_one_region_left(self, domain):
        node = self.make_node(grocery_world(), seq_index=1, cores_done=0)
        assert pl.heuristic(node, ("garage", "kitchen"), []) == 1
