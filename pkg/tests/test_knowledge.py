import pytest

from sketchsynth import knowledge as kn
from sketchsynth.defaults import data_json, default_domain
from sketchsynth.errors import DomainError, WorldError


@pytest.fixture(scope="module")
def domain():
    return default_domain()


def grocery_world():
    return kn.World(
        regions=frozenset({"living room", "garage", "kitchen"}),
        entities=(
            kn.EntityRecord("kitchen cabinets", "cabinet", "kitchen"),
            kn.EntityRecord("groceries", "groceries", "garage"),
        ),
        robot_at="living room",
    )


class TestLoadDomain:
    def test_default_domain_has_core_schemas(self, domain):
        expected = {"moveTo", "put", "say", "ask", "tell", "grab", "idle",
                    "eventApproach", "eventSpeech"}
        assert expected <= set(domain.schemas)

    def test_empty_ontology_is_valid(self):
        doc = {"format_version": "1", "categories": [], "entity_types": [], "schemas": []}
        lex = {"format_version": "1", "verbs": {}, "nouns": {}}
        d = kn.load_domain(doc, lex)
        assert d.entity_types == {}

    def test_put_second_param_requires_container(self, domain):
        schema = domain.schema("put")
        assert schema.params[1].requires == "container"

    def test_unknown_category_rejected(self):
        doc = {
            "categories": [],
            "entity_types": [{"name": "thing", "categories": ["nonsense"]}],
            "schemas": [],
        }
        with pytest.raises(DomainError):
            kn.load_domain(doc, {})

    def test_duplicate_schema_rejected(self):
        base = data_json("domain.json")
        base["schemas"].append(dict(base["schemas"][0]))
        with pytest.raises(DomainError):
            kn.load_domain(base, data_json("lexicon.json"))

    def test_missing_lexicon_target_rejected(self, domain):
        lex = data_json("lexicon.json")
        lex["verbs"]["zoom"] = ["teleport"]
        with pytest.raises(DomainError):
            kn.load_domain(data_json("domain.json"), lex)

    def test_category_cycle_rejected(self):
        doc = {
            "categories": [
                {"name": "a", "parents": ["b"]},
                {"name": "b", "parents": ["a"]},
            ],
            "entity_types": [],
            "schemas": [],
        }
        with pytest.raises(DomainError):
            kn.load_domain(doc, {})


class TestIsA:
    def test_cabinet_is_container(self, domain):
        assert kn.is_a(domain, "cabinet", "container")

    def test_reflexive(self, domain):
        assert kn.is_a(domain, "cabinet", "cabinet")

    def test_toy_is_not_container(self, domain):
        # Oracle: exhaustive one-step expansion of the bundled ontology.
        reachable = {"toy"}
        changed = True
        while changed:
            changed = False
            for t in list(reachable):
                cats = ()
                if t in domain.entity_types:
                    cats = domain.entity_types[t].categories
                elif t in domain.category_parents:
                    cats = domain.category_parents[t]
                for c in cats:
                    if c not in reachable:
                        reachable.add(c)
                        changed = True
        assert "container" not in reachable
        assert not kn.is_a(domain, "toy", "container")

    def test_parent_category_closure(self, domain):
        assert kn.is_a(domain, "cabinet", "storage")

    def test_unknown_type_errors(self, domain):
        with pytest.raises(DomainError):
            kn.is_a(domain, "unicorn", "grabbable")

    def test_closure_matches_one_step_expansion(self, domain):
        for tname in domain.entity_types:
            closure = kn.category_closure(domain, tname)
            # repeated one-step expansion
            out = set(domain.entity_types[tname].categories)
            changed = True
            while changed:
                changed = False
                for c in list(out):
                    for p in domain.category_parents.get(c, ()):
                        if p not in out:
                            out.add(p)
                            changed = True
            assert closure == frozenset(out)


class TestEntitiesAt:
    def test_containers_in_kitchen(self, domain):
        w = grocery_world()
        assert kn.entities_at(w, "kitchen", "container", domain) == ["kitchen cabinets"]

    def test_empty_region(self, domain):
        w = grocery_world()
        assert kn.entities_at(w, "living room") == []

    def test_chest_in_living_room(self, domain):
        w = kn.World(
            regions=frozenset({"living room"}),
            entities=(kn.EntityRecord("chest", "chest", "living room"),),
            robot_at="living room",
        )
        assert kn.entities_at(w, "living room", "container", domain) == ["chest"]

    def test_transitive_containment(self, domain):
        w = grocery_world()
        w2, _ = kn.world_insert(w, domain, "box", "kitchen cabinets", "user")
        assert "box" in kn.entities_at(w2, "kitchen")
        assert "box" in kn.entities_at(w2, "kitchen cabinets")

    def test_unknown_location(self, domain):
        with pytest.raises(WorldError):
            kn.entities_at(grocery_world(), "attic")


class TestWorldInsert:
    def test_insert_then_query(self, domain):
        w = kn.World(regions=frozenset({"garage"}), robot_at="garage")
        w2, eid = kn.world_insert(w, domain, "groceries", "garage", "user")
        assert eid == "groceries"
        assert eid in kn.entities_at(w2, "garage")
        assert w.entities == ()  # input unchanged

    def test_other_region_unchanged(self, domain):
        w = grocery_world()
        w2, _ = kn.world_insert(w, domain, "toy", "garage", "synthesized")
        assert kn.entities_at(w2, "kitchen") == kn.entities_at(w, "kitchen")

    def test_synthesized_provenance(self, domain):
        w = grocery_world()
        w2, eid = kn.world_insert(w, domain, "toy", "living room", "synthesized")
        assert w2.entity(eid).provenance == "synthesized"

    def test_fresh_id_on_collision(self, domain):
        w = grocery_world()
        w2, eid = kn.world_insert(w, domain, "groceries", "kitchen", "user")
        assert eid == "groceries_2"

    def test_insert_grows_location_by_exactly_one(self, domain):
        w = grocery_world()
        for loc in ("garage", "kitchen", "living room"):
            before = kn.entities_at(w, loc)
            w2, eid = kn.world_insert(w, domain, "toy", loc, "user")
            after = kn.entities_at(w2, loc)
            assert set(before) <= set(after)
            assert set(after) - set(before) == {eid}


class TestEvalPredicate:
    def test_holding_after_grab(self, domain):
        w = grocery_world()
        w = kn.apply_command(domain, w, kn.Command("moveTo", (kn.RegionArg("garage"),)))
        w = kn.apply_command(domain, w, kn.Command("grab", (kn.EntityArg("groceries"),)))
        assert kn.eval_predicate(w, kn.Predicate("holding", ("groceries",)), domain)

    def test_robot_at_definition(self, domain):
        w = grocery_world()
        assert kn.eval_predicate(w, kn.Predicate("robot_at", (w.robot_at,)), domain)

    def test_closed_world_default(self, domain):
        w = kn.World(regions=frozenset({"garage"}), robot_at="garage")
        assert not kn.eval_predicate(w, kn.Predicate("at", ("groceries", "garage")), domain)

    def test_unground_rejected(self, domain):
        w = grocery_world()
        with pytest.raises(WorldError):
            kn.eval_predicate(w, kn.Predicate("at", ("groceries", "@robot")), domain)


class TestFrameCheck:
    """Applying a schema's effects in a precondition-satisfying world makes
    the postconditions true, for every schema in the bundled domain."""

    def _world_for(self, domain, schema):
        w = kn.World(
            regions=frozenset({"kitchen", "garage"}),
            entities=(
                kn.EntityRecord("kitchen cabinets", "cabinet", "kitchen"),
                kn.EntityRecord("groceries", "groceries", "garage"),
                kn.EntityRecord("person", "person", "garage"),
            ),
            robot_at="garage",
        )
        args = []
        for p in schema.params:
            if p.requires == kn.REQ_TEXT:
                args.append(kn.TextArg("hello"))
            elif p.requires == kn.REQ_PLACE:
                args.append(kn.RegionArg("kitchen"))
            elif p.requires == "grabbable":
                args.append(kn.EntityArg("groceries"))
            elif p.requires == "container":
                args.append(kn.EntityArg("kitchen cabinets"))
            else:
                args.append(kn.EntityArg("person"))
        cmd = kn.Command(schema.name, tuple(args))
        if schema.name == "put":
            w = kn.apply_command(domain, w, kn.Command("grab", (kn.EntityArg("groceries"),)))
            w = kn.apply_command(domain, w, kn.Command("moveTo", (kn.EntityArg("kitchen cabinets"),)))
        return w, cmd

    def test_all_schemas(self, domain):
        for schema in domain.schemas.values():
            w, cmd = self._world_for(domain, schema)
            assert kn.preconditions_hold(domain, w, cmd), schema.name
            w2 = kn.apply_command(domain, w, cmd)
            bindings = kn.command_bindings(schema, cmd)
            posts = kn.ground_predicates(schema.postconditions, bindings, w2.robot_region())
            for post in posts:
                assert kn.eval_predicate(w2, post, domain), (schema.name, post.text())
