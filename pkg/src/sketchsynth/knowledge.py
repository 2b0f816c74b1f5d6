"""Fixed planning domain (ontology, command schemas, lexicons) and the mutable world.

The domain is loaded once from a document and never changes afterwards; worlds
are immutable values so the planner can branch them freely during search.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Union

from .errors import DomainError, WorldError

# Param requirements that are not ontology categories.
REQ_TEXT = "text"       # free text, bound from a quoted span or clause remainder
REQ_PLACE = "place"     # any region or entity

ACTION = "action"
EVENT = "event"

PREDICATE_NAMES = ("robot_at", "holding", "hands_free", "at", "exists")

# Location term meaning "the region the robot currently occupies".
ROBOT_HERE = "@robot"


# ---------------------------------------------------------------------------
# Command arguments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntityArg:
    """Reference to a concrete world entity."""

    id: str

    def token(self) -> str:
        return self.id


@dataclass(frozen=True)
class RegionArg:
    """Reference to a map region."""

    id: str

    def token(self) -> str:
        return self.id


@dataclass(frozen=True)
class TextArg:
    """Verbatim speech text; never normalized."""

    text: str

    def token(self) -> str:
        return '"%s"' % self.text


@dataclass(frozen=True)
class Hole:
    """Unresolved parameter. May carry the entity type the speaker named."""

    category: Optional[str] = None
    type_name: Optional[str] = None

    def token(self) -> str:
        return "_" if self.type_name is None else "_:%s" % self.type_name


Arg = Union[EntityArg, RegionArg, TextArg, Hole]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Predicate:
    """Ground or templated fact over the world.

    Args are entity ids, region ids, schema param names, ``@robot`` (the
    robot's current region), or class terms ``category:<name>`` /
    ``type:<name>`` that quantify over matching entities.
    """

    name: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if self.name not in PREDICATE_NAMES:
            raise DomainError(f"unknown predicate {self.name!r}")

    def substitute(self, bindings: Mapping[str, str]) -> "Predicate":
        return Predicate(self.name, tuple(bindings.get(a, a) for a in self.args))

    def text(self) -> str:
        return self.name if not self.args else "%s(%s)" % (self.name, ", ".join(self.args))

    @staticmethod
    def parse(text: str) -> "Predicate":
        text = text.strip()
        if "(" not in text:
            return Predicate(text)
        if not text.endswith(")"):
            raise DomainError(f"bad predicate syntax: {text!r}")
        name, inner = text[:-1].split("(", 1)
        args = tuple(a.strip() for a in inner.split(",")) if inner.strip() else ()
        return Predicate(name.strip(), args)


@dataclass(frozen=True)
class EntityType:
    name: str
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class Param:
    name: str
    requires: str  # REQ_TEXT, REQ_PLACE, or a category name


@dataclass(frozen=True)
class CommandSchema:
    name: str
    kind: str  # ACTION or EVENT
    params: tuple[Param, ...] = ()
    preconditions: tuple[Predicate, ...] = ()
    postconditions: tuple[Predicate, ...] = ()


@dataclass(frozen=True)
class Command:
    """An instantiated action or event; partial when any arg is a Hole."""

    schema: str
    args: tuple[Arg, ...] = ()

    @property
    def is_partial(self) -> bool:
        return any(isinstance(a, Hole) for a in self.args)

    def token(self) -> str:
        if not self.args:
            return self.schema
        return "%s %s" % (self.schema, ", ".join(a.token() for a in self.args))


IDLE = Command("idle")


@dataclass(frozen=True)
class Domain:
    """Fixed ontology. Immutable after load."""

    categories: tuple[str, ...]
    category_parents: Mapping[str, tuple[str, ...]]
    entity_types: Mapping[str, EntityType]
    schemas: Mapping[str, CommandSchema]
    verb_lexicon: Mapping[str, tuple[str, ...]]  # lemma -> schema names
    noun_lexicon: Mapping[str, str]              # lemma -> entity type name
    event_keywords: tuple[str, ...] = ("if", "when", "whenever")

    def schema(self, name: str) -> CommandSchema:
        try:
            return self.schemas[name]
        except KeyError:
            raise DomainError(f"unknown command schema {name!r}") from None

    def entity_type(self, name: str) -> EntityType:
        try:
            return self.entity_types[name]
        except KeyError:
            raise DomainError(f"unknown entity type {name!r}") from None


# ---------------------------------------------------------------------------
# World
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntityRecord:
    id: str
    type: str
    location: str  # region id or entity id
    provenance: str = "user"  # "user" or "synthesized"
    units: int = 1  # >1 marks a replenishable source


@dataclass(frozen=True)
class HeldItem:
    id: str
    type: str
    provenance: str


@dataclass(frozen=True)
class World:
    """Ground-truth snapshot: regions, placed entities, robot location.

    Value semantics: every mutation returns a fresh World. ``asserted_persons``
    records regions where an event (someone approaching or speaking) implied a
    person is present without materializing an entity for them.
    """

    regions: frozenset[str] = frozenset()
    entities: tuple[EntityRecord, ...] = ()
    robot_at: str = ""
    holding: Optional[HeldItem] = None
    asserted_persons: frozenset[str] = frozenset()

    def entity(self, entity_id: str) -> Optional[EntityRecord]:
        for rec in self.entities:
            if rec.id == entity_id:
                return rec
        return None

    def has_location(self, location: str) -> bool:
        return location in self.regions or self.entity(location) is not None

    def region_of(self, location: str) -> str:
        """Resolve a location through entity containment down to its region."""
        seen = set()
        current = location
        while current not in self.regions:
            if current in seen:
                raise WorldError(f"containment cycle at {current!r}")
            seen.add(current)
            rec = self.entity(current)
            if rec is None:
                raise WorldError(f"unknown location {current!r}")
            current = rec.location
        return current

    def robot_region(self) -> str:
        return self.region_of(self.robot_at)


def sorted_world(world: World) -> World:
    """Canonical entity ordering, used for hashing search states."""
    return replace(world, entities=tuple(sorted(world.entities, key=lambda r: r.id)))


# ---------------------------------------------------------------------------
# Domain loading
# ---------------------------------------------------------------------------

_DOMAIN_KEYS = {"format_version", "categories", "entity_types", "schemas"}
_LEXICON_KEYS = {"format_version", "verbs", "nouns", "event_keywords"}


def _check_keys(doc: Mapping, allowed: set, what: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise DomainError(f"unknown fields in {what}: {sorted(unknown)}")


def load_domain(document: Mapping, lexicon: Mapping) -> Domain:
    """Build a Domain from a domain document plus a lexicon document.

    Decoding is strict: unknown fields and dangling references are rejected.
    """
    _check_keys(document, _DOMAIN_KEYS, "domain document")
    _check_keys(lexicon, _LEXICON_KEYS, "lexicon document")

    parents: dict[str, tuple[str, ...]] = {}
    for cat in document.get("categories", []):
        if isinstance(cat, str):
            cat = {"name": cat}
        name = cat["name"].lower()
        if name in parents:
            raise DomainError(f"duplicate category {name!r}")
        parents[name] = tuple(p.lower() for p in cat.get("parents", []))
    for name, ps in parents.items():
        for p in ps:
            if p not in parents:
                raise DomainError(f"category {name!r} names unknown parent {p!r}")
    _check_acyclic(parents)

    types: dict[str, EntityType] = {}
    for spec in document.get("entity_types", []):
        name = spec["name"].lower()
        if name in types:
            raise DomainError(f"duplicate entity type {name!r}")
        cats = tuple(c.lower() for c in spec.get("categories", []))
        for c in cats:
            if c not in parents:
                raise DomainError(f"entity type {name!r} names unknown category {c!r}")
        types[name] = EntityType(name, cats)

    schemas: dict[str, CommandSchema] = {}
    for spec in document.get("schemas", []):
        name = spec["name"]
        if name in schemas:
            raise DomainError(f"duplicate schema name {name!r}")
        kind = spec["kind"]
        if kind not in (ACTION, EVENT):
            raise DomainError(f"schema {name!r} has bad kind {kind!r}")
        params = tuple(Param(p["name"], p["requires"].lower()) for p in spec.get("params", []))
        for p in params:
            if p.requires not in (REQ_TEXT, REQ_PLACE) and p.requires not in parents:
                raise DomainError(
                    f"schema {name!r} param {p.name!r} requires unknown category {p.requires!r}"
                )
        pre = tuple(Predicate.parse(s) for s in spec.get("pre", []))
        post = tuple(Predicate.parse(s) for s in spec.get("post", []))
        param_names = {p.name for p in params}
        for pred in pre + post:
            for a in pred.args:
                if a.startswith(("category:", "type:")) or a == ROBOT_HERE:
                    continue
                if a not in param_names:
                    raise DomainError(f"schema {name!r}: predicate arg {a!r} is unbound")
        if kind == EVENT and any(p.name == "robot_at" for p in post):
            raise DomainError(f"event schema {name!r} must not move the robot")
        schemas[name] = CommandSchema(name, kind, params, pre, post)

    verbs: dict[str, tuple[str, ...]] = {}
    for lemma, targets in lexicon.get("verbs", {}).items():
        if isinstance(targets, str):
            targets = [targets]
        for t in targets:
            if t not in schemas:
                raise DomainError(f"verb lexicon target {t!r} is not a schema")
        verbs[lemma.lower()] = tuple(targets)

    nouns: dict[str, str] = {}
    for lemma, target in lexicon.get("nouns", {}).items():
        if target.lower() not in types:
            raise DomainError(f"noun lexicon target {target!r} is not an entity type")
        nouns[lemma.lower()] = target.lower()

    keywords = tuple(k.lower() for k in lexicon.get("event_keywords", ["if", "when", "whenever"]))
    return Domain(
        categories=tuple(sorted(parents)),
        category_parents=parents,
        entity_types=types,
        schemas=schemas,
        verb_lexicon=verbs,
        noun_lexicon=nouns,
        event_keywords=keywords,
    )


def _check_acyclic(parents: Mapping[str, tuple[str, ...]]) -> None:
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(node: str) -> None:
        if state.get(node) == 1:
            raise DomainError(f"category cycle through {node!r}")
        if state.get(node) == 2:
            return
        state[node] = 1
        for p in parents[node]:
            visit(p)
        state[node] = 2

    for name in parents:
        visit(name)


# ---------------------------------------------------------------------------
# Ontology queries
# ---------------------------------------------------------------------------


def category_closure(domain: Domain, type_name: str) -> frozenset[str]:
    etype = domain.entity_type(type_name)
    out: set[str] = set()
    frontier = list(etype.categories)
    while frontier:
        cat = frontier.pop()
        if cat in out:
            continue
        out.add(cat)
        frontier.extend(domain.category_parents.get(cat, ()))
    return frozenset(out)


def is_a(domain: Domain, type_name: str, category: str) -> bool:
    """True iff ``category`` is the type itself or transitively reachable."""
    type_name = type_name.lower()
    category = category.lower()
    if type_name not in domain.entity_types:
        raise DomainError(f"unknown entity type {type_name!r}")
    if type_name == category:
        return True
    return category in category_closure(domain, type_name)


def satisfies_requirement(domain: Domain, world: World, arg: Arg, requires: str) -> bool:
    """Does a ground arg satisfy a param requirement?"""
    if requires == REQ_TEXT:
        return isinstance(arg, TextArg)
    if isinstance(arg, TextArg):
        return False
    if requires == REQ_PLACE:
        return isinstance(arg, (RegionArg, EntityArg))
    if isinstance(arg, RegionArg):
        return False
    if isinstance(arg, EntityArg):
        rec = world.entity(arg.id)
        if rec is None:
            return False
        return is_a(domain, rec.type, requires)
    return False


# ---------------------------------------------------------------------------
# World queries and updates
# ---------------------------------------------------------------------------


def entities_at(world: World, location: str, category: Optional[str] = None,
                domain: Optional[Domain] = None) -> list[str]:
    """Entity ids whose location resolves (transitively) to ``location``.

    Results are sorted lexicographically so planner choices are stable.
    """
    if not world.has_location(location):
        raise WorldError(f"unknown location {location!r}")
    out = []
    for rec in world.entities:
        if not _contained_in(world, rec, location):
            continue
        if category is not None:
            if domain is None:
                raise WorldError("category filter requires a domain")
            if not is_a(domain, rec.type, category):
                continue
        out.append(rec.id)
    return sorted(out)


def _contained_in(world: World, rec: EntityRecord, location: str) -> bool:
    current = rec.location
    seen = set()
    while True:
        if current == location:
            return True
        if current in world.regions or current in seen:
            return False
        seen.add(current)
        inner = world.entity(current)
        if inner is None:
            return False
        current = inner.location


def fresh_entity_id(world: World, entity_type: str) -> str:
    taken = {rec.id for rec in world.entities}
    if world.holding is not None:
        taken.add(world.holding.id)
    if entity_type not in taken:
        return entity_type
    n = 2
    while f"{entity_type}_{n}" in taken:
        n += 1
    return f"{entity_type}_{n}"


def world_insert(world: World, domain: Domain, entity_type: str, location: str,
                 provenance: str, units: int = 1,
                 entity_id: Optional[str] = None) -> tuple[World, str]:
    """Insert a fresh entity; returns the new world and the assigned id."""
    entity_type = entity_type.lower()
    if entity_type not in domain.entity_types:
        raise DomainError(f"unknown entity type {entity_type!r}")
    if not world.has_location(location):
        raise WorldError(f"unknown location {location!r}")
    new_id = entity_id or fresh_entity_id(world, entity_type)
    if world.entity(new_id) is not None:
        raise WorldError(f"entity id {new_id!r} already exists")
    rec = EntityRecord(new_id, entity_type, location, provenance, units)
    return replace(world, entities=world.entities + (rec,)), new_id


def world_remove(world: World, entity_id: str) -> World:
    if world.entity(entity_id) is None:
        raise WorldError(f"unknown entity {entity_id!r}")
    return replace(world, entities=tuple(r for r in world.entities if r.id != entity_id))


def _matches_class(domain: Domain, rec: EntityRecord, term: str) -> bool:
    if term.startswith("category:"):
        return is_a(domain, rec.type, term.split(":", 1)[1])
    if term.startswith("type:"):
        return rec.type == term.split(":", 1)[1]
    return rec.id == term


def eval_predicate(world: World, predicate: Predicate, domain: Domain) -> bool:
    """Closed-world truth value of a ground predicate."""
    args = predicate.args
    for a in args:
        if a == ROBOT_HERE:
            raise WorldError(f"predicate {predicate.text()} not ground: {ROBOT_HERE}")
    if predicate.name == "hands_free":
        return world.holding is None
    if predicate.name == "holding":
        (term,) = args
        if world.holding is None:
            return False
        if term.startswith(("category:", "type:")):
            held = EntityRecord(world.holding.id, world.holding.type, "", world.holding.provenance)
            return _matches_class(domain, held, term)
        return world.holding.id == term
    if predicate.name == "robot_at":
        (loc,) = args
        return world.robot_at == loc
    if predicate.name == "exists":
        (term,) = args
        return any(_matches_class(domain, rec, term) for rec in world.entities)
    if predicate.name == "at":
        term, loc = args
        if not world.has_location(loc):
            return False
        if term.startswith("category:") and term.split(":", 1)[1] == "person":
            if world.region_of(loc) in world.asserted_persons:
                return True
        for rec in world.entities:
            if rec.units < 1:
                continue
            if _matches_class(domain, rec, term) and _contained_in(world, rec, loc):
                return True
        return False
    raise WorldError(f"unknown predicate {predicate.name!r}")


def ground_predicates(predicates: Iterable[Predicate], bindings: Mapping[str, str],
                      robot_region: str) -> tuple[Predicate, ...]:
    """Substitute params and resolve ``@robot`` to a concrete region."""
    full = dict(bindings)
    full[ROBOT_HERE] = robot_region
    return tuple(p.substitute(full) for p in predicates)


def command_bindings(schema: CommandSchema, command: Command) -> dict[str, str]:
    bindings = {}
    for param, arg in zip(schema.params, command.args):
        if isinstance(arg, (EntityArg, RegionArg)):
            bindings[param.name] = arg.id
        elif isinstance(arg, TextArg):
            bindings[param.name] = arg.text
    return bindings


def preconditions_hold(domain: Domain, world: World, command: Command) -> bool:
    schema = domain.schema(command.schema)
    bindings = command_bindings(schema, command)
    preds = ground_predicates(schema.preconditions, bindings, world.robot_region())
    return all(eval_predicate(world, p, domain) for p in preds)


def apply_command(domain: Domain, world: World, command: Command) -> World:
    """Apply a fully instantiated command's effects. Preconditions are not
    checked here; callers decide whether a violation is a fault or a dead end.
    """
    if command.is_partial:
        raise WorldError(f"cannot apply partial command {command.token()}")
    schema = domain.schema(command.schema)
    if schema.kind == EVENT:
        return _apply_event(world, schema)
    name = command.schema
    if name == "moveTo":
        target = command.args[0].id
        if not world.has_location(target):
            raise WorldError(f"moveTo target {target!r} does not exist")
        return replace(world, robot_at=target)
    if name == "grab":
        return _apply_grab(world, command.args[0].id)
    if name == "put":
        return _apply_put(world, command.args[0].id, command.args[1].id)
    # say / ask / tell / idle: no world change
    return world


def _apply_event(world: World, schema: CommandSchema) -> World:
    # Events assert observed facts; a person arriving is noted per region
    # rather than materialized as an entity (no penalty-3 accounting).
    for post in schema.postconditions:
        if post.name == "at" and post.args[0] == "category:person":
            return replace(world, asserted_persons=world.asserted_persons | {world.robot_region()})
    return world


def _apply_grab(world: World, entity_id: str) -> World:
    rec = world.entity(entity_id)
    if rec is None:
        raise WorldError(f"grab of missing entity {entity_id!r}")
    held = HeldItem(rec.id, rec.type, rec.provenance)
    if rec.units > 1:
        entities = tuple(
            replace(r, units=r.units - 1) if r.id == rec.id else r for r in world.entities
        )
        return replace(world, entities=entities, holding=held)
    entities = tuple(
        replace(r, location=rec.location) if r.location == rec.id else r
        for r in world.entities if r.id != rec.id
    )
    robot_at = world.robot_at
    if robot_at == rec.id:
        # the robot was standing at the thing it just picked up
        robot_at = rec.location
    return replace(world, entities=entities, robot_at=robot_at, holding=held)


def _apply_put(world: World, entity_id: str, place: str) -> World:
    held = world.holding
    if held is None or held.id != entity_id:
        raise WorldError(f"put of {entity_id!r} while not holding it")
    if not world.has_location(place):
        raise WorldError(f"put target {place!r} does not exist")
    new_id = fresh_entity_id(world, held.type) if world.entity(held.id) else held.id
    rec = EntityRecord(new_id, held.type, place, held.provenance, 1)
    return replace(world, entities=world.entities + (rec,), holding=None)
