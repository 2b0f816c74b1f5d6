"""Trace planning: A* search over world states guided by the sketch.

The search makes the four calls the synthesizer owns: where core commands
land, how holes resolve, which repair actions get inserted so preconditions
hold, and which entities must be added to the world. Costs: every non-idle
command costs 1, a visited location where the robot does nothing costs an
extra 2, and every world insertion costs 5 (fabricating world facts is the
worst failure mode, so it dominates).
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Optional

from .errors import BudgetExhaustedError, PlanError, UnresolvableHoleError
from .geomap import MapModel, RegionSequence
from .knowledge import (
    IDLE,
    REQ_PLACE,
    REQ_TEXT,
    Command,
    Domain,
    EntityArg,
    HeldItem,
    Hole,
    Predicate,
    RegionArg,
    World,
    apply_command,
    entities_at,
    eval_predicate,
    is_a,
    preconditions_hold,
    sorted_world,
    world_insert,
)
from .language import CoreCommand

W_LEN = 1
W_VISIT = 2
W_INSERT = 5
DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class TraceStep:
    event: Optional[Command]  # None is the empty event
    action: Command
    at: str  # robot location after the action


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]
    # entity id -> type for every entity referenced; lets the assembler write
    # type-level loop guards without re-querying a world
    entity_types: tuple[tuple[str, str], ...] = ()

    def commands(self) -> list[Command]:
        out = []
        for step in self.steps:
            if step.event is not None:
                out.append(step.event)
            out.append(step.action)
        return out

    def type_of(self, entity_id: str) -> Optional[str]:
        for eid, etype in self.entity_types:
            if eid == entity_id:
                return etype
        return None


@dataclass(frozen=True)
class WorldDelta:
    insertions: tuple[tuple[str, str, str], ...] = ()  # (entity type, location, id)


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------


def cost_of(trace: Trace, delta: WorldDelta, map_model: Optional[MapModel] = None) -> int:
    """Recompute a trace's penalty total from scratch."""
    length = 0
    for step in trace.steps:
        if step.event is not None:
            length += 1
        if step.action.schema != "idle":
            length += 1
    visits = 0
    steps = trace.steps
    for i, step in enumerate(steps):
        if step.action.schema != "moveTo":
            continue
        acted = False
        for later in steps[i + 1:]:
            if later.action.schema == "moveTo":
                break
            if later.action.schema != "idle":
                acted = True
                break
        if not acted:
            visits += 1
    return W_LEN * length + W_VISIT * visits + W_INSERT * len(delta.insertions)


# ---------------------------------------------------------------------------
# Hole resolution
# ---------------------------------------------------------------------------


def _hole_filter_types(domain: Domain, hole: Hole) -> list[str]:
    """Domain entity types that could fill the hole, lexicographically."""
    if hole.type_name is not None:
        return [hole.type_name] if hole.type_name in domain.entity_types else []
    if hole.category in (None, REQ_PLACE):
        return sorted(domain.entity_types)
    if hole.category == REQ_TEXT:
        return []
    return sorted(t for t in domain.entity_types if is_a(domain, t, hole.category))


def _entity_fits_hole(domain: Domain, world: World, entity_id: str, hole: Hole) -> bool:
    rec = world.entity(entity_id)
    if rec is None:
        return False
    if hole.type_name is not None and rec.type != hole.type_name:
        return False
    if hole.category not in (None, REQ_PLACE) and not is_a(domain, rec.type, hole.category):
        return False
    return True


def resolve_hole(domain: Domain, world: World, partial: Command, here: str) -> Command:
    """Fill each hole with the lexicographically least entity at ``here``.

    When nothing at ``here`` fits, the search considers penalized insertions
    instead; this standalone form raises. A hole nothing in the whole domain
    could ever fill is reported as unresolvable.
    """
    if not partial.is_partial:
        return partial
    args = []
    for arg in partial.args:
        if not isinstance(arg, Hole):
            args.append(arg)
            continue
        if arg.category == REQ_TEXT:
            raise UnresolvableHoleError(f"{partial.token()}: speech cannot be synthesized")
        if not _hole_filter_types(domain, arg):
            raise UnresolvableHoleError(
                f"{partial.token()}: no entity type in the domain fits {arg.token()}")
        candidates = [e for e in entities_at(world, here)
                      if _entity_fits_hole(domain, world, e, arg)]
        if not candidates:
            raise PlanError(f"{partial.token()}: no candidate for {arg.token()} at {here!r}")
        args.append(EntityArg(candidates[0]))
    return Command(partial.schema, tuple(args))


# ---------------------------------------------------------------------------
# Search nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchNode:
    world: World
    seq_index: int
    cores_done: int
    steps: tuple[TraceStep, ...]
    g: int
    pending_event: Optional[Command] = None
    acted_since_move: bool = False
    moved_yet: bool = False
    finished: bool = False
    seq_step_indices: tuple[int, ...] = ()
    insertions: tuple[tuple[str, str, str], ...] = ()
    lexkey: str = ""

    def state_key(self):
        w = sorted_world(self.world)
        return (w, self.seq_index, self.cores_done, self.pending_event,
                self.acted_since_move, self.moved_yet, self.finished)


def heuristic(node: SearchNode, seq, cores: list[CoreCommand]) -> int:
    """Admissible lower bound: one command per remaining region and per
    remaining core that is not itself a moveTo."""
    regions = getattr(seq, "regions", seq)
    remaining_regions = len(regions) - node.seq_index
    remaining_cores = sum(
        1 for c in cores[node.cores_done:] if c.command.schema != "moveTo"
    )
    return remaining_regions + remaining_cores


# ---------------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------------


class _Planner:
    def __init__(self, domain: Domain, world: World, cores: list[CoreCommand],
                 plan_seq: tuple[str, ...], budget: int, trace_search: bool = False):
        self.domain = domain
        self.cores = cores
        self.plan_seq = plan_seq
        self.budget = budget
        self.start_world = world
        self.trace_search = trace_search
        self.search_edges: list[tuple[str, str, str]] = []  # (parent, child, step)

    # -- successor helpers --------------------------------------------------

    def _emit(self, node: SearchNode, action: Command, world: World, cost: int,
              token: str, *, advances_seq: bool = False,
              inserts: tuple[tuple[str, str, str], ...] = (),
              consumes_core: bool = False) -> SearchNode:
        visit_penalty = 0
        is_move = action.schema == "moveTo"
        if is_move and node.moved_yet and not node.acted_since_move:
            visit_penalty = W_VISIT
        at = world.robot_at
        step = TraceStep(node.pending_event, action, at)
        seq_marks = node.seq_step_indices
        if advances_seq:
            seq_marks = seq_marks + (len(node.steps),)
        return SearchNode(
            world=world,
            seq_index=node.seq_index + (1 if advances_seq else 0),
            cores_done=node.cores_done + (1 if consumes_core else 0),
            steps=node.steps + (step,),
            g=node.g + cost + visit_penalty,
            pending_event=None,
            acted_since_move=(not is_move and action.schema != "idle") or
                             (node.acted_since_move and not is_move),
            moved_yet=node.moved_yet or is_move,
            finished=False,
            seq_step_indices=seq_marks,
            insertions=node.insertions + inserts,
            lexkey=node.lexkey + token + "\n",
        )

    def _insert(self, world: World, entity_type: str
                ) -> tuple[World, str, tuple[str, str, str]]:
        region = world.robot_region()
        new_world, eid = world_insert(world, self.domain, entity_type, region, "synthesized")
        return new_world, eid, (entity_type, region, eid)

    def _move_targets(self, node: SearchNode) -> Iterator[tuple[Command, World, tuple, str]]:
        region = self.plan_seq[node.seq_index]
        targets: list[tuple[str, World, tuple]] = [(region, node.world, ())]
        for eid in entities_at(node.world, region):
            targets.append((eid, node.world, ()))
        # A core that must happen at an entity which does not exist yet can
        # force the move target into existence (toy chest in the living room).
        hole = self._pending_entity_hole(node)
        if hole is not None:
            present = any(_entity_fits_hole(self.domain, node.world, e, hole)
                          for e in entities_at(node.world, region))
            if not present:
                types = _hole_filter_types(self.domain, hole)
                if types:
                    w, eid, ins = self._insert_at(node.world, types[0], region)
                    targets.append((eid, w, (ins,)))
        for target, world, inserts in targets:
            arg = RegionArg(target) if target in node.world.regions else EntityArg(target)
            cmd = Command("moveTo", (arg,))
            moved = apply_command(self.domain, world, cmd)
            token = "".join(f"+{t}@{r}" for t, r, _ in inserts) + cmd.token()
            yield cmd, moved, inserts, token

    def _insert_at(self, world: World, entity_type: str, region: str):
        new_world, eid = world_insert(world, self.domain, entity_type, region, "synthesized")
        return new_world, eid, (entity_type, region, eid)

    def _pending_entity_hole(self, node: SearchNode) -> Optional[Hole]:
        # The next action core's first hole whose schema precondition pins the
        # robot to the entity itself (put's place).
        core = self._next_core(node)
        if core is None or core.gate:
            return None
        schema = self.domain.schema(core.command.schema)
        at_robot = {p.args[0] for p in schema.preconditions if p.name == "robot_at"}
        for param, arg in zip(schema.params, core.command.args):
            if param.name in at_robot and isinstance(arg, Hole):
                return arg
        return None

    def _next_core(self, node: SearchNode) -> Optional[CoreCommand]:
        if node.cores_done < len(self.cores):
            return self.cores[node.cores_done]
        return None

    def _ground_options(self, node: SearchNode, command: Command
                        ) -> Iterator[tuple[Command, World, tuple]]:
        """All deterministic groundings of a core at the current location.

        Each hole prefers, in order: the held item (when the schema requires
        holding it), the place the robot is standing at (when the schema pins
        the robot there), the lexicographically least fitting entity in the
        robot's region, and finally a penalized insertion.
        """
        schema = self.domain.schema(command.schema)
        region = node.world.robot_region()
        holding_params = {p.args[0] for p in schema.preconditions if p.name == "holding"}
        at_robot_params = {p.args[0] for p in schema.preconditions if p.name == "robot_at"}
        dest_params = {p.args[0] for p in schema.postconditions if p.name == "robot_at"}
        dest_region = (self.plan_seq[node.seq_index]
                       if node.seq_index < len(self.plan_seq) else region)

        def candidates_for(param, hole: Hole) -> list[tuple]:
            # each option is (arg or None-for-insert, (insert type, region))
            out: list[tuple] = []
            if param.name in dest_params:
                # a destination hole resolves against where the sketch points
                if hole.type_name is None and hole.category in (None, REQ_PLACE):
                    out.append((RegionArg(dest_region), ()))
                fitting = [e for e in entities_at(node.world, dest_region)
                           if _entity_fits_hole(self.domain, node.world, e, hole)]
                if fitting:
                    out.append((EntityArg(fitting[0]), ()))
                types = _hole_filter_types(self.domain, hole)
                if types:
                    out.append((None, (types[0], dest_region)))
                return out
            held = node.world.holding
            if param.name in holding_params and held is not None:
                if ((hole.type_name is None or held.type == hole.type_name)
                        and (hole.category in (None, REQ_PLACE)
                             or is_a(self.domain, held.type, hole.category))):
                    out.append((EntityArg(held.id), ()))
            if param.name in at_robot_params:
                standing = node.world.robot_at
                if standing not in node.world.regions and _entity_fits_hole(
                        self.domain, node.world, standing, hole):
                    out.append((EntityArg(standing), ()))
            fitting = [e for e in entities_at(node.world, region)
                       if _entity_fits_hole(self.domain, node.world, e, hole)]
            if fitting:
                out.append((EntityArg(fitting[0]), ()))
            types = _hole_filter_types(self.domain, hole)
            if types:
                out.append((None, (types[0], region)))
            seen = set()
            unique = []
            for arg, ins in out:
                key = (getattr(arg, "id", None), ins)
                if key not in seen:
                    seen.add(key)
                    unique.append((arg, ins))
            return unique

        per_arg: list[list] = []
        for param, arg in zip(schema.params, command.args):
            if isinstance(arg, Hole):
                if arg.category == REQ_TEXT:
                    return  # speech holes are unresolvable at plan time
                options = candidates_for(param, arg)
                if not options:
                    return
                per_arg.append(options)
            else:
                per_arg.append([(arg, ())])

        for combo in itertools.product(*per_arg):
            world = node.world
            inserts: tuple = ()
            args = []
            ok = True
            for arg, pending in combo:
                if arg is None:
                    try:
                        etype, where = pending
                        world, eid, ins = self._insert_at(world, etype, where)
                    except Exception:
                        ok = False
                        break
                    inserts += (ins,)
                    args.append(EntityArg(eid))
                else:
                    args.append(arg)
            if not ok:
                continue
            yield Command(command.schema, tuple(args)), world, inserts

    def _consume_action_successors(self, node: SearchNode) -> Iterator[SearchNode]:
        core = self._next_core(node)
        assert core is not None and not core.gate
        schema = self.domain.schema(core.command.schema)
        for cmd, world, inserts in self._ground_options(node, core.command):
            variants = [(world, inserts)]
            if _needs_person(self.domain, schema) and not eval_predicate(
                    world, Predicate("at", ("category:person", world.robot_region())),
                    self.domain):
                try:
                    w2, _eid, ins2 = self._insert(world, "person")
                    variants.append((w2, inserts + (ins2,)))
                except Exception:
                    pass
            for vworld, vinserts in variants:
                if not preconditions_hold(self.domain, vworld, cmd):
                    continue
                applied = apply_command(self.domain, vworld, cmd)
                advances = False
                if cmd.schema == "moveTo" and node.seq_index < len(self.plan_seq):
                    target = cmd.args[0].id
                    wanted = self.plan_seq[node.seq_index]
                    if target == wanted or (
                            vworld.has_location(target)
                            and vworld.region_of(target) == wanted):
                        advances = True
                token = "".join(f"+{t}@{r}" for t, r, _ in vinserts) + cmd.token()
                yield self._emit(node, cmd, applied, W_LEN + W_INSERT * len(vinserts),
                                 token, advances_seq=advances,
                                 inserts=vinserts, consumes_core=True)

    def _consume_event_successor(self, node: SearchNode) -> Iterator[SearchNode]:
        core = self._next_core(node)
        assert core is not None and core.gate
        base = node
        if node.pending_event is not None:
            # two gates in a row: park an idle action between the event edges
            base = self._emit(node, IDLE, node.world, 0, "idle")
        world = apply_command(self.domain, base.world, core.command)
        yield SearchNode(
            world=world,
            seq_index=base.seq_index,
            cores_done=base.cores_done + 1,
            steps=base.steps,
            g=base.g + W_LEN,
            pending_event=core.command,
            acted_since_move=base.acted_since_move,
            moved_yet=base.moved_yet,
            finished=False,
            seq_step_indices=base.seq_step_indices,
            insertions=base.insertions,
            lexkey=base.lexkey + "!" + core.command.token() + "\n",
        )

    def _repair_successors(self, node: SearchNode) -> Iterator[SearchNode]:
        core = self._next_core(node)
        if core is None or core.gate:
            return
        schema = self.domain.schema(core.command.schema)
        holding_params = {p.args[0] for p in schema.preconditions if p.name == "holding"}
        if not holding_params or node.world.holding is not None:
            return
        region = node.world.robot_region()
        for param, arg in zip(schema.params, core.command.args):
            if param.name not in holding_params:
                continue
            grabs: list[tuple[str, World, tuple]] = []
            if isinstance(arg, EntityArg):
                rec = node.world.entity(arg.id)
                if rec is not None and rec.id in entities_at(node.world, region):
                    grabs.append((arg.id, node.world, ()))
            elif isinstance(arg, Hole):
                fitting = [e for e in entities_at(node.world, region)
                           if _entity_fits_hole(self.domain, node.world, e, arg)]
                if fitting:
                    grabs.append((fitting[0], node.world, ()))
                else:
                    types = _hole_filter_types(self.domain, arg)
                    if types:
                        world, eid, ins = self._insert(node.world, types[0])
                        grabs.append((eid, world, (ins,)))
            for eid, world, inserts in grabs:
                cmd = Command("grab", (EntityArg(eid),))
                if not preconditions_hold(self.domain, world, cmd):
                    continue
                applied = apply_command(self.domain, world, cmd)
                token = "".join(f"+{t}@{r}" for t, r, _ in inserts) + cmd.token()
                yield self._emit(node, cmd, applied, W_LEN + W_INSERT * len(inserts),
                                 token, inserts=inserts)

    def _successors(self, node: SearchNode) -> Iterator[SearchNode]:
        if node.finished:
            return
        core = self._next_core(node)
        if core is not None and core.gate:
            # A gate blocks everything until its event edge is placed.
            yield from self._consume_event_successor(node)
            return
        if core is not None:
            yield from self._consume_action_successors(node)
            yield from self._repair_successors(node)
        if node.seq_index < len(self.plan_seq):
            for cmd, world, inserts, token in self._move_targets(node):
                yield self._emit(node, cmd, world, W_LEN + W_INSERT * len(inserts),
                                 token, advances_seq=True, inserts=inserts)

    def _finish(self, node: SearchNode) -> SearchNode:
        penalty = W_VISIT if node.moved_yet and not node.acted_since_move else 0
        steps = node.steps
        g = node.g + penalty
        lexkey = node.lexkey + "$"
        if node.pending_event is not None:
            flushed = self._emit(node, IDLE, node.world, 0, "idle")
            steps, g, lexkey = flushed.steps, flushed.g + penalty, flushed.lexkey + "$"
        return replace(node, steps=steps, g=g, lexkey=lexkey, finished=True,
                       pending_event=None)

    def _is_goal_ready(self, node: SearchNode) -> bool:
        return (node.seq_index == len(self.plan_seq)
                and node.cores_done == len(self.cores))

    # -- main loop -----------------------------------------------------------

    def search(self) -> SearchNode:
        start = SearchNode(
            world=self.start_world,
            seq_index=0,
            cores_done=0,
            steps=(TraceStep(None, IDLE, self.start_world.robot_at),),
            g=0,
        )
        counter = itertools.count()
        seq = self.plan_seq
        open_heap: list = []

        def push(n: SearchNode):
            h = 0 if n.finished else heuristic(n, seq, self.cores)
            heapq.heappush(open_heap, (n.g + h, len(n.steps), n.lexkey, next(counter), n))

        push(start)
        best: dict = {}
        expansions = 0
        while open_heap:
            _f, _len, _lex, _c, node = heapq.heappop(open_heap)
            if node.finished:
                return node
            key = node.state_key()
            mark = (node.g, len(node.steps), node.lexkey)
            if key in best and best[key] <= mark:
                continue
            best[key] = mark
            expansions += 1
            if expansions > self.budget:
                raise BudgetExhaustedError(
                    f"no plan within {self.budget} node expansions")
            if self._is_goal_ready(node):
                push(self._finish(node))
            for succ in self._successors(node):
                skey = succ.state_key()
                smark = (succ.g, len(succ.steps), succ.lexkey)
                if self.trace_search:
                    self.search_edges.append(
                        (node.lexkey, succ.lexkey, succ.lexkey[len(node.lexkey):]))
                if skey in best and best[skey] <= smark:
                    continue
                push(succ)
        raise PlanError("no plan: search space exhausted")


def _needs_person(domain: Domain, schema) -> bool:
    return any(p.name == "at" and p.args and p.args[0] == "category:person"
               for p in schema.preconditions)


# ---------------------------------------------------------------------------
# Loop mirroring
# ---------------------------------------------------------------------------


def _mirror_iteration(domain: Domain, world_after: World, steps: tuple[TraceStep, ...],
                      m0: int, m1: int) -> tuple[TraceStep, ...]:
    """Second loop iteration: same per-location steps as the first.

    The entry event survives only if it fired while the robot was already at
    a loop location; a gate that fired before the loop belongs to the lead-in
    and the second iteration is entered silently.
    """
    body = steps[m0:m1]
    body_locs = {s.at for s in body} | {world_after.region_of(s.at) for s in body
                                        if world_after.has_location(s.at)}
    entry_loc = steps[m0 - 1].at if m0 > 0 else None
    mirrored = []
    for i, step in enumerate(body):
        event = step.event
        if i == 0 and event is not None and entry_loc is not None:
            region = world_after.region_of(entry_loc) if world_after.has_location(entry_loc) else entry_loc
            if entry_loc not in body_locs and region not in body_locs:
                event = None
        mirrored.append(TraceStep(event, step.action, step.at))
    return tuple(mirrored)


def simulate_steps(domain: Domain, world: World, steps, sources: Optional[dict] = None
                   ) -> World:
    """Replay trace steps, honoring replenishable sources for repeat grabs."""
    sources = sources or {}
    for step in steps:
        if step.event is not None:
            world = apply_command(domain, world, step.event)
        cmd = step.action
        if not preconditions_hold(domain, world, cmd):
            if cmd.schema == "grab":
                eid = cmd.args[0].id
                key = (eid, world.robot_region())
                if key in sources and world.holding is None:
                    etype, prov = sources[key]
                    world = replace(world, holding=HeldItem(eid, etype, prov))
                    continue
            raise PlanError(f"trace replay violates preconditions at {cmd.token()}")
        world = apply_command(domain, world, cmd)
    return world


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def plan_trace(domain: Domain, world: World, cores: list[CoreCommand],
               seq: RegionSequence, loop=None, budget: int = DEFAULT_BUDGET,
               map_model: Optional[MapModel] = None,
               debug_dot: Optional[str] = None) -> tuple[Trace, WorldDelta]:
    """Find the minimum-cost trace satisfying the sketch and the core commands.

    ``seq`` is the (possibly loop-extended) region sequence; ``loop`` is the
    loop descriptor from the assembler when one was detected. Ties break by
    (cost, trace length, lexicographic serialization) so identical inputs
    always yield identical traces. ``debug_dot`` names a file to dump the
    explored search graph into, as DOT.
    """
    regions = tuple(seq.regions)
    _check_resolvable(domain, cores)
    if loop is not None:
        prefix_len = loop.start_index
        body_len = len(loop.body)
        plan_seq = regions[:prefix_len + body_len] + regions[prefix_len + 2 * body_len:]
        tail_len = len(regions) - (prefix_len + 2 * body_len)
    else:
        plan_seq = regions
        tail_len = 0

    for r in plan_seq:
        if r not in world.regions:
            raise PlanError(f"sketched region {r!r} is not in the world")

    planner = _Planner(domain, world, cores, plan_seq, budget,
                       trace_search=debug_dot is not None)
    goal = planner.search()
    if debug_dot is not None:
        with open(debug_dot, "w", encoding="utf-8") as fh:
            fh.write(search_graph_dot(planner.search_edges, goal.lexkey))
    steps = goal.steps
    delta = WorldDelta(tuple((t, r, e) for t, r, e in goal.insertions))

    if loop is not None:
        prefix_len = loop.start_index
        marks = goal.seq_step_indices
        m0 = marks[prefix_len]
        m1 = marks[prefix_len + len(loop.body)] if tail_len else len(steps)
        planned_world = goal.world
        sources = _collect_sources(domain, world, delta, steps[m0:m1])
        mirrored = _mirror_iteration(domain, planned_world, steps, m0, m1)
        steps = steps[:m1] + mirrored + steps[m1:]
        # full replay from the start validates the spliced trace
        start_world = _world_plus_delta(domain, world, delta)
        simulate_steps(domain, start_world, steps[1:], sources)

    trace = Trace(steps, entity_types=_trace_entity_types(domain, world, delta, steps))
    return trace, delta


def search_graph_dot(edges: list[tuple[str, str, str]], goal_key: str = "") -> str:
    """Explored search graph as DOT; node identity is the trace prefix."""
    def quote(text: str) -> str:
        return '"%s"' % text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")

    names: dict[str, str] = {}

    def name(key: str) -> str:
        if key not in names:
            names[key] = f"n{len(names)}"
        return names[key]

    lines = ["digraph search {", "  rankdir=LR;", "  node [shape=point];"]
    body = []
    for parent, child, step in edges:
        body.append(f"  {name(parent)} -> {name(child)} [label={quote(step.strip())}];")
    for key, node in names.items():
        if key and goal_key.startswith(key):
            lines.append(f"  {node} [shape=circle, width=0.1, color=forestgreen];")
    lines.extend(body)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _check_resolvable(domain: Domain, cores: list[CoreCommand]) -> None:
    for core in cores:
        for arg in core.command.args:
            if isinstance(arg, Hole):
                if arg.category == REQ_TEXT:
                    raise UnresolvableHoleError(
                        f"{core.command.token()}: speech cannot be synthesized")
                if not _hole_filter_types(domain, arg):
                    raise UnresolvableHoleError(
                        f"{core.command.token()}: nothing in the domain fits {arg.token()}")


def _world_plus_delta(domain: Domain, world: World, delta: WorldDelta) -> World:
    for etype, region, eid in delta.insertions:
        world, _ = world_insert(world, domain, etype, region, "synthesized", entity_id=eid)
    return world


def _collect_sources(domain: Domain, world: World, delta: WorldDelta, body) -> dict:
    """Locations a loop body grabs from act as one-unit-per-visit sources."""
    base = _world_plus_delta(domain, world, delta)
    sources = {}
    for step in body:
        if step.action.schema == "grab":
            eid = step.action.args[0].id
            rec = base.entity(eid)
            region = base.region_of(step.at) if base.has_location(step.at) else step.at
            if rec is not None:
                sources[(eid, region)] = (rec.type, rec.provenance)
    return sources


def _trace_entity_types(domain: Domain, world: World, delta: WorldDelta, steps) -> tuple:
    base = _world_plus_delta(domain, world, delta)
    out = {}
    for step in steps:
        cmds = [step.action] + ([step.event] if step.event else [])
        for cmd in cmds:
            for arg in cmd.args:
                if isinstance(arg, EntityArg) and arg.id not in out:
                    rec = base.entity(arg.id)
                    if rec is not None:
                        out[arg.id] = rec.type
    return tuple(sorted(out.items()))
