"""Automaton assembly: loop extension before planning, folding a planned
trace into a looping program, and attaching branch recordings.

A program is a finite automaton whose states carry actions and whose
transitions carry events, the empty event, or a loop-exit guard.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .errors import AmbiguousLoopError, FoldMismatchError, SketchSynthError
from .geomap import RegionSequence
from .knowledge import Command, Domain, Predicate
from .planner import Trace

EPSILON = "epsilon"
EVENT_LABEL = "event"
GUARDED = "guarded"   # empty event taken only while the guard holds
EXIT = "exit"         # taken when the paired guard fails


@dataclass(frozen=True)
class LoopDescriptor:
    body: tuple[str, ...]
    start_index: int


@dataclass(frozen=True)
class Label:
    kind: str  # EPSILON, EVENT_LABEL, GUARDED, EXIT
    event: Optional[Command] = None
    guard: tuple[Predicate, ...] = ()

    def token(self) -> str:
        if self.kind == EVENT_LABEL:
            return self.event.token()
        if self.kind == GUARDED:
            return "while " + " & ".join(p.text() for p in self.guard)
        if self.kind == EXIT:
            return "exit: not " + " & ".join(p.text() for p in self.guard)
        return "."


@dataclass(frozen=True)
class State:
    id: str
    action: Command
    location: Optional[str] = None  # robot location after the action


@dataclass(frozen=True)
class Transition:
    src: str
    label: Label
    dst: Optional[str]  # None halts the program


@dataclass(frozen=True)
class AttachmentPoint:
    region: str
    host_recording: str


@dataclass(frozen=True)
class Program:
    states: tuple[State, ...] = ()
    transitions: tuple[Transition, ...] = ()
    initial: str = "s0"
    diagnostics: tuple[str, ...] = ()

    def state(self, state_id: str) -> State:
        for s in self.states:
            if s.id == state_id:
                return s
        raise SketchSynthError(f"unknown state {state_id!r}")

    def outgoing(self, state_id: str) -> list[Transition]:
        return [t for t in self.transitions if t.src == state_id]


# ---------------------------------------------------------------------------
# Loop detection and extension
# ---------------------------------------------------------------------------


def detect_and_extend(seq: RegionSequence,
                      diagnostics: Optional[list[str]] = None
                      ) -> tuple[RegionSequence, Optional[LoopDescriptor]]:
    """Find a repeated region, treat first-to-second occurrence as the loop
    body, and extend the sequence so the body occurs exactly twice.

    The repeat may continue past the second lap (extra laps fold into the
    same loop, with a diagnostic) and may be followed by a tail of fresh
    regions. A tail that re-enters the loop is rejected as ambiguous.
    """
    regions = seq.regions
    first_seen: dict[str, int] = {}
    head_index = None
    for i, r in enumerate(regions):
        if r in first_seen:
            head_index = first_seen[r]
            break
        first_seen[r] = i
    if head_index is None:
        return seq, None

    head = regions[head_index]
    second = regions.index(head, head_index + 1)
    body = regions[head_index:second]
    prefix = regions[:head_index]

    # the repeat continues cyclically for as long as it matches; whatever is
    # left after that is a tail executed once the loop is done
    remainder = regions[second:]
    matched = 0
    while matched < len(remainder) and remainder[matched] == body[matched % len(body)]:
        matched += 1
    tail = remainder[matched:]
    if any(r in body for r in tail):
        raise AmbiguousLoopError(
            f"region sequence {list(regions)} re-enters the loop {list(body)} "
            "after leaving it"
        )
    if matched > len(body) and diagnostics is not None:
        diagnostics.append(
            f"sketch laps the loop {list(body)} more than twice; extra laps fold "
            "into the same two-iteration loop"
        )

    extended = prefix + body + body + tail
    loop = LoopDescriptor(tuple(body), len(prefix))
    new_loops = frozenset(
        i for i in range(len(extended) - 1) if extended[i] == extended[i + 1]
    )
    return RegionSequence(tuple(extended), new_loops, seq.attachment), loop


# ---------------------------------------------------------------------------
# Folding a trace into a program
# ---------------------------------------------------------------------------


def _chain(states: list[State], transitions: list[Transition],
           steps, start_from: str, id_start: int, prefix: str = "s") -> str:
    """Append a linear chain of states for trace steps; returns last state id."""
    last = start_from
    n = id_start
    for step in steps:
        sid = f"{prefix}{n}"
        n += 1
        states.append(State(sid, step.action, step.at))
        if step.event is not None:
            label = Label(EVENT_LABEL, step.event)
        else:
            label = Label(EPSILON)
        transitions.append(Transition(last, label, sid))
        last = sid
    return last


def _guard_for(trace: Trace, body_steps) -> tuple[Predicate, ...]:
    """Exit guard: the loop's first precondition-bearing action, grounded at
    its planned location, lifted to the entity's type so any unit counts."""
    for step in body_steps:
        if step.action.schema == "grab":
            item = step.action.args[0].id
            etype = trace.type_of(item)
            term = f"type:{etype}" if etype else item
            region = step.at
            return (Predicate("hands_free"), Predicate("at", (term, region)))
        if step.action.schema == "put":
            return (Predicate("holding", (step.action.args[0].id,)),)
    return ()


def _split_iterations(trace: Trace, loop: LoopDescriptor, world=None) -> tuple[int, int, int]:
    """Step indices (m0, m1, m2): first iteration [m0, m1), second [m1, m2)."""
    steps = trace.steps
    head = loop.body[0]

    def satisfies(step):
        if step.action.schema != "moveTo":
            return False
        if step.at == head:
            return True
        return (world is not None and world.has_location(step.at)
                and world.region_of(step.at) == head)

    move_indices = [i for i, s in enumerate(steps) if satisfies(s)]
    if len(move_indices) < 2:
        raise FoldMismatchError(steps, "no second loop iteration found")
    m0, m1 = move_indices[0], move_indices[1]
    m2 = m1 + (m1 - m0)
    return m0, m1, m2


def fold(trace: Trace, loop: Optional[LoopDescriptor],
         domain: Optional[Domain] = None, world=None) -> Program:
    """Merge the second loop iteration onto the first and close the loop.

    The back edge carries the second iteration's entry event; a silent back
    edge is guarded by the loop's ability to keep going, with a paired exit.
    Loopless traces become a linear chain.
    """
    steps = trace.steps
    if not steps or steps[0].action.schema != "idle":
        raise FoldMismatchError(steps, "trace must begin with idle")

    states: list[State] = [State("s0", steps[0].action, steps[0].at)]
    transitions: list[Transition] = []

    if loop is None:
        _chain(states, transitions, steps[1:], "s0", 1)
        return Program(tuple(states), tuple(transitions), "s0")

    m0, m1, m2 = _split_iterations(trace, loop, world)
    first = steps[m0:m1]
    second = steps[m1:m2]
    _check_iterations_match(first, second)

    last_prefix = _chain(states, transitions, steps[1:m0], "s0", 1)
    loop_head_id = f"s{len(states)}"
    loop_tail_id = _chain(states, transitions, first, last_prefix, len(states))

    entry_event = second[0].event
    if entry_event is not None:
        back_label = Label(EVENT_LABEL, entry_event)
        exit_label = None
    else:
        guard = _guard_for(trace, first)
        if guard:
            back_label = Label(GUARDED, guard=guard)
            exit_label = Label(EXIT, guard=guard)
        else:
            back_label = Label(EPSILON)
            exit_label = None
    transitions.append(Transition(loop_tail_id, back_label, loop_head_id))

    tail_steps = steps[m2:]
    if tail_steps:
        first_tail_event = tail_steps[0].event
        tail_entry = exit_label if exit_label is not None else (
            Label(EVENT_LABEL, first_tail_event) if first_tail_event else Label(EPSILON))
        tail_first_id = f"s{len(states)}"
        _chain(states, transitions, tail_steps, loop_tail_id, len(states))
        # the chain added its own entry transition; replace it with the exit
        transitions = [t for t in transitions
                       if not (t.src == loop_tail_id and t.dst == tail_first_id)]
        transitions.append(Transition(loop_tail_id, tail_entry, tail_first_id))
    elif exit_label is not None:
        transitions.append(Transition(loop_tail_id, exit_label, None))

    return Program(tuple(states), tuple(transitions), "s0")


def _check_iterations_match(first, second) -> None:
    if len(first) != len(second):
        raise FoldMismatchError(first, second)
    for i, (a, b) in enumerate(zip(first, second)):
        if a.action != b.action or a.at != b.at:
            raise FoldMismatchError(first, second)
        if i > 0 and a.event != b.event:
            raise FoldMismatchError(first, second)


# ---------------------------------------------------------------------------
# Attaching branch recordings
# ---------------------------------------------------------------------------


def branch_guard(trace: Trace) -> tuple[Predicate, ...]:
    """Feasibility guard for an ungated branch: same derivation as loop exits."""
    return _guard_for(trace, trace.steps[1:])


def attach(host: Program, branch_trace: Trace, at: AttachmentPoint,
           gate: Optional[Command], world=None,
           guard: tuple[Predicate, ...] = ()) -> Program:
    """Graft a branch trace onto every state sitting at the attachment region.

    The branch fires on its gate event; with no gate it rides the empty event
    (guarded by feasibility when the branch starts with a grab). States of
    the branch itself count: a branch that returns to the attachment region
    re-arms there, which is how escort-style programs loop forever.
    """
    program, _spec = attach_program(host, fold(branch_trace, None), at, gate, world, guard)
    return program


@dataclass(frozen=True)
class AttachSpec:
    """A grafted branch's entry rule, re-appliable as later branches add
    states at the same region."""

    region: str
    label: Label
    target: str


def attach_program(host: Program, branch: Program, at: AttachmentPoint,
                   gate: Optional[Command], world=None,
                   guard: tuple[Predicate, ...] = ()
                   ) -> tuple[Program, Optional[AttachSpec]]:
    """Program-level attach; branches may carry their own folded loops."""
    initial_out = branch.outgoing(branch.initial)
    if not initial_out:
        return host, None
    if len(initial_out) != 1:
        raise SketchSynthError("branch program must have a single entry transition")

    rename: dict[str, str] = {}
    states = list(host.states)
    for s in branch.states:
        if s.id == branch.initial:
            continue
        new_id = f"s{len(states)}"
        rename[s.id] = new_id
        states.append(State(new_id, s.action, s.location))

    transitions = list(host.transitions)
    for t in branch.transitions:
        if t.src == branch.initial:
            continue
        transitions.append(Transition(
            rename[t.src], t.label, rename[t.dst] if t.dst is not None else None))

    if gate is not None:
        entry = Label(EVENT_LABEL, gate)
    elif guard:
        entry = Label(GUARDED, guard=guard)
    else:
        entry = Label(EPSILON)

    target = rename[initial_out[0].dst]
    merged = Program(tuple(states), tuple(transitions), host.initial,
                     host.diagnostics + branch.diagnostics)
    spec = AttachSpec(at.region, entry, target)
    return apply_attachments(merged, [spec], world), spec


def apply_attachments(program: Program, specs, world=None) -> Program:
    """Ensure every attachment's entry edge exists on every state at its
    region. Idempotent; run again after all branches are grafted so branches
    re-arm each other."""
    transitions = list(program.transitions)
    existing = {(t.src, t.label, t.dst) for t in transitions}
    for spec in specs:
        for state in program.states:
            if state.location is None or _loc_region(world, state.location) != spec.region:
                continue
            t = Transition(state.id, spec.label, spec.target)
            if (t.src, t.label, t.dst) not in existing:
                transitions.append(t)
                existing.add((t.src, t.label, t.dst))
    return replace(program, transitions=tuple(transitions))


def _loc_region(world, location: str) -> str:
    if world is not None and world.has_location(location):
        return world.region_of(location)
    return location


# ---------------------------------------------------------------------------
# Determinism diagnostics
# ---------------------------------------------------------------------------


def check_determinism(program: Program) -> list[str]:
    """One diagnostic per state whose outgoing labels cannot be told apart.

    A guarded back edge plus its paired exit count as one silent successor;
    anything beyond one silent successor, or two successors on the same event,
    is flagged.
    """
    out = []
    for state in program.states:
        transitions = program.outgoing(state.id)
        silent = [t for t in transitions if t.label.kind in (EPSILON, GUARDED)]
        distinct_guards = {t.label.guard for t in silent if t.label.kind == GUARDED}
        silent_weight = (len([t for t in silent if t.label.kind == EPSILON])
                         + len(distinct_guards))
        if silent_weight >= 2:
            out.append(
                f"state {state.id} ({state.action.token()}): {silent_weight} "
                "empty-event successors; execution order falls back to recency"
            )
        events: dict[str, list[Transition]] = {}
        for t in transitions:
            if t.label.kind == EVENT_LABEL:
                events.setdefault(t.label.event.token(), []).append(t)
        for token, group in events.items():
            if len({g.dst for g in group}) > 1:
                out.append(
                    f"state {state.id} ({state.action.token()}): event {token} "
                    "leads to more than one successor"
                )
    return out
