"""Discrete-event simulator: runs a program against a world and a scripted
stimulus stream.

Ticks fire the silent transitions (empty events, loop guards, exits); event
stimuli fire matching event edges. Tick-driven edges whose target action is
not executable simply do not fire, so a program waits rather than faulting;
an event edge explicitly requested by the user faults honestly when its
target's preconditions are false.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .assembler import EPSILON, EVENT_LABEL, EXIT, GUARDED, Program, Transition
from .errors import RuntimeFault, SketchSynthError
from .knowledge import (
    Command,
    Domain,
    TextArg,
    World,
    apply_command,
    eval_predicate,
    preconditions_hold,
)


class _Tick:
    def __repr__(self):
        return "tick"


TICK = _Tick()

Stimulus = Union[Command, _Tick]


@dataclass(frozen=True)
class Script:
    stimuli: tuple[Stimulus, ...]


@dataclass(frozen=True)
class ExecState:
    current: str
    world: World
    log: tuple[Command, ...] = ()
    halted: bool = False


def _events_match(label_event: Command, stimulus: Command) -> bool:
    if label_event.schema != stimulus.schema:
        return False
    if len(label_event.args) != len(stimulus.args):
        return False
    for a, b in zip(label_event.args, stimulus.args):
        if isinstance(a, TextArg) and isinstance(b, TextArg):
            if a.text.lower() != b.text.lower():
                return False
        elif a != b:
            return False
    return True


def _guard_holds(domain: Domain, world: World, guard) -> bool:
    return all(eval_predicate(world, p, domain) for p in guard)


def step(domain: Domain, program: Program, state: ExecState,
         stimulus: Stimulus) -> ExecState:
    """Advance by at most one transition; unmatched stimuli leave the state
    unchanged, and a state with no way out halts the program."""
    if state.halted:
        raise SketchSynthError("stepping a halted execution")
    outgoing = program.outgoing(state.current)
    if not outgoing:
        return replace(state, halted=True)

    # newest instruction wins: scan most recently attached transitions first
    candidates = list(reversed(outgoing))
    chosen: Optional[Transition] = None
    via_event = False
    if stimulus is TICK:
        for t in candidates:
            if t.label.kind == EPSILON:
                if _target_executable(domain, program, state.world, t):
                    chosen = t
                    break
            elif t.label.kind == GUARDED:
                if _guard_holds(domain, state.world, t.label.guard) and \
                        _target_executable(domain, program, state.world, t):
                    chosen = t
                    break
            elif t.label.kind == EXIT:
                if not _guard_holds(domain, state.world, t.label.guard):
                    chosen = t
                    break
    else:
        for t in candidates:
            if t.label.kind == EVENT_LABEL and _events_match(t.label.event, stimulus):
                chosen = t
                via_event = True
                break

    if chosen is None:
        return state

    world = state.world
    if via_event:
        world = apply_command(domain, world, chosen.label.event)
    if chosen.dst is None:
        return replace(state, world=world, halted=True)

    target = program.state(chosen.dst)
    if not preconditions_hold(domain, world, target.action):
        raise RuntimeFault(chosen.dst, f"{target.action.token()} is not executable here")
    world = apply_command(domain, world, target.action)
    return ExecState(chosen.dst, world, state.log + (target.action,), False)


def _target_executable(domain: Domain, program: Program, world: World,
                       transition: Transition) -> bool:
    if transition.dst is None:
        return True
    return preconditions_hold(domain, world, program.state(transition.dst).action)


def run(domain: Domain, program: Program, world: World, script: Script) -> list[Command]:
    """Fold ``step`` over the script; returns the executed command log."""
    initial = program.state(program.initial)
    state = ExecState(program.initial, world, (initial.action,))
    for stimulus in script.stimuli:
        if state.halted:
            break
        state = step(domain, program, state, stimulus)
    return list(state.log)


def final_state(domain: Domain, program: Program, world: World, script: Script) -> ExecState:
    initial = program.state(program.initial)
    state = ExecState(program.initial, world, (initial.action,))
    for stimulus in script.stimuli:
        if state.halted:
            break
        state = step(domain, program, state, stimulus)
    return state


def validate_trace(program: Program, trace) -> bool:
    """Automaton acceptance: feeding the trace's events must reproduce its
    actions exactly."""
    steps = trace.steps
    if not steps:
        return False
    if program.state(program.initial).action != steps[0].action:
        return False

    silent_kinds = (EPSILON, GUARDED, EXIT)

    def walk(state_id: str, index: int) -> bool:
        if index == len(steps):
            return True
        want = steps[index]
        for t in program.outgoing(state_id):
            if want.event is None:
                if t.label.kind not in silent_kinds:
                    continue
            else:
                if t.label.kind != EVENT_LABEL or t.label.event != want.event:
                    continue
            if t.dst is None:
                continue
            if program.state(t.dst).action != want.action:
                continue
            if walk(t.dst, index + 1):
                return True
        return False

    return walk(program.initial, 1)
