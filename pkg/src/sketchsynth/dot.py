"""Graphviz export for programs. Output is bit-stable for identical inputs."""

from __future__ import annotations

from .assembler import Program


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(program: Program) -> str:
    lines = ["digraph program {", "  rankdir=LR;", '  node [shape=box, style=rounded];']
    for state in program.states:
        shape = ' shape=ellipse,' if state.id == program.initial else ""
        lines.append(f'  "{state.id}" [label="{_escape(state.action.token())}",{shape} tooltip="{_escape(state.location or "")}"];')
    halt_nodes = []
    for i, t in enumerate(program.transitions):
        label = _escape(t.label.token())
        if t.dst is None:
            halt = f"halt_{i}"
            halt_nodes.append(halt)
            lines.append(f'  "{halt}" [shape=point, label=""];')
            lines.append(f'  "{t.src}" -> "{halt}" [label="{label}"];')
        else:
            lines.append(f'  "{t.src}" -> "{t.dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
