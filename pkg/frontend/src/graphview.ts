// Program rendering: a layered view model computed from the program
// document, then a plain SVG string. No layout state is persisted and
// nothing here feeds back into synthesis.

import { commandToken, type ProgramDocument, type TransitionLabelDocument } from "./types.js";

export interface NodeView {
  id: string;
  label: string;
  location: string | null;
  x: number;
  y: number;
  initial: boolean;
  flagged: boolean; // named in a nondeterminism diagnostic
}

export interface EdgeView {
  src: string;
  dst: string | null; // null halts
  label: string;
  kind: TransitionLabelDocument["kind"];
  back: boolean; // points at an earlier layer (loop)
  flagged: boolean;
}

export interface GraphView {
  nodes: NodeView[];
  edges: EdgeView[];
  diagnostics: string[];
  width: number;
  height: number;
}

const LAYER_W = 190;
const ROW_H = 70;
const MARGIN = 60;

export function labelText(label: TransitionLabelDocument): string {
  if (label.kind === "event" && label.event) return commandToken(label.event);
  if (label.kind === "guarded") return `while ${(label.guard ?? []).join(" & ")}`;
  if (label.kind === "exit") return `exit: not ${(label.guard ?? []).join(" & ")}`;
  return "";
}

function flaggedStates(diagnostics: string[]): Set<string> {
  const out = new Set<string>();
  for (const diag of diagnostics) {
    const m = /state (\S+) /.exec(diag);
    if (m) out.add(m[1]);
  }
  return out;
}

export function buildGraphView(program: ProgramDocument): GraphView {
  // breadth-first layering from the initial state
  const layer = new Map<string, number>([[program.initial, 0]]);
  const queue = [program.initial];
  while (queue.length) {
    const current = queue.shift()!;
    for (const t of program.transitions) {
      if (t.src !== current || t.dst === null || layer.has(t.dst)) continue;
      layer.set(t.dst, (layer.get(current) ?? 0) + 1);
      queue.push(t.dst);
    }
  }
  // any state unreachable by layout (should not happen) parks at the end
  let maxLayer = 0;
  for (const v of layer.values()) maxLayer = Math.max(maxLayer, v);
  for (const s of program.states) {
    if (!layer.has(s.id)) layer.set(s.id, ++maxLayer);
  }

  const rows = new Map<number, number>();
  const flagged = flaggedStates(program.diagnostics);
  const nodes: NodeView[] = program.states.map((s) => {
    const l = layer.get(s.id)!;
    const row = rows.get(l) ?? 0;
    rows.set(l, row + 1);
    return {
      id: s.id,
      label: commandToken(s.action),
      location: s.location ?? null,
      x: MARGIN + l * LAYER_W,
      y: MARGIN + row * ROW_H,
      initial: s.id === program.initial,
      flagged: flagged.has(s.id),
    };
  });

  const edges: EdgeView[] = program.transitions.map((t) => ({
    src: t.src,
    dst: t.dst,
    label: labelText(t.label),
    kind: t.label.kind,
    back: t.dst !== null && (layer.get(t.dst) ?? 0) <= (layer.get(t.src) ?? 0),
    flagged:
      flagged.has(t.src) && (t.label.kind === "epsilon" || t.label.kind === "guarded"),
  }));

  let width = 2 * MARGIN;
  let height = 2 * MARGIN;
  for (const n of nodes) {
    width = Math.max(width, n.x + LAYER_W);
    height = Math.max(height, n.y + ROW_H + MARGIN);
  }
  return { nodes, edges, diagnostics: [...program.diagnostics], width, height };
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSvg(view: GraphView): string {
  const byId = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${view.width} ${view.height}">`,
  ];
  for (const e of view.edges) {
    const a = byId.get(e.src)!;
    const color = e.flagged ? "#c0392b" : e.kind === "event" ? "#2471a3" : "#7f8c8d";
    if (e.dst === null) {
      const x = a.x + 70;
      const y = a.y + 34;
      parts.push(
        `<line x1="${a.x}" y1="${a.y + 14}" x2="${x}" y2="${y}" stroke="${color}"/>`,
        `<circle cx="${x}" cy="${y}" r="4" fill="${color}"/>`,
        `<text x="${x + 6}" y="${y + 4}" font-size="10" fill="${color}">${esc(e.label)}</text>`,
      );
      continue;
    }
    const b = byId.get(e.dst)!;
    const midX = (a.x + b.x) / 2;
    const midY = (a.y + b.y) / 2 + (e.back ? -36 : 0);
    const dash = e.kind === "event" ? "" : ' stroke-dasharray="5,3"';
    parts.push(
      `<path d="M ${a.x} ${a.y} Q ${midX} ${midY} ${b.x} ${b.y}" fill="none" stroke="${color}"${dash} marker-end="url(#arrow)"/>`,
      `<text x="${midX}" y="${midY - 4}" font-size="10" text-anchor="middle" fill="${color}">${esc(e.label)}</text>`,
    );
  }
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>`,
  );
  for (const n of view.nodes) {
    const stroke = n.flagged ? "#c0392b" : n.initial ? "#1e8449" : "#2c3e50";
    parts.push(
      `<g><rect x="${n.x - 60}" y="${n.y - 14}" width="120" height="28" rx="8" fill="#fdfefe" stroke="${stroke}" stroke-width="${n.flagged ? 2.5 : 1.5}"/>`,
      `<text x="${n.x}" y="${n.y + 4}" font-size="11" text-anchor="middle">${esc(n.label)}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
