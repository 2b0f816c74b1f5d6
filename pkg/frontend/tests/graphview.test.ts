import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { buildGraphView, labelText, renderSvg } from "../src/graphview.js";
import type { ProgramDocument } from "../src/types.js";

const GOLDEN_DIR = join(__dirname, "..", "..", "src", "sketchsynth", "data", "corpus", "golden");

function golden(name: string): ProgramDocument {
  return JSON.parse(readFileSync(join(GOLDEN_DIR, `${name}.json`), "utf-8"));
}

describe("buildGraphView", () => {
  it("lays out the grocery loop with the back edge marked", () => {
    const view = buildGraphView(golden("grocery_loop"));
    expect(view.nodes.map((n) => n.label)).toEqual([
      "idle", "moveTo garage", "grab groceries",
      "moveTo kitchen cabinets", "put groceries, kitchen cabinets",
    ]);
    const back = view.edges.filter((e) => e.back && e.dst !== null);
    expect(back.length).toBe(1);
    expect(back[0].kind).toBe("guarded");
    const halt = view.edges.filter((e) => e.dst === null);
    expect(halt.length).toBe(1);
    expect(halt[0].kind).toBe("exit");
  });

  it("marks the initial state", () => {
    const view = buildGraphView(golden("grocery_shortened"));
    expect(view.nodes.find((n) => n.initial)?.label).toBe("idle");
  });

  it("empty program renders an empty view", () => {
    const empty: ProgramDocument = {
      format_version: "1", initial: "s0",
      states: [{ id: "s0", action: { schema: "idle" } }],
      transitions: [], diagnostics: [],
    };
    const view = buildGraphView(empty);
    expect(view.nodes.length).toBe(1);
    expect(view.edges.length).toBe(0);
  });

  it("flags the states named by nondeterminism diagnostics", () => {
    const program = golden("spill_ungated_return");
    expect(program.diagnostics.length).toBeGreaterThan(0);
    const view = buildGraphView(program);
    const flaggedNodes = view.nodes.filter((n) => n.flagged);
    expect(flaggedNodes.length).toBeGreaterThan(0);
    const flaggedEdges = view.edges.filter((e) => e.flagged);
    expect(flaggedEdges.length).toBeGreaterThanOrEqual(2);
    expect(view.diagnostics).toEqual(program.diagnostics);
  });
});

describe("renderSvg", () => {
  it("renders the ungated-attachment fixture with the conflict highlighted", () => {
    const view = buildGraphView(golden("spill_ungated_return"));
    const svg = renderSvg(view);
    expect(svg).toContain("<svg");
    expect(svg).toContain("#c0392b"); // nondeterminism highlight color
    expect(svg).toContain("say");
  });

  it("escapes labels", () => {
    const view = buildGraphView({
      format_version: "1", initial: "s0",
      states: [{ id: "s0", action: { schema: "say", args: [{ kind: "text", text: "<b>&" }] } }],
      transitions: [], diagnostics: [],
    });
    const svg = renderSvg(view);
    expect(svg).toContain("&lt;b&gt;&amp;");
    expect(svg).not.toContain("<b>&");
  });
});

describe("labelText", () => {
  it("spells out event, guard, and exit labels", () => {
    expect(labelText({ kind: "event", event: { schema: "eventApproach" } }))
      .toBe("eventApproach");
    expect(labelText({ kind: "guarded", guard: ["hands_free"] }))
      .toBe("while hands_free");
    expect(labelText({ kind: "exit", guard: ["at(type:toy, bedroom)"] }))
      .toBe("exit: not at(type:toy, bedroom)");
    expect(labelText({ kind: "epsilon" })).toBe("");
  });
});
