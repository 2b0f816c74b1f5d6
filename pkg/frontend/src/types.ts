// Document shapes exchanged with the engine's HTTP API.
// The UI is a pure client: it never invents region ids and performs no
// synthesis logic of its own.

export interface MapDocument {
  format_version: string;
  frame?: { units: string };
  regions: RegionDocument[];
  icons: IconDocument[];
}

export interface RegionDocument {
  id: string;
  label?: string;
  polygon: [number, number][];
}

export interface IconDocument {
  entity: string;
  point: [number, number];
}

export interface WorldDocument {
  format_version: string;
  regions: string[];
  entities: EntityDocument[];
  robot_at: string;
}

export interface EntityDocument {
  id: string;
  type: string;
  location: string;
  provenance?: string;
  units?: number;
}

/** Stroke sample in map-frame meters with a millisecond timestamp. */
export type SketchPoint = [number, number, number];

export interface RecordingDocument {
  format_version: string;
  id: string;
  utterance: string;
  sketch: { points: SketchPoint[] };
  attach?: { host: string; region?: string };
}

export interface CommandDocument {
  schema: string;
  args?: CommandArgDocument[];
}

export interface CommandArgDocument {
  kind: "entity" | "region" | "text" | "hole";
  id?: string;
  text?: string;
  category?: string;
  type?: string;
}

export interface TransitionLabelDocument {
  kind: "event" | "epsilon" | "guarded" | "exit";
  event?: CommandDocument;
  guard?: string[];
}

export interface ProgramDocument {
  format_version: string;
  initial: string;
  states: { id: string; action: CommandDocument; location?: string | null }[];
  transitions: { src: string; label: TransitionLabelDocument; dst: string | null }[];
  diagnostics: string[];
}

export interface ScriptDocument {
  format_version: string;
  stimuli: ({ kind: "tick" } | { kind: "event"; schema: string; args?: CommandArgDocument[] })[];
}

export interface LogDocument {
  format_version: string;
  entries: CommandDocument[];
}

export interface SessionSummary {
  version: number;
  regions: string[];
  entities: string[];
  recordings: string[];
  has_program: boolean;
  diagnostics: string[];
}

export function commandToken(cmd: CommandDocument): string {
  const args = (cmd.args ?? []).map((a) => {
    if (a.kind === "text") return `"${a.text ?? ""}"`;
    if (a.kind === "hole") return a.type ? `_:${a.type}` : "_";
    return a.id ?? "?";
  });
  return args.length ? `${cmd.schema} ${args.join(", ")}` : cmd.schema;
}
