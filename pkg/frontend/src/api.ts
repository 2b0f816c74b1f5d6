// Thin client over the engine's HTTP endpoints. All synthesis happens
// server-side; this file is the only place the UI talks to the network.

import type {
  LogDocument,
  MapDocument,
  ProgramDocument,
  RecordingDocument,
  ScriptDocument,
  SessionSummary,
  WorldDocument,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly stage: string,
    message: string,
    readonly recording?: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async call<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (payload !== undefined) {
      init.body = JSON.stringify(payload);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchImpl(this.base + path, init);
    const text = await resp.text();
    if (!resp.ok) {
      let stage = "http";
      let message = text || resp.statusText;
      let recording: string | undefined;
      try {
        const detail = JSON.parse(text).detail;
        stage = detail.stage ?? stage;
        message = detail.message ?? message;
        recording = detail.recording;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(resp.status, stage, message, recording);
    }
    return (text ? JSON.parse(text) : undefined) as T;
  }

  session(): Promise<SessionSummary> {
    return this.call("GET", "/session");
  }

  getMap(): Promise<MapDocument> {
    return this.call("GET", "/map");
  }

  putMap(doc: MapDocument): Promise<{ version: number }> {
    return this.call("PUT", "/map", doc);
  }

  addRegion(label: string, polygon: [number, number][]): Promise<{ region: string }> {
    return this.call("POST", "/map/regions", { label, polygon });
  }

  placeIcon(entityType: string, point: [number, number]): Promise<{ entity: string }> {
    return this.call("POST", "/map/icons", { entity_type: entityType, point });
  }

  getWorld(): Promise<WorldDocument> {
    return this.call("GET", "/world");
  }

  putWorld(doc: WorldDocument): Promise<{ version: number }> {
    return this.call("PUT", "/world", doc);
  }

  appendRecording(doc: RecordingDocument): Promise<{ recordings: number }> {
    return this.call("POST", "/recordings", doc);
  }

  clearRecordings(): Promise<{ version: number }> {
    return this.call("DELETE", "/recordings");
  }

  synthesize(): Promise<{ version: number; diagnostics: string[] }> {
    return this.call("POST", "/synthesize");
  }

  async program(): Promise<{ version: number; program: ProgramDocument }> {
    return this.call("GET", "/program");
  }

  async programDot(): Promise<string> {
    const resp = await this.fetchImpl(this.base + "/program.dot", { method: "GET" });
    if (!resp.ok) throw new ApiError(resp.status, "program", await resp.text());
    return resp.text();
  }

  simulate(script: ScriptDocument): Promise<LogDocument> {
    return this.call("POST", "/simulate", script);
  }
}
