// DOM glue for the authoring surface. Everything meaningful happens in the
// engine behind the API; this file wires canvas gestures, the record flow,
// and the program/simulation panels together.

import { ApiClient, ApiError } from "./api.js";
import { buildGraphView, renderSvg } from "./graphview.js";
import { RecordingSession } from "./sketchpad.js";
import { MapTransform, regionAt } from "./transform.js";
import type { MapDocument, RecordingDocument, ScriptDocument } from "./types.js";

type Mode = "idle" | "record" | "region" | "icon";

class Studio {
  private api = new ApiClient("");
  private map: MapDocument = { format_version: "1", regions: [], icons: [] };
  private transform: MapTransform | null = null;
  private mode: Mode = "idle";
  private session: RecordingSession | null = null;
  private recordings: RecordingDocument[] = [];
  private regionDraft: [number, number][] = [];
  private recordingCounter = 1;

  constructor(private readonly root: Document) {}

  private el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  async start(): Promise<void> {
    await this.refreshMap();
    const canvas = this.el<HTMLCanvasElement>("map-canvas");
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));

    this.el<HTMLButtonElement>("btn-record").addEventListener("click", () => this.toggleRecord());
    this.el<HTMLButtonElement>("btn-region").addEventListener("click", () => {
      this.mode = this.mode === "region" ? "idle" : "region";
      this.regionDraft = [];
      this.setStatus(this.mode === "region" ? "click corners, then Finish region" : "");
    });
    this.el<HTMLButtonElement>("btn-region-done").addEventListener("click", () => this.finishRegion());
    this.el<HTMLButtonElement>("btn-icon").addEventListener("click", () => {
      this.mode = this.mode === "icon" ? "idle" : "icon";
      this.setStatus(this.mode === "icon" ? "click the map to place the icon" : "");
    });
    this.el<HTMLButtonElement>("btn-dictate").addEventListener("click", () => this.dictate());
    this.el<HTMLButtonElement>("btn-simulate").addEventListener("click", () => this.simulate());
    this.el<HTMLButtonElement>("btn-tick").addEventListener("click", () => this.addStimulus({ kind: "tick" }));
    this.el<HTMLButtonElement>("btn-approach").addEventListener("click", () =>
      this.addStimulus({ kind: "event", schema: "eventApproach", args: [] }));
    this.el<HTMLButtonElement>("btn-speech").addEventListener("click", () => {
      const text = prompt("spoken text") ?? "";
      this.addStimulus({ kind: "event", schema: "eventSpeech", args: [{ kind: "text", text }] });
    });
  }

  private script: ScriptDocument = { format_version: "1", stimuli: [] };

  private addStimulus(s: ScriptDocument["stimuli"][number]): void {
    this.script.stimuli.push(s);
    this.el("script-view").textContent = this.script.stimuli
      .map((x) => (x.kind === "tick" ? "tick" : x.schema))
      .join(" → ");
  }

  private async refreshMap(): Promise<void> {
    this.map = await this.api.getMap();
    const canvas = this.el<HTMLCanvasElement>("map-canvas");
    this.transform = new MapTransform(this.map, {
      width: canvas.width,
      height: canvas.height,
    });
    this.drawMap();
  }

  private drawMap(): void {
    const canvas = this.el<HTMLCanvasElement>("map-canvas");
    const ctx = canvas.getContext("2d");
    if (!ctx || !this.transform) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    for (const region of this.map.regions) {
      ctx.beginPath();
      region.polygon.forEach(([mx, my], i) => {
        const [sx, sy] = this.transform!.toScreen(mx, my);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.closePath();
      ctx.fillStyle = "rgba(93, 173, 226, 0.25)";
      ctx.fill();
      ctx.strokeStyle = "#2e86c1";
      ctx.stroke();
      const [cx, cy] = this.transform.toScreen(
        region.polygon.reduce((s, p) => s + p[0], 0) / region.polygon.length,
        region.polygon.reduce((s, p) => s + p[1], 0) / region.polygon.length,
      );
      ctx.fillStyle = "#1b4f72";
      ctx.font = "12px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(region.label ?? region.id, cx, cy);
    }
    for (const icon of this.map.icons) {
      const [sx, sy] = this.transform.toScreen(icon.point[0], icon.point[1]);
      ctx.fillStyle = "#b9770e";
      ctx.beginPath();
      ctx.arc(sx, sy, 5, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillText(icon.entity, sx, sy - 8);
    }
    for (const recording of this.recordings) {
      ctx.strokeStyle = "rgba(40, 116, 166, 0.5)";
      ctx.beginPath();
      recording.sketch.points.forEach(([mx, my], i) => {
        const [sx, sy] = this.transform!.toScreen(mx, my);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.stroke();
    }
  }

  private pointerDown(e: PointerEvent): void {
    if (!this.transform) return;
    const pos = this.canvasPos(e);
    if (this.mode === "record" && this.session) {
      this.session.strokeBegin({ x: pos[0], y: pos[1], t: e.timeStamp });
    } else if (this.mode === "region") {
      this.regionDraft.push(this.transform.toMap(pos[0], pos[1]));
      this.setStatus(`${this.regionDraft.length} corners`);
    } else if (this.mode === "icon") {
      void this.placeIcon(this.transform.toMap(pos[0], pos[1]));
    }
  }

  private pointerMove(e: PointerEvent): void {
    if (this.mode !== "record" || !this.session) return;
    this.session.strokeMove({ x: e.offsetX, y: e.offsetY, t: e.timeStamp });
    const ctx = this.el<HTMLCanvasElement>("map-canvas").getContext("2d");
    if (ctx) {
      ctx.fillStyle = "#273746";
      ctx.fillRect(e.offsetX - 1, e.offsetY - 1, 2, 2);
    }
  }

  private pointerUp(e: PointerEvent): void {
    if (this.mode === "record" && this.session) {
      this.session.strokeEnd({ x: e.offsetX, y: e.offsetY, t: e.timeStamp });
    }
  }

  private canvasPos(e: PointerEvent): [number, number] {
    return [e.offsetX, e.offsetY];
  }

  private toggleRecord(): void {
    const btn = this.el<HTMLButtonElement>("btn-record");
    if (this.mode !== "record") {
      if (!this.transform) return;
      this.mode = "record";
      this.session = new RecordingSession(this.transform);
      btn.textContent = "Stop";
      this.setStatus("recording: sketch the path and enter the task core");
    } else {
      btn.textContent = "Record";
      this.mode = "idle";
      void this.finishRecording();
    }
  }

  private async finishRecording(): Promise<void> {
    if (!this.session) return;
    const utterance = this.el<HTMLTextAreaElement>("utterance").value;
    this.session.setUtterance(utterance);
    if (this.session.isEmpty) {
      this.setStatus("nothing recorded: the stroke and text were empty");
      this.session = null;
      return;
    }
    let doc: RecordingDocument;
    try {
      doc = this.session.finish(`r${this.recordingCounter}`, this.recordings);
    } catch (err) {
      this.setStatus(String(err));
      this.session = null;
      return;
    }
    this.session = null;
    try {
      await this.api.appendRecording(doc);
      this.recordingCounter += 1;
      this.recordings.push(doc);
      const result = await this.api.synthesize();
      await this.showProgram(result.diagnostics);
      this.el<HTMLTextAreaElement>("utterance").value = "";
    } catch (err) {
      this.reportApiError(err);
    }
    this.drawMap();
  }

  private async finishRegion(): Promise<void> {
    if (this.regionDraft.length < 3) {
      this.setStatus("a region needs at least three corners");
      return;
    }
    const label = prompt("region label") ?? "region";
    try {
      await this.api.addRegion(label, this.regionDraft);
      await this.refreshMap();
    } catch (err) {
      this.reportApiError(err);
    }
    this.regionDraft = [];
    this.mode = "idle";
  }

  private async placeIcon(point: [number, number]): Promise<void> {
    const hint = regionAt(this.map, point);
    const entityType = prompt(`entity type to place${hint ? ` in ${hint}` : ""}`) ?? "";
    if (!entityType) return;
    try {
      await this.api.placeIcon(entityType, point);
      await this.refreshMap();
    } catch (err) {
      this.reportApiError(err);
    }
    this.mode = "idle";
  }

  private async showProgram(diagnostics: string[]): Promise<void> {
    const { program } = await this.api.program();
    const view = buildGraphView(program);
    this.el("program-view").innerHTML = renderSvg(view);
    const list = this.el("diagnostics");
    list.innerHTML = "";
    for (const diag of diagnostics) {
      const item = this.root.createElement("li");
      item.textContent = diag;
      list.appendChild(item);
    }
    this.setStatus(diagnostics.length ? "synthesized, with notes" : "synthesized");
  }

  private async simulate(): Promise<void> {
    try {
      const log = await this.api.simulate(this.script);
      this.el("log-view").textContent = log.entries
        .map((c) => c.schema + (c.args ?? []).map((a) => ` ${a.id ?? a.text ?? "_"}`).join(","))
        .join("\n");
    } catch (err) {
      this.reportApiError(err);
    }
    this.script = { format_version: "1", stimuli: [] };
    this.el("script-view").textContent = "";
  }

  private dictate(): void {
    // optional browser dictation: recognized words are inserted as text, the
    // engine contract stays text-only
    const Recognition =
      (window as any).SpeechRecognition ?? (window as any).webkitSpeechRecognition;
    if (!Recognition) {
      this.setStatus("dictation is not available in this browser; type instead");
      return;
    }
    const rec = new Recognition();
    rec.onresult = (event: any) => {
      const text = event.results[0][0].transcript;
      const area = this.el<HTMLTextAreaElement>("utterance");
      area.value = area.value ? `${area.value} ${text}` : text;
    };
    rec.start();
  }

  private reportApiError(err: unknown): void {
    if (err instanceof ApiError) {
      const where = err.recording ? ` (recording ${err.recording}, ${err.stage})` : ` (${err.stage})`;
      this.setStatus(`error${where}: ${err.message}`);
    } else {
      this.setStatus(String(err));
    }
  }

  private setStatus(text: string): void {
    this.el("status").textContent = text;
  }
}

if (typeof document !== "undefined") {
  const studio = new Studio(document);
  void studio.start();
}
