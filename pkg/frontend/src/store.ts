// Session store: server-authoritative transcript with an optimistic
// pending row and a strict single-in-flight request policy.

import {
  Backend,
  BackendError,
  HistoryEntry,
  TranscriptRow,
} from "./types.js";
import { pngDimensions } from "./png.js";

export type SendResult = "ok" | "error" | "rejected-empty" | "rejected-busy";
export type UndoResult = "ok" | "error" | "rejected-empty" | "rejected-busy";

export interface ConsoleState {
  sessionId: string | null;
  rows: TranscriptRow[];
  /** Base64 PNG shown in the canvas panel (last turn image, or x0). */
  canvas: string | null;
  busy: boolean;
  banner: string | null;
}

export interface StartOptions {
  initialImageB64?: string;
  seed?: number;
  checkpoint?: string;
}

const now: () => number =
  typeof performance !== "undefined" ? () => performance.now() : Date.now;

export class TellerConsoleStore {
  private state: ConsoleState = {
    sessionId: null,
    rows: [],
    canvas: null,
    busy: false,
    banner: null,
  };
  private initialCanvas: string | null = null;
  private listeners: Array<(s: ConsoleState) => void> = [];

  constructor(private backend: Backend, private imageSide = 128) {}

  getState(): ConsoleState {
    return this.state;
  }

  subscribe(listener: (s: ConsoleState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private setState(patch: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Transcript turn rows only (no pending/error rows). */
  turns(): TranscriptRow[] {
    return this.state.rows.filter((r) => r.kind === "turn");
  }

  validateUpload(imageB64: string): string | null {
    const dims = pngDimensions(imageB64);
    if (dims === null) return "not a PNG image";
    if (dims.width !== this.imageSide || dims.height !== this.imageSide) {
      return `image must be ${this.imageSide}x${this.imageSide}, ` +
        `got ${dims.width}x${dims.height}`;
    }
    return null;
  }

  async startSession(opts: StartOptions = {}): Promise<"ok" | "error"> {
    if (opts.initialImageB64 !== undefined) {
      const problem = this.validateUpload(opts.initialImageB64);
      if (problem !== null) {
        // inline validation: no request leaves the client
        this.setState({ banner: problem });
        return "error";
      }
    }
    try {
      const created = await this.backend.createSession({
        initial_image_b64: opts.initialImageB64 ?? null,
        seed: opts.seed ?? 0,
        checkpoint: opts.checkpoint ?? null,
      });
      this.initialCanvas = opts.initialImageB64 ?? null;
      this.setState({
        sessionId: created.session_id,
        rows: [],
        canvas: this.initialCanvas,
        busy: false,
        banner: null,
      });
      await this.syncFromServer();
      return "ok";
    } catch (err) {
      this.setState({ banner: describe(err) });
      return "error";
    }
  }

  /** Rebuild the transcript from the server's authoritative state. */
  async syncFromServer(): Promise<void> {
    if (this.state.sessionId === null) return;
    const remote = await this.backend.getSession(this.state.sessionId);
    const rows: TranscriptRow[] = remote.history.map((h: HistoryEntry) => ({
      kind: "turn",
      turnIndex: h.turn_index,
      instruction: h.instruction,
      imageB64: h.image_b64,
      latencyMs: latencyOf(this.state.rows, h),
    }));
    const last = remote.history[remote.history.length - 1];
    this.setState({
      rows,
      canvas: last ? last.image_b64 : this.initialCanvas,
    });
  }

  async sendInstruction(text: string): Promise<SendResult> {
    const instruction = text.trim();
    if (instruction.length === 0) return "rejected-empty";
    if (this.state.busy || this.state.sessionId === null) return "rejected-busy";
    this.setState({
      busy: true,
      rows: [...withoutTransient(this.state.rows),
             { kind: "pending", instruction }],
    });
    const started = now();
    try {
      await this.backend.step(this.state.sessionId, instruction);
      await this.syncFromServer();
      this.noteLatency(instruction, now() - started);
      return "ok";
    } catch (err) {
      this.setState({
        rows: [...withoutTransient(this.state.rows),
               { kind: "error", instruction, message: describe(err) }],
      });
      return "error";
    } finally {
      this.setState({ busy: false });
    }
  }

  /** Re-send the instruction from the current error row, if any. */
  async retry(): Promise<SendResult> {
    const errorRow = this.state.rows.find((r) => r.kind === "error");
    if (!errorRow || errorRow.kind !== "error") return "rejected-empty";
    this.setState({ rows: withoutTransient(this.state.rows) });
    return this.sendInstruction(errorRow.instruction);
  }

  async undoTurn(): Promise<UndoResult> {
    if (this.state.busy || this.state.sessionId === null) return "rejected-busy";
    if (this.turns().length === 0) return "rejected-empty";
    this.setState({ busy: true });
    try {
      await this.backend.undo(this.state.sessionId);
      await this.syncFromServer();
      return "ok";
    } catch (err) {
      this.setState({ banner: describe(err) });
      return "error";
    } finally {
      this.setState({ busy: false });
    }
  }

  private noteLatency(instruction: string, ms: number): void {
    const rows = this.state.rows.map((r) =>
      r.kind === "turn" && r.instruction === instruction && r.latencyMs === 0
        ? { ...r, latencyMs: ms }
        : r);
    this.setState({ rows });
  }
}

function withoutTransient(rows: TranscriptRow[]): TranscriptRow[] {
  return rows.filter((r) => r.kind === "turn");
}

function latencyOf(previous: TranscriptRow[], entry: HistoryEntry): number {
  const match = previous.find(
    (r) => r.kind === "turn" && r.turnIndex === entry.turn_index);
  return match && match.kind === "turn" ? match.latencyMs : 0;
}

function describe(err: unknown): string {
  if (err instanceof BackendError) return `${err.status}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
