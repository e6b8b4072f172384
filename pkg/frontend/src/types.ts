// Shared types for the teller console.

export interface HistoryEntry {
  turn_index: number;
  instruction: string;
  image_b64: string;
}

export interface CreateSessionRequest {
  checkpoint?: string | null;
  initial_image_b64?: string | null;
  seed?: number;
}

export interface CreateSessionResponse {
  session_id: string;
}

export interface StepResponse {
  turn_index: number;
  image_b64: string;
}

export interface SessionStateResponse {
  session_id: string;
  history: HistoryEntry[];
}

/** One rendered transcript row. */
export type TranscriptRow =
  | { kind: "turn"; turnIndex: number; instruction: string; imageB64: string; latencyMs: number }
  | { kind: "pending"; instruction: string }
  | { kind: "error"; instruction: string; message: string };

export class BackendError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "BackendError";
  }
}

/** The session-service surface the console consumes. */
export interface Backend {
  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse>;
  step(sessionId: string, instruction: string): Promise<StepResponse>;
  getSession(sessionId: string): Promise<SessionStateResponse>;
  undo(sessionId: string): Promise<{ turns: number }>;
  deleteSession(sessionId: string): Promise<void>;
}
