// In-memory stand-in for the session service, used for development and
// tests. Tracks request concurrency so tests can assert the console never
// overlaps step requests.

import {
  Backend,
  BackendError,
  CreateSessionRequest,
  CreateSessionResponse,
  HistoryEntry,
  SessionStateResponse,
  StepResponse,
} from "./types.js";

interface MockSession {
  history: HistoryEntry[];
  seed: number;
}

export interface RequestLogEntry {
  method: string;
  path: string;
}

function fakePngB64(sessionId: string, turn: number, instruction: string): string {
  // Not a real PNG; a deterministic token standing in for image bytes.
  return `png:${sessionId}:${turn}:${instruction}`;
}

export class MockBackend implements Backend {
  sessions = new Map<string, MockSession>();
  log: RequestLogEntry[] = [];
  failNextStep = false;
  latencyMs = 0;
  private nextId = 1;
  private active = 0;
  maxConcurrent = 0;

  private async track<T>(method: string, path: string,
                         run: () => T | Promise<T>): Promise<T> {
    this.log.push({ method, path });
    this.active += 1;
    this.maxConcurrent = Math.max(this.maxConcurrent, this.active);
    try {
      if (this.latencyMs > 0) {
        await new Promise((resolve) => setTimeout(resolve, this.latencyMs));
      } else {
        await Promise.resolve();
      }
      return await run();
    } finally {
      this.active -= 1;
    }
  }

  private session(id: string): MockSession {
    const session = this.sessions.get(id);
    if (!session) throw new BackendError(404, `unknown session ${id}`);
    return session;
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.track("POST", "/sessions", () => {
      const id = `mock-${this.nextId++}`;
      this.sessions.set(id, { history: [], seed: req.seed ?? 0 });
      return { session_id: id };
    });
  }

  step(sessionId: string, instruction: string): Promise<StepResponse> {
    return this.track("POST", `/sessions/${sessionId}/steps`, () => {
      if (this.failNextStep) {
        this.failNextStep = false;
        throw new BackendError(500, "injected failure");
      }
      if (instruction.trim().length === 0) {
        throw new BackendError(400, "instruction must be non-empty");
      }
      const session = this.session(sessionId);
      const turn = session.history.length + 1;
      const entry: HistoryEntry = {
        turn_index: turn,
        instruction,
        image_b64: fakePngB64(sessionId, turn, instruction),
      };
      session.history.push(entry);
      return { turn_index: turn, image_b64: entry.image_b64 };
    });
  }

  getSession(sessionId: string): Promise<SessionStateResponse> {
    return this.track("GET", `/sessions/${sessionId}`, () => ({
      session_id: sessionId,
      history: [...this.session(sessionId).history],
    }));
  }

  undo(sessionId: string): Promise<{ turns: number }> {
    return this.track("POST", `/sessions/${sessionId}/undo`, () => {
      const session = this.session(sessionId);
      if (session.history.length === 0) {
        throw new BackendError(409, "nothing to undo");
      }
      session.history.pop();
      return { turns: session.history.length };
    });
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.track("DELETE", `/sessions/${sessionId}`, () => {
      if (!this.sessions.delete(sessionId)) {
        throw new BackendError(404, `unknown session ${sessionId}`);
      }
    });
  }

  stepRequests(): RequestLogEntry[] {
    return this.log.filter((e) => e.path.endsWith("/steps"));
  }
}
