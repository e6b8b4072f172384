// DOM wiring for the teller console: one page, no routing beyond the
// session id in the URL hash.

import { HttpBackend, serviceBaseUrl } from "./api.js";
import { TellerConsoleStore } from "./store.js";
import { ConsoleState } from "./store.js";
import { TranscriptRow } from "./types.js";

const PLACEHOLDER_CANVAS =
  "data:image/svg+xml," +
  encodeURIComponent(
    '<svg xmlns="http://www.w3.org/2000/svg" width="128" height="128">' +
    '<rect width="128" height="128" fill="#141414"/></svg>');

function rowElement(row: TranscriptRow, store: TellerConsoleStore): HTMLElement {
  const el = document.createElement("div");
  el.className = `row ${row.kind}`;
  if (row.kind === "turn") {
    const img = document.createElement("img");
    img.src = `data:image/png;base64,${row.imageB64}`;
    img.alt = `turn ${row.turnIndex}`;
    const label = document.createElement("div");
    label.textContent =
      `${row.turnIndex}. ${row.instruction} (${Math.round(row.latencyMs)} ms)`;
    el.append(label, img);
  } else if (row.kind === "pending") {
    el.textContent = `… ${row.instruction}`;
  } else {
    const label = document.createElement("div");
    label.textContent = `failed: ${row.instruction} — ${row.message}`;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.onclick = () => void store.retry();
    el.append(label, retry);
  }
  return el;
}

function render(state: ConsoleState, store: TellerConsoleStore): void {
  const transcript = document.getElementById("transcript")!;
  transcript.replaceChildren(
    ...state.rows.map((row) => rowElement(row, store)));
  const canvas = document.getElementById("canvas") as HTMLImageElement;
  canvas.src = state.canvas
    ? `data:image/png;base64,${state.canvas}`
    : PLACEHOLDER_CANVAS;
  const banner = document.getElementById("banner")!;
  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;
  const send = document.getElementById("send") as HTMLButtonElement;
  const input = document.getElementById("instruction") as HTMLInputElement;
  send.disabled = state.busy || input.value.trim().length === 0;
  (document.getElementById("undo") as HTMLButtonElement).disabled =
    state.busy || !state.rows.some((r) => r.kind === "turn");
  if (state.sessionId) window.location.hash = state.sessionId;
}

async function fileToBase64(file: File): Promise<string> {
  const buf = new Uint8Array(await file.arrayBuffer());
  let bin = "";
  for (const byte of buf) bin += String.fromCharCode(byte);
  return btoa(bin);
}

export function boot(): void {
  const store = new TellerConsoleStore(new HttpBackend(serviceBaseUrl()));
  store.subscribe((state) => render(state, store));

  const input = document.getElementById("instruction") as HTMLInputElement;
  const send = document.getElementById("send") as HTMLButtonElement;
  const undo = document.getElementById("undo") as HTMLButtonElement;
  const upload = document.getElementById("upload") as HTMLInputElement;
  const start = document.getElementById("start") as HTMLButtonElement;

  input.oninput = () => {
    send.disabled = store.getState().busy || input.value.trim().length === 0;
  };
  send.onclick = async () => {
    const text = input.value;
    input.value = "";
    await store.sendInstruction(text);
  };
  input.onkeydown = (ev) => {
    if (ev.key === "Enter" && !send.disabled) send.click();
  };
  undo.onclick = () => void store.undoTurn();
  start.onclick = async () => {
    const file = upload.files?.[0];
    const opts = file ? { initialImageB64: await fileToBase64(file) } : {};
    await store.startSession(opts);
  };

  void store.startSession();
}

if (typeof document !== "undefined" && document.getElementById("transcript")) {
  boot();
}
