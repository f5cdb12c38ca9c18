/** Browser entry point: wires the view model, renderer and API together. */

import { ApiClient, ApiError } from "./client.js";
import { drawScene } from "./render.js";
import { ViewModel } from "./viewmodel.js";

const CANVAS_PX = 660;
const STALE_AFTER_MS = 3000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const base = (window as unknown as { SWARMTABLE_BASE?: string }).SWARMTABLE_BASE
    ?? "http://127.0.0.1:8040";
  const client = new ApiClient(base);
  const vm = new ViewModel();

  const canvas = el<HTMLCanvasElement>("table");
  canvas.width = CANVAS_PX;
  canvas.height = CANVAS_PX;
  const ctx = canvas.getContext("2d")!;
  const scenarioSelect = el<HTMLSelectElement>("scenario");
  const startButton = el<HTMLButtonElement>("start");
  const input = el<HTMLInputElement>("command");
  const sendButton = el<HTMLButtonElement>("send");
  const retryButton = el<HTMLButtonElement>("retry");
  const transcriptPanel = el<HTMLDivElement>("transcript");
  const statusBar = el<HTMLDivElement>("status");
  const banner = el<HTMLDivElement>("banner");
  const rawPanel = el<HTMLPreElement>("raw");

  let sessionId: string | null = null;
  let lastMessageAt = 0;

  const { scenarios } = await client.scenarios();
  for (const name of scenarios) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    scenarioSelect.appendChild(option);
  }

  function redraw(): void {
    if (vm.state.schemaMismatch) {
      banner.hidden = false;
      banner.textContent = "Server schema version mismatch: showing raw data.";
      rawPanel.hidden = false;
      rawPanel.textContent = vm.state.rawFallback ?? "";
      return;
    }
    if (vm.state.snapshot) {
      drawScene(ctx, vm.state.snapshot, {
        widthPx: CANVAS_PX,
        stale: vm.state.connection !== "live",
      });
    }
    const badge = vm.state.connection === "live" ? "" : ` [${vm.state.connection}]`;
    statusBar.textContent =
      `${sessionId ? `session ${sessionId}` : "no session"}${badge}` +
      (vm.state.lastError ? ` — ${vm.state.lastError}` : "");
    transcriptPanel.replaceChildren(
      ...vm.narrations().map(({ actor, text }) => {
        const row = document.createElement("div");
        row.className = `entry ${actor}`;
        row.textContent = `${actor}: ${text}`;
        return row;
      }),
    );
    transcriptPanel.scrollTop = transcriptPanel.scrollHeight;
    input.disabled = vm.state.pendingCommand !== null || sessionId === null;
    sendButton.disabled = input.disabled;
    retryButton.hidden = vm.state.failedCommand === null;
  }

  function connectStream(id: string): void {
    const socket = new WebSocket(client.streamUrl(id));
    socket.onmessage = (event) => {
      lastMessageAt = Date.now();
      vm.applyMessage(JSON.parse(event.data as string));
      redraw();
    };
    socket.onclose = () => {
      vm.markClosed();
      redraw();
    };
    setInterval(() => {
      if (Date.now() - lastMessageAt > STALE_AFTER_MS) {
        vm.markStale();
        redraw();
      }
    }, 1000);
  }

  startButton.onclick = async () => {
    const info = await client.createSession(scenarioSelect.value);
    sessionId = info.id;
    connectStream(info.id);
    redraw();
  };

  async function send(text: string): Promise<void> {
    if (!sessionId || !vm.beginCommand(text)) return;
    redraw();
    try {
      const result = await client.submitCommand(sessionId, text);
      vm.resolveCommand(result);
    } catch (err) {
      vm.failCommand(err instanceof ApiError ? err.message : String(err));
    }
    redraw();
  }

  sendButton.onclick = () => {
    const text = input.value.trim();
    if (text) {
      input.value = "";
      void send(text);
    }
  };
  input.onkeydown = (event) => {
    if (event.key === "Enter") sendButton.click();
  };
  retryButton.onclick = () => {
    const failed = vm.takeRetry();
    if (failed) void send(failed);
  };

  redraw();
}

void boot();
