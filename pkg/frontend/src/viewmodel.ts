/**
 * Console view model. Holds only server-acknowledged state: every rendered
 * pose comes from a stream snapshot, out-of-order frames are dropped, and
 * there is no client-side simulation of any kind.
 */

import {
  SCHEMA_VERSION,
  Snapshot,
  StreamMessage,
  TranscriptEntry,
  TurnResult,
} from "./types.js";

export type Connection = "connecting" | "live" | "stale" | "closed";

export interface ViewState {
  snapshot: Snapshot | null;
  transcript: TranscriptEntry[];
  connection: Connection;
  lastSeq: number;
  droppedFrames: number;
  schemaMismatch: boolean;
  rawFallback: string | null;
  pendingCommand: string | null;
  failedCommand: string | null;
  lastError: string | null;
  lastResult: TurnResult | null;
}

export class ViewModel {
  state: ViewState = {
    snapshot: null,
    transcript: [],
    connection: "connecting",
    lastSeq: -1,
    droppedFrames: 0,
    schemaMismatch: false,
    rawFallback: null,
    pendingCommand: null,
    failedCommand: null,
    lastError: null,
    lastResult: null,
  };

  /** Apply one stream message; returns false when the frame was dropped. */
  applyMessage(raw: unknown): boolean {
    const msg = raw as StreamMessage;
    if (!msg || typeof msg !== "object" || typeof msg.seq !== "number" || !msg.kind) {
      this.state.droppedFrames += 1;
      return false;
    }
    if (msg.v !== SCHEMA_VERSION) {
      // incompatible server: show the banner and fall back to raw JSON
      this.state.schemaMismatch = true;
      this.state.rawFallback = JSON.stringify(raw);
      return false;
    }
    if (msg.kind === "heartbeat") {
      this.state.connection = "live";
      return true;
    }
    if (msg.seq <= this.state.lastSeq) {
      this.state.droppedFrames += 1;
      return false;
    }
    this.state.lastSeq = msg.seq;
    this.state.connection = "live";
    if (msg.kind === "snapshot" && msg.state) {
      this.state.snapshot = msg.state;
      return true;
    }
    if (msg.kind === "transcript" && msg.entry) {
      this.state.transcript.push(msg.entry);
      return true;
    }
    this.state.droppedFrames += 1;
    return false;
  }

  /** Lock the input for one in-flight command; false when one is pending. */
  beginCommand(text: string): boolean {
    if (this.state.pendingCommand !== null) {
      return false;
    }
    this.state.pendingCommand = text;
    this.state.failedCommand = null;
    this.state.lastError = null;
    return true;
  }

  resolveCommand(result: TurnResult): void {
    this.state.pendingCommand = null;
    this.state.lastResult = result;
    if (!result.ok) {
      this.state.lastError = result.error ?? "turn failed";
    }
  }

  /** HTTP failure: keep the command around for the retry affordance. */
  failCommand(error: string): void {
    this.state.failedCommand = this.state.pendingCommand;
    this.state.pendingCommand = null;
    this.state.lastError = error;
  }

  takeRetry(): string | null {
    const failed = this.state.failedCommand;
    this.state.failedCommand = null;
    return failed;
  }

  markStale(): void {
    if (this.state.connection === "live") {
      this.state.connection = "stale";
    }
  }

  markClosed(): void {
    this.state.connection = "closed";
  }

  /** Narration texts for the transcript panel, newest last. */
  narrations(): { actor: string; text: string }[] {
    const out: { actor: string; text: string }[] = [];
    for (const entry of this.state.transcript) {
      if (typeof entry.payload === "string" &&
          (entry.kind === "ruling" || entry.kind === "agent_reply" || entry.kind === "command")) {
        out.push({ actor: entry.actor, text: entry.payload });
      }
    }
    return out;
  }
}
