/**
 * Offline console replay: the recorded WS stream of the chess fixture drives
 * the view model exactly as the live socket would.
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { StreamMessage, TranscriptEntry } from "../src/types.js";
import { ViewModel } from "../src/viewmodel.js";

const stream: StreamMessage[] = JSON.parse(
  readFileSync(new URL("./fixtures/chess_stream.json", import.meta.url), "utf-8"),
);
const transcript: TranscriptEntry[] = JSON.parse(
  readFileSync(new URL("./fixtures/chess_transcript.json", import.meta.url), "utf-8"),
);
const expected: { pawn_final_cell: [number, number] } = JSON.parse(
  readFileSync(new URL("./fixtures/chess_expect.json", import.meta.url), "utf-8"),
);

function replay(messages: StreamMessage[]): ViewModel {
  const vm = new ViewModel();
  for (const message of messages) {
    vm.applyMessage(message);
  }
  return vm;
}

describe("chess stream replay", () => {
  it("renders the pawn's path to the transcript's final cell", () => {
    const vm = replay(stream);
    expect(vm.state.snapshot).not.toBeNull();
    const pawn = vm.state.snapshot!.robots["pawn"];
    expect(pawn.cell).toEqual(expected.pawn_final_cell);

    // the path itself: pawn positions over the stream move monotonically north
    const ys = stream
      .filter((m) => m.kind === "snapshot" && m.state)
      .map((m) => m.state!.robots["pawn"].y);
    expect(ys.length).toBeGreaterThan(10);
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeGreaterThanOrEqual(ys[i - 1] - 1e-9);
    }
    // server-recorded trail reaches the final cell center too
    const trail = vm.state.snapshot!.trails?.["pawn"] ?? [];
    expect(trail.length).toBeGreaterThan(2);
  });

  it("accumulates the transcript narrations in order", () => {
    const vm = replay(stream);
    const kinds = vm.state.transcript.map((e) => e.kind);
    expect(kinds.filter((k) => k === "ruling").length).toBe(
      transcript.filter((e) => e.kind === "ruling").length,
    );
    expect(vm.narrations().length).toBeGreaterThan(0);
    const turns = vm.state.transcript.map((e) => e.turn);
    expect([...turns].sort((a, b) => a - b)).toEqual(turns);
  });

  it("provably drops out-of-order frames", () => {
    const vm = new ViewModel();
    const snapshots = stream.filter((m) => m.kind === "snapshot" && m.state);
    const early = snapshots[2];
    const late = snapshots[snapshots.length - 1];
    expect(vm.applyMessage(late)).toBe(true);
    const rendered = vm.state.snapshot;
    expect(vm.applyMessage(early)).toBe(false); // stale frame refused
    expect(vm.state.snapshot).toBe(rendered); // nothing re-rendered
    expect(vm.state.droppedFrames).toBe(1);
    expect(vm.state.lastSeq).toBe(late.seq);
  });

  it("drops malformed and equal-seq frames", () => {
    const vm = new ViewModel();
    const first = stream.find((m) => m.kind === "snapshot")!;
    expect(vm.applyMessage(first)).toBe(true);
    expect(vm.applyMessage(first)).toBe(false); // duplicate seq
    expect(vm.applyMessage({ nonsense: true })).toBe(false);
    expect(vm.state.droppedFrames).toBe(2);
  });

  it("schema version mismatch falls back to raw JSON", () => {
    const vm = new ViewModel();
    const alien = { v: 2, kind: "snapshot", seq: 1, state: {} };
    expect(vm.applyMessage(alien)).toBe(false);
    expect(vm.state.schemaMismatch).toBe(true);
    expect(vm.state.rawFallback).toContain('"v":2');
  });
});

describe("command lifecycle", () => {
  it("locks the input while a command is pending", () => {
    const vm = new ViewModel();
    expect(vm.beginCommand("go")).toBe(true);
    expect(vm.beginCommand("again")).toBe(false); // no queueing in the UI
    vm.resolveCommand({ ok: true } as never);
    expect(vm.state.pendingCommand).toBeNull();
    expect(vm.beginCommand("again")).toBe(true);
  });

  it("keeps failed commands for retry instead of dropping them", () => {
    const vm = new ViewModel();
    vm.beginCommand("push the doors");
    vm.failCommand("500: boom");
    expect(vm.state.pendingCommand).toBeNull();
    expect(vm.state.lastError).toContain("500");
    expect(vm.takeRetry()).toBe("push the doors");
    expect(vm.takeRetry()).toBeNull();
  });

  it("marks the connection stale without inventing state", () => {
    const vm = replay(stream);
    const before = vm.state.snapshot;
    vm.markStale();
    expect(vm.state.connection).toBe("stale");
    expect(vm.state.snapshot).toBe(before);
  });
});
