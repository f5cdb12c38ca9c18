/** Wire types mirrored from the session server's published schema (v1). */

export const SCHEMA_VERSION = 1;

export interface RobotState {
  x: number;
  y: number;
  heading: number;
  cell: [number, number];
  moving: boolean;
  footprint_mm: number;
}

export interface ObjectShape {
  kind: "circle" | "rect";
  radius_mm?: number;
  w_mm?: number;
  h_mm?: number;
}

export interface ObjectState {
  x: number;
  y: number;
  heading: number;
  cell: [number, number];
  shape: ObjectShape;
  mass_class: "light" | "heavy" | "fixed";
}

export interface Snapshot {
  clock_ms: number;
  table_size_mm: number;
  grid_n: number;
  robots: Record<string, RobotState>;
  objects: Record<string, ObjectState>;
  trails?: Record<string, [number, number][]>;
}

export interface TranscriptEntry {
  turn: number;
  actor: string;
  kind: string;
  payload: unknown;
  ts: number;
}

export interface StreamMessage {
  v: number;
  kind: "snapshot" | "transcript" | "heartbeat";
  seq: number;
  state?: Snapshot;
  entry?: TranscriptEntry;
  clock_ms?: number;
}

export interface TurnResult {
  ok: boolean;
  ruling: string;
  directives: { gadget: string; directive: string }[];
  dispatched: string[];
  events: Record<string, unknown>[];
  elapsed_ms: number;
  repairs: number;
  fallback: boolean;
  game_over: boolean;
  error: string | null;
}

export interface SessionInfo {
  id: string;
  name: string;
  phase: string;
  init: TurnResult;
}
