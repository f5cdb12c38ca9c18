/**
 * Top-down table renderer. Pure drawing against a 2D-context-shaped surface
 * so tests can feed a recording stub; the browser passes a real
 * CanvasRenderingContext2D. North is up, east is right.
 */

import { Snapshot } from "./types.js";

export interface Canvas2DLike {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
}

const GRID_COLOR = "#e2e8f0";
const ROBOT_COLOR = "#2b6cb0";
const OBJECT_COLORS: Record<string, string> = {
  light: "#f6ad55",
  heavy: "#9b2c2c",
  fixed: "#4a5568",
};
const TRAIL_COLORS = ["#3182ce", "#e53e3e", "#38a169", "#805ad5", "#dd6b20"];

export interface DrawOptions {
  widthPx: number;
  stale?: boolean;
}

/** Canvas position of a table point (mm), flipping y so north points up. */
export function toCanvas(
  x: number,
  y: number,
  tableSize: number,
  widthPx: number,
): [number, number] {
  const k = widthPx / tableSize;
  return [x * k, widthPx - y * k];
}

export function drawScene(ctx: Canvas2DLike, snapshot: Snapshot, opts: DrawOptions): void {
  const { widthPx } = opts;
  const k = widthPx / snapshot.table_size_mm;
  const cellPx = widthPx / snapshot.grid_n;

  ctx.clearRect(0, 0, widthPx, widthPx);
  ctx.globalAlpha = opts.stale ? 0.45 : 1.0;
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, widthPx, widthPx);

  ctx.strokeStyle = GRID_COLOR;
  ctx.lineWidth = 1;
  for (let i = 0; i <= snapshot.grid_n; i++) {
    ctx.beginPath();
    ctx.moveTo(i * cellPx, 0);
    ctx.lineTo(i * cellPx, widthPx);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(0, i * cellPx);
    ctx.lineTo(widthPx, i * cellPx);
    ctx.stroke();
  }

  let trailIdx = 0;
  for (const [name, trail] of Object.entries(snapshot.trails ?? {})) {
    if (trail.length < 2) continue;
    ctx.strokeStyle = TRAIL_COLORS[trailIdx++ % TRAIL_COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [x0, y0] = toCanvas(trail[0][0], trail[0][1], snapshot.table_size_mm, widthPx);
    ctx.moveTo(x0, y0);
    for (const [px, py] of trail.slice(1)) {
      const [cx, cy] = toCanvas(px, py, snapshot.table_size_mm, widthPx);
      ctx.lineTo(cx, cy);
    }
    ctx.stroke();
  }

  for (const [oid, obj] of Object.entries(snapshot.objects)) {
    const [cx, cy] = toCanvas(obj.x, obj.y, snapshot.table_size_mm, widthPx);
    ctx.fillStyle = OBJECT_COLORS[obj.mass_class] ?? "#999999";
    if (obj.shape.kind === "circle") {
      ctx.beginPath();
      ctx.arc(cx, cy, (obj.shape.radius_mm ?? 10) * k, 0, Math.PI * 2);
      ctx.fill();
    } else {
      const w = (obj.shape.w_mm ?? 30) * k;
      const h = (obj.shape.h_mm ?? 30) * k;
      ctx.fillRect(cx - w / 2, cy - h / 2, w, h);
    }
    ctx.fillStyle = "#1a202c";
    ctx.font = "10px sans-serif";
    ctx.fillText(oid, cx + 4, cy - 4);
  }

  for (const [rid, robot] of Object.entries(snapshot.robots)) {
    const [cx, cy] = toCanvas(robot.x, robot.y, snapshot.table_size_mm, widthPx);
    const half = (robot.footprint_mm * k) / 2;
    ctx.save();
    ctx.translate(cx, cy);
    // canvas y is flipped, so CCW table headings rotate negative here
    ctx.rotate(-(robot.heading * Math.PI) / 180);
    ctx.fillStyle = ROBOT_COLOR;
    ctx.fillRect(-half, -half, 2 * half, 2 * half);
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(0, 0);
    ctx.lineTo(half * 1.4, 0);
    ctx.stroke();
    ctx.restore();
    ctx.fillStyle = "#1a202c";
    ctx.font = "10px sans-serif";
    ctx.fillText(rid, cx + half + 2, cy + half + 2);
  }
}
