// Canvas renderer. Everything drawn comes straight from the latest server
// frame: the outlines are the server's wobble polygons, so the client does
// no shape math beyond path tracing.

import type { Blob, StateFrame } from "./protocol.js";

export const PLAYER_FILL = "#e86c9a";
export const PLAYER_STROKE = "#b44571";
export const ENEMY_FILL = "#5aa7d6";
export const ENEMY_STROKE = "#39708f";
export const BACKGROUND = "#10212e";

function tracePolygon(
  ctx: CanvasRenderingContext2D,
  outline: [number, number][],
): void {
  ctx.beginPath();
  ctx.moveTo(outline[0][0], outline[0][1]);
  for (let i = 1; i < outline.length; i++) {
    ctx.lineTo(outline[i][0], outline[i][1]);
  }
  ctx.closePath();
}

function drawBlob(
  ctx: CanvasRenderingContext2D,
  blob: Blob,
  fill: string,
  stroke: string,
): void {
  if (blob.outline.length < 3) return;
  tracePolygon(ctx, blob.outline);
  ctx.fillStyle = fill;
  ctx.fill();
  ctx.strokeStyle = stroke;
  ctx.lineWidth = 2;
  ctx.stroke();
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  frame: StateFrame,
): void {
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, frame.width, frame.height);
  for (const enemy of frame.enemies) {
    drawBlob(ctx, enemy, ENEMY_FILL, ENEMY_STROKE);
  }
  // player last so it reads on top of the crowd
  drawBlob(ctx, frame.player, PLAYER_FILL, PLAYER_STROKE);
}

export function drawStaleOverlay(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "rgba(16, 33, 46, 0.45)";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "#f4d06f";
  ctx.font = "16px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("no fresh frames - showing last known state", width / 2, 28);
}

export function drawEndScreen(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  outcome: string,
  score: number,
): void {
  ctx.fillStyle = "rgba(10, 18, 26, 0.82)";
  ctx.fillRect(0, 0, width, height);
  ctx.textAlign = "center";
  ctx.fillStyle = outcome === "won" ? "#8fd68a" : "#e86c6c";
  ctx.font = "bold 42px system-ui, sans-serif";
  ctx.fillText(endTitle(outcome), width / 2, height / 2 - 16);
  ctx.fillStyle = "#e8eef4";
  ctx.font = "22px system-ui, sans-serif";
  ctx.fillText(`final score ${score}`, width / 2, height / 2 + 24);
}

export function endTitle(outcome: string): string {
  switch (outcome) {
    case "won":
      return "You filled the tank!";
    case "game_over":
      return "Eaten.";
    case "failed":
      return "Run failed its frame-rate goal";
    default:
      return outcome;
  }
}
