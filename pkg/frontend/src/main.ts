// Entry point: wire the socket, state store, canvas, HUD, and inputs
// together. The render loop runs on animation frames and always draws the
// latest applied frame; message arrival only updates state.

import { Connection } from "./net.js";
import { directionFromPointer, KeyTracker } from "./input.js";
import { Hud } from "./hud.js";
import {
  drawEndScreen,
  drawFrame,
  drawStaleOverlay,
} from "./render.js";
import { ClientState } from "./state.js";
import type { ToggleKey } from "./protocol.js";

const STALE_AFTER_MS = 600;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = byId<HTMLCanvasElement>("game");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2d canvas is unavailable");

const state = new ClientState();
const hud = new Hud({
  score: byId("score"),
  fps: byId("fps"),
  tick: byId("tick"),
  enemies: byId("enemies"),
  status: byId("status"),
  goals: byId("goals"),
  log: byId("log"),
  adaptationCount: byId("adaptation-count"),
});

const mapekBox = byId<HTMLInputElement>("toggle-mapek");
const collisionBox = byId<HTMLInputElement>("toggle-collision");
const enemyCountInput = byId<HTMLInputElement>("toggle-enemy-count");

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const connection = new Connection(new WebSocket(wsUrl), {
  onHello(hello) {
    state.applyHello(hello);
    hud.buildGoalRows(hello.goals);
    canvas.width = Number(hello.config.width);
    canvas.height = Number(hello.config.height);
    syncToggleControls();
  },
  onState(frame) {
    state.applyFrame(frame, performance.now());
    syncToggleControls();
  },
  onEnd(end) {
    state.applyEnd(end);
  },
  onServerError(error) {
    state.applyError(error.tick, error.message);
  },
  onProtocolError(error) {
    state.applyError(state.tick(), `protocol: ${error.message}`);
  },
  onStatus(status) {
    state.connection = status;
  },
});
state.connection = connection.status;

function syncToggleControls(): void {
  mapekBox.checked = Boolean(state.toggles.mapekEnabled);
  collisionBox.checked = Boolean(state.toggles.enemyEnemyCollision);
  if (document.activeElement !== enemyCountInput) {
    enemyCountInput.value = String(state.toggles.targetEnemyCount);
  }
}

function sendToggle(key: ToggleKey, value: boolean | number): void {
  if (!connection.sendToggle(state.tick(), key, value)) {
    state.applyError(state.tick(), `disconnected, ${key} change dropped`);
  }
}

mapekBox.addEventListener("change", () =>
  sendToggle("mapekEnabled", mapekBox.checked),
);
collisionBox.addEventListener("change", () =>
  sendToggle("enemyEnemyCollision", collisionBox.checked),
);
enemyCountInput.addEventListener("change", () => {
  const value = Number.parseInt(enemyCountInput.value, 10);
  if (Number.isInteger(value) && value >= 0) {
    sendToggle("targetEnemyCount", value);
  } else {
    enemyCountInput.value = String(state.toggles.targetEnemyCount);
  }
});

// -- steering ----------------------------------------------------------

const keys = new KeyTracker();

function sendDirection(direction: [number, number]): void {
  if (!connection.sendInput(state.tick(), direction[0], direction[1])) {
    state.applyError(state.tick(), "disconnected, steering dropped");
  }
}

window.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  const next = keys.keyDown(event.key);
  if (next) {
    event.preventDefault();
    sendDirection(next);
  }
});
window.addEventListener("keyup", (event) => {
  const next = keys.keyUp(event.key);
  if (next) sendDirection(next);
});
window.addEventListener("blur", () => {
  const next = keys.clear();
  if (next) sendDirection(next);
});

let pointerHeld = false;
canvas.addEventListener("pointerdown", (event) => {
  pointerHeld = true;
  steerToPointer(event);
});
canvas.addEventListener("pointermove", (event) => {
  if (pointerHeld) steerToPointer(event);
});
window.addEventListener("pointerup", () => {
  if (!pointerHeld) return;
  pointerHeld = false;
  sendDirection([0, 0]);
});

function steerToPointer(event: PointerEvent): void {
  const frame = state.frame;
  if (!frame) return;
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * frame.width;
  const y = ((event.clientY - rect.top) / rect.height) * frame.height;
  sendDirection(directionFromPointer(frame.player.x, frame.player.y, x, y));
}

// -- render loop -------------------------------------------------------

function renderLoop(): void {
  requestAnimationFrame(renderLoop);
  const frame = state.frame;
  hud.update(state);
  if (!frame) return;
  drawFrame(ctx!, frame);
  if (state.end) {
    drawEndScreen(ctx!, frame.width, frame.height, state.end.outcome,
                  state.end.score);
  } else if (state.isStale(performance.now(), STALE_AFTER_MS)) {
    drawStaleOverlay(ctx!, frame.width, frame.height);
  }
}

requestAnimationFrame(renderLoop);
