// HUD rendering: score/fps readouts, one utility bar per goal, the
// scrolling adaptation log, and the three run-time toggles. Pure
// formatting lives in exported helpers; the Hud class owns the DOM.

import type { GoalInfo } from "./protocol.js";
import type { ClientState, LogEntry } from "./state.js";

export function formatFps(fps: number): string {
  return fps.toFixed(1);
}

export function formatUtility(value: number): string {
  return value.toFixed(2);
}

/** Bar width for a utility in [0, 1], clamped, as a CSS percentage. */
export function utilityBarPercent(value: number): number {
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped * 1000) / 10;
}

export function formatLogEntry(entry: LogEntry): string {
  return `[${entry.tick}] ${entry.text}`;
}

export function connectionLabel(state: ClientState): string {
  if (state.connection === "connecting") return "connecting";
  if (state.connection === "closed") return "disconnected - inputs dropped";
  return state.end ? "session ended" : "live";
}

interface GoalRow {
  fill: HTMLElement;
  value: HTMLElement;
  row: HTMLElement;
}

export class Hud {
  private goalRows = new Map<string, GoalRow>();
  private seenLogEntries = 0;

  constructor(
    private readonly root: {
      score: HTMLElement;
      fps: HTMLElement;
      tick: HTMLElement;
      enemies: HTMLElement;
      status: HTMLElement;
      goals: HTMLElement;
      log: HTMLElement;
      adaptationCount: HTMLElement;
    },
  ) {}

  buildGoalRows(goals: GoalInfo[]): void {
    this.root.goals.textContent = "";
    this.goalRows.clear();
    for (const goal of goals) {
      const row = document.createElement("div");
      row.className = "goal-row";
      const name = document.createElement("span");
      name.className = "goal-name";
      name.textContent = `${goal.id} ${goal.label}`;
      if (goal.invariant) name.textContent += " *";
      const bar = document.createElement("div");
      bar.className = "goal-bar";
      const fill = document.createElement("div");
      fill.className = "goal-fill";
      bar.appendChild(fill);
      const value = document.createElement("span");
      value.className = "goal-value";
      row.append(name, bar, value);
      this.root.goals.appendChild(row);
      this.goalRows.set(goal.id, { fill, value, row });
    }
  }

  update(state: ClientState): void {
    const frame = state.frame;
    this.root.status.textContent = connectionLabel(state);
    this.root.status.dataset.state = state.connection;
    if (!frame) return;
    this.root.score.textContent = String(frame.score);
    this.root.fps.textContent = formatFps(frame.fps);
    this.root.tick.textContent = String(frame.tick);
    this.root.enemies.textContent = String(frame.enemies.length);
    this.root.adaptationCount.textContent = String(state.adaptationCount);
    for (const [gid, row] of this.goalRows) {
      const value = frame.utilities[gid];
      if (value === undefined) continue;
      row.fill.style.width = `${utilityBarPercent(value)}%`;
      row.value.textContent = formatUtility(value);
      row.row.dataset.status = frame.goalStatuses[gid] ?? "";
    }
    this.appendNewLogEntries(state);
  }

  private appendNewLogEntries(state: ClientState): void {
    // the state log is a trimmed window, so diff on the lifetime counter
    const unseen = state.totalLogged - this.seenLogEntries;
    if (unseen <= 0) return;
    for (const entry of state.log.slice(-unseen)) {
      const line = document.createElement("div");
      line.className = `log-line log-${entry.kind}`;
      line.textContent = formatLogEntry(entry);
      this.root.log.appendChild(line);
    }
    this.seenLogEntries = state.totalLogged;
    while (this.root.log.childElementCount > 200) {
      this.root.log.removeChild(this.root.log.firstChild!);
    }
    this.root.log.scrollTop = this.root.log.scrollHeight;
  }
}
