// Client-side session state: the latest server frame plus everything the
// HUD accumulates over time. Strictly server-authoritative; nothing here
// simulates, it only records what the server said.

import type {
  AdaptationEvent,
  EndMessage,
  ExternalChange,
  GoalInfo,
  ServerHello,
  StateFrame,
  ToggleKey,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface LogEntry {
  tick: number;
  text: string;
  kind: "adaptation" | "external" | "event" | "error";
}

const LOG_LIMIT = 200;

export class ClientState {
  connection: ConnectionStatus = "connecting";
  hello: ServerHello | null = null;
  frame: StateFrame | null = null;
  end: EndMessage | null = null;
  /** wall-clock ms of the last applied frame, for the staleness indicator */
  frameReceivedAt = 0;
  adaptationCount = 0;
  log: LogEntry[] = [];
  /** total entries ever logged; unlike log.length it survives trimming */
  totalLogged = 0;
  /** client-believed toggle values, reconciled by every frame */
  toggles: Record<ToggleKey, boolean | number> = {
    mapekEnabled: true,
    enemyEnemyCollision: true,
    targetEnemyCount: 0,
  };

  applyHello(hello: ServerHello): void {
    this.hello = hello;
    this.toggles.enemyEnemyCollision = Boolean(
      hello.config.enemy_enemy_collision,
    );
    this.toggles.targetEnemyCount = Number(hello.config.target_enemy_count);
  }

  /** Fold one state frame in: replace the latest frame, mirror the server's
   * toggle values, and append every carried event to the log exactly once
   * (the server already guarantees exactly-once delivery per event). */
  applyFrame(frame: StateFrame, now: number): void {
    this.frame = frame;
    this.frameReceivedAt = now;
    this.toggles.mapekEnabled = frame.mapekEnabled;
    this.toggles.enemyEnemyCollision = frame.enemyEnemyCollision;
    this.toggles.targetEnemyCount = frame.targetEnemyCount;
    for (const a of frame.adaptations) {
      this.adaptationCount += 1;
      this.pushLog({
        tick: a.tick,
        text: `${a.action} (goals ${a.triggers.join(", ")})`,
        kind: "adaptation",
      });
    }
    for (const c of frame.externalChanges) {
      this.pushLog({
        tick: c.tick,
        text: `${c.key} set to ${String(c.value)}`,
        kind: "external",
      });
    }
    if (frame.randomEvent) {
      this.pushLog({
        tick: frame.tick,
        text: "random event: enemy target raised",
        kind: "event",
      });
    }
  }

  applyEnd(end: EndMessage): void {
    this.end = end;
    this.pushLog({
      tick: end.tick,
      text: `game over: ${end.outcome}, score ${end.score}`,
      kind: "event",
    });
  }

  applyError(tick: number, message: string): void {
    this.pushLog({ tick, text: message, kind: "error" });
  }

  pushLog(entry: LogEntry): void {
    this.log.push(entry);
    this.totalLogged += 1;
    if (this.log.length > LOG_LIMIT) {
      this.log.splice(0, this.log.length - LOG_LIMIT);
    }
  }

  goals(): GoalInfo[] {
    return this.hello?.goals ?? [];
  }

  /** Latest known server tick, used to stamp outbound messages. */
  tick(): number {
    return this.frame?.tick ?? 0;
  }

  isStale(now: number, thresholdMs: number): boolean {
    if (this.end || this.connection !== "open") return false;
    return this.frame !== null && now - this.frameReceivedAt > thresholdMs;
  }
}

export function formatAdaptation(a: AdaptationEvent): string {
  return `[${a.tick}] ${a.action} (goals ${a.triggers.join(", ")})`;
}

export function formatExternalChange(c: ExternalChange): string {
  return `[${c.tick}] ${c.key} set to ${String(c.value)}`;
}
