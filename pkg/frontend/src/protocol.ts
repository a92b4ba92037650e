// Wire protocol types and (de)serialization for the feesh session server.
// See docs/protocol.md at the repository root; this module is the only
// place that knows the message shapes.

export const PROTOCOL_VERSION = "feesh-wire v1";

export type ToggleKey = "mapekEnabled" | "enemyEnemyCollision" | "targetEnemyCount";

export const TOGGLE_KEYS: readonly ToggleKey[] = [
  "mapekEnabled",
  "enemyEnemyCollision",
  "targetEnemyCount",
];

export interface GoalInfo {
  id: string;
  label: string;
  kind: string;
  invariant: boolean;
  refinement: "AND" | "OR" | "Leaf";
  threshold: number;
}

export interface ServerHello {
  type: "hello";
  tick: number;
  protocol: string;
  sessionId: string;
  seed: number;
  tickRate: number;
  config: Record<string, number | boolean>;
  goals: GoalInfo[];
}

export interface Blob {
  x: number;
  y: number;
  radius: number;
  outline: [number, number][];
}

export interface AdaptationEvent {
  tick: number;
  action: string;
  triggers: string[];
}

export interface ExternalChange {
  tick: number;
  key: ToggleKey;
  value: boolean | number;
}

export type GameStatus = "running" | "won" | "game_over" | "failed";

export interface StateFrame {
  type: "state";
  tick: number;
  status: GameStatus;
  score: number;
  fps: number;
  mapekEnabled: boolean;
  targetEnemyCount: number;
  enemyEnemyCollision: boolean;
  randomEvent: boolean;
  width: number;
  height: number;
  player: Blob;
  enemies: Blob[];
  utilities: Record<string, number>;
  goalStatuses: Record<string, "satisfied" | "satisficed" | "violated">;
  adaptations: AdaptationEvent[];
  externalChanges: ExternalChange[];
}

export interface ErrorMessage {
  type: "error";
  tick: number;
  message: string;
}

export interface EndMessage {
  type: "end";
  tick: number;
  outcome: GameStatus;
  score: number;
}

export type ServerMessage = ServerHello | StateFrame | ErrorMessage | EndMessage;

// -- outbound ----------------------------------------------------------

export function helloMessage(config?: Record<string, number | boolean>): string {
  const msg: Record<string, unknown> = { type: "hello", tick: 0 };
  if (config && Object.keys(config).length > 0) {
    msg.config = config;
  }
  return JSON.stringify(msg);
}

export function inputMessage(tick: number, dx: number, dy: number): string {
  return JSON.stringify({ type: "input", tick, dx, dy });
}

export function toggleMessage(
  tick: number,
  key: ToggleKey,
  value: boolean | number,
): string {
  return JSON.stringify({ type: "toggle", tick, key, value });
}

// -- inbound -----------------------------------------------------------

export class ProtocolError extends Error {}

function expectNumber(obj: Record<string, unknown>, field: string): number {
  const v = obj[field];
  if (typeof v !== "number" || Number.isNaN(v)) {
    throw new ProtocolError(`field ${field} must be a number`);
  }
  return v;
}

/** Parse one raw websocket text payload into a typed server message.
 * Shape checks are shallow on purpose: the server is trusted, we only
 * guard against talking to something that is not a feesh server. */
export function parseServerMessage(raw: string): ServerMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new ProtocolError("payload is not valid JSON");
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError("payload must be a JSON object");
  }
  const msg = parsed as Record<string, unknown>;
  expectNumber(msg, "tick");
  switch (msg.type) {
    case "hello":
      if (typeof msg.protocol !== "string" || !Array.isArray(msg.goals)) {
        throw new ProtocolError("malformed hello");
      }
      return msg as unknown as ServerHello;
    case "state": {
      if (typeof msg.status !== "string" || typeof msg.player !== "object") {
        throw new ProtocolError("malformed state frame");
      }
      const frame = msg as unknown as StateFrame;
      // older payloads in flight around game end may omit the event lists
      frame.adaptations = frame.adaptations ?? [];
      frame.externalChanges = frame.externalChanges ?? [];
      return frame;
    }
    case "error":
      if (typeof msg.message !== "string") {
        throw new ProtocolError("malformed error message");
      }
      return msg as unknown as ErrorMessage;
    case "end":
      if (typeof msg.outcome !== "string") {
        throw new ProtocolError("malformed end message");
      }
      expectNumber(msg, "score");
      return msg as unknown as EndMessage;
    default:
      throw new ProtocolError(`unknown message type ${String(msg.type)}`);
  }
}

export function isStateFrame(msg: ServerMessage): msg is StateFrame {
  return msg.type === "state";
}
