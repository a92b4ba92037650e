import { describe, expect, it } from "vitest";
import {
  ProtocolError,
  helloMessage,
  inputMessage,
  isStateFrame,
  parseServerMessage,
  toggleMessage,
} from "../src/protocol.js";

function sampleFrame(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({
    type: "state",
    tick: 7,
    status: "running",
    score: 12,
    fps: 60.0,
    mapekEnabled: true,
    targetEnemyCount: 20,
    enemyEnemyCollision: true,
    randomEvent: false,
    width: 800,
    height: 600,
    player: { x: 400, y: 300, radius: 16, outline: [[416, 300], [400, 316], [384, 300]] },
    enemies: [],
    utilities: { A: 1.0 },
    goalStatuses: { A: "satisfied" },
    adaptations: [],
    externalChanges: [],
    ...overrides,
  });
}

describe("outbound messages", () => {
  it("serializes input with type and tick first", () => {
    expect(inputMessage(5, 1, 0)).toBe('{"type":"input","tick":5,"dx":1,"dy":0}');
  });

  it("serializes toggles for each key kind", () => {
    expect(toggleMessage(9, "mapekEnabled", false)).toBe(
      '{"type":"toggle","tick":9,"key":"mapekEnabled","value":false}',
    );
    expect(toggleMessage(9, "targetEnemyCount", 30)).toBe(
      '{"type":"toggle","tick":9,"key":"targetEnemyCount","value":30}',
    );
  });

  it("omits the config object from a bare hello", () => {
    expect(helloMessage()).toBe('{"type":"hello","tick":0}');
    expect(helloMessage({})).toBe('{"type":"hello","tick":0}');
  });

  it("carries config overrides verbatim", () => {
    expect(helloMessage({ targetEnemyCount: 4 })).toBe(
      '{"type":"hello","tick":0,"config":{"targetEnemyCount":4}}',
    );
  });
});

describe("parseServerMessage", () => {
  it("round-trips a state frame", () => {
    const msg = parseServerMessage(sampleFrame());
    expect(msg.type).toBe("state");
    expect(isStateFrame(msg)).toBe(true);
    if (isStateFrame(msg)) {
      expect(msg.tick).toBe(7);
      expect(msg.player.outline).toHaveLength(3);
      expect(msg.utilities.A).toBe(1.0);
    }
  });

  it("defaults missing event lists to empty", () => {
    const raw = JSON.parse(sampleFrame());
    delete raw.adaptations;
    delete raw.externalChanges;
    const msg = parseServerMessage(JSON.stringify(raw));
    expect(isStateFrame(msg) && msg.adaptations).toEqual([]);
    expect(isStateFrame(msg) && msg.externalChanges).toEqual([]);
  });

  it("accepts hello, error and end messages", () => {
    const hello = parseServerMessage(JSON.stringify({
      type: "hello", tick: 0, protocol: "feesh-wire v1", sessionId: "s1",
      seed: 1, tickRate: 60, config: {}, goals: [],
    }));
    expect(hello.type).toBe("hello");
    const error = parseServerMessage(
      '{"type":"error","tick":3,"message":"nope"}',
    );
    expect(error.type === "error" && error.message).toBe("nope");
    const end = parseServerMessage(
      '{"type":"end","tick":10,"outcome":"won","score":99}',
    );
    expect(end.type === "end" && end.outcome).toBe("won");
  });

  it("rejects non-JSON, non-objects, and unknown types", () => {
    expect(() => parseServerMessage("not json")).toThrow(ProtocolError);
    expect(() => parseServerMessage("[1,2]")).toThrow(ProtocolError);
    expect(() => parseServerMessage('"state"')).toThrow(ProtocolError);
    expect(() => parseServerMessage('{"type":"warp","tick":1}')).toThrow(
      ProtocolError,
    );
  });

  it("rejects messages without a numeric tick", () => {
    expect(() =>
      parseServerMessage('{"type":"error","message":"x"}'),
    ).toThrow(ProtocolError);
    expect(() =>
      parseServerMessage('{"type":"error","tick":"soon","message":"x"}'),
    ).toThrow(ProtocolError);
  });

  it("rejects structurally broken frames", () => {
    expect(() => parseServerMessage(sampleFrame({ status: 4 }))).toThrow(
      ProtocolError,
    );
    expect(() =>
      parseServerMessage('{"type":"end","tick":1,"outcome":"won"}'),
    ).toThrow(ProtocolError);
  });
});
