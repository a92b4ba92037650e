import { describe, expect, it } from "vitest";
import {
  KeyTracker,
  directionFromKeys,
  directionFromPointer,
  normalize,
} from "../src/input.js";

describe("directionFromKeys", () => {
  it("maps single keys to unit axes", () => {
    expect(directionFromKeys(["w"])).toEqual([0, -1]);
    expect(directionFromKeys(["ArrowDown"])).toEqual([0, 1]);
    expect(directionFromKeys(["a"])).toEqual([-1, 0]);
    expect(directionFromKeys(["ArrowRight"])).toEqual([1, 0]);
  });

  it("yields zero with no keys held", () => {
    expect(directionFromKeys([])).toEqual([0, 0]);
  });

  it("normalizes diagonals to unit length", () => {
    const [dx, dy] = directionFromKeys(["w", "d"]);
    expect(Math.hypot(dx, dy)).toBeCloseTo(1, 12);
    expect(dx).toBeCloseTo(Math.SQRT1_2, 12);
    expect(dy).toBeCloseTo(-Math.SQRT1_2, 12);
  });

  it("cancels opposing keys", () => {
    expect(directionFromKeys(["a", "d"])).toEqual([0, 0]);
    expect(directionFromKeys(["w", "s", "d"])).toEqual([1, 0]);
  });

  it("ignores unbound keys", () => {
    expect(directionFromKeys(["q", "Shift", " "])).toEqual([0, 0]);
  });
});

describe("directionFromPointer", () => {
  it("points from the player toward the cursor at unit length", () => {
    const [dx, dy] = directionFromPointer(100, 100, 160, 180);
    expect(Math.hypot(dx, dy)).toBeCloseTo(1, 12);
    expect(dx).toBeCloseTo(0.6, 12);
    expect(dy).toBeCloseTo(0.8, 12);
  });

  it("treats clicks inside the dead zone as stop", () => {
    expect(directionFromPointer(100, 100, 104, 97)).toEqual([0, 0]);
  });
});

describe("normalize", () => {
  it("keeps zero at zero and unit-scales everything else", () => {
    expect(normalize(0, 0)).toEqual([0, 0]);
    const [x, y] = normalize(-3, 4);
    expect([x, y]).toEqual([-0.6, 0.8]);
  });
});

describe("KeyTracker", () => {
  it("reports changes only, keyed case-insensitively", () => {
    const keys = new KeyTracker();
    expect(keys.keyDown("W")).toEqual([0, -1]);
    expect(keys.keyDown("w")).toBeNull(); // repeat, no change
    expect(keys.keyDown("x")).toBeNull(); // not a steering key
    expect(keys.keyUp("W")).toEqual([0, 0]);
  });

  it("clears all held keys on demand", () => {
    const keys = new KeyTracker();
    keys.keyDown("a");
    keys.keyDown("s");
    expect(keys.clear()).toEqual([0, 0]);
    expect(keys.clear()).toBeNull(); // already empty
    expect(keys.direction()).toEqual([0, 0]);
  });

  it("steps through combinations as keys change", () => {
    const keys = new KeyTracker();
    keys.keyDown("d");
    const diag = keys.keyDown("s");
    expect(diag).not.toBeNull();
    expect(Math.hypot(diag![0], diag![1])).toBeCloseTo(1, 12);
    expect(keys.keyUp("d")).toEqual([0, 1]);
  });
});
