// Keyboard and pointer steering. Keys map to a unit direction (diagonals
// normalized); a pointer drag supplies a direction vector from the player
// toward the cursor. Latest-wins on the server side, so we just send on
// every change.

const KEY_VECTORS: Record<string, [number, number]> = {
  arrowup: [0, -1],
  arrowdown: [0, 1],
  arrowleft: [-1, 0],
  arrowright: [1, 0],
  w: [0, -1],
  s: [0, 1],
  a: [-1, 0],
  d: [1, 0],
};

export function isSteeringKey(key: string): boolean {
  return key.toLowerCase() in KEY_VECTORS;
}

/** Combine currently held keys into a direction with |v| <= 1.
 * Opposing keys cancel; diagonals come out at unit length. */
export function directionFromKeys(held: Iterable<string>): [number, number] {
  let dx = 0;
  let dy = 0;
  for (const key of held) {
    const vec = KEY_VECTORS[key.toLowerCase()];
    if (vec) {
      dx += vec[0];
      dy += vec[1];
    }
  }
  return normalize(dx, dy);
}

/** Direction from the player position toward a pointer location, with a
 * small dead zone so a click on the player itself means "stop". */
export function directionFromPointer(
  playerX: number,
  playerY: number,
  pointerX: number,
  pointerY: number,
  deadZone = 12,
): [number, number] {
  const dx = pointerX - playerX;
  const dy = pointerY - playerY;
  if (Math.hypot(dx, dy) <= deadZone) return [0, 0];
  return normalize(dx, dy);
}

export function normalize(dx: number, dy: number): [number, number] {
  const len = Math.hypot(dx, dy);
  if (len === 0) return [0, 0];
  return [dx / len, dy / len];
}

/** Tracks held steering keys and reports direction changes. */
export class KeyTracker {
  private held = new Set<string>();
  private last: [number, number] = [0, 0];

  /** Returns the new direction if it changed, otherwise null. */
  keyDown(key: string): [number, number] | null {
    if (!isSteeringKey(key)) return null;
    this.held.add(key.toLowerCase());
    return this.refresh();
  }

  keyUp(key: string): [number, number] | null {
    if (!isSteeringKey(key)) return null;
    this.held.delete(key.toLowerCase());
    return this.refresh();
  }

  /** Window blur etc.: drop everything, stop the player. */
  clear(): [number, number] | null {
    if (this.held.size === 0) return null;
    this.held.clear();
    return this.refresh();
  }

  direction(): [number, number] {
    return this.last;
  }

  private refresh(): [number, number] | null {
    const next = directionFromKeys(this.held);
    if (next[0] === this.last[0] && next[1] === this.last[1]) return null;
    this.last = next;
    return next;
  }
}
