"""Deterministic fixed-tick simulation of the feesh game.

All randomness flows through one seeded generator per world, and every tick
consumes draws in a fixed order, so identical (seed, config, input sequence)
produce bit-identical worlds. Frame rate is modeled, not measured: a synthetic
cost formula turns entity load into milliseconds, which keeps headless
experiments independent of host hardware.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

from . import kernels


class Status(Enum):
    RUNNING = "running"
    GAME_OVER = "game_over"
    WON = "won"
    FAILED = "failed"


class TerminalWorldError(RuntimeError):
    """Raised when stepping or reconfiguring a world in a terminal status."""


@dataclass
class GameConfig:
    """Tunable game parameters. Adaptation knobs are mutated at run time;
    everything else is fixed for the lifetime of a world."""

    width: float = 800.0
    height: float = 600.0
    player_start_radius: float = 16.0
    player_speed: float = 2.5
    target_enemy_count: int = 20
    enemy_enemy_collision: bool = True
    enemy_radius_min: float = 8.0
    enemy_radius_max: float = 28.0
    enemy_speed_min: float = 0.6
    enemy_speed_max: float = 1.8
    random_event_probability: float = 0.02
    random_event_increment: int = 5
    growth_factor: float = 1.0
    wobble_vertices: int = 24
    wobble_amplitude: float = 0.12
    cost_base_ms: float = 2.0
    cost_per_entity_ms: float = 0.05
    cost_per_vertex_ms: float = 0.002
    cost_per_pair_ms: float = 0.0015

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas dimensions must be positive")
        if self.player_start_radius <= 0:
            raise ValueError("player_start_radius must be positive")
        if self.player_speed < 0:
            raise ValueError("player_speed must be non-negative")
        if self.target_enemy_count < 0:
            raise ValueError("target_enemy_count must be non-negative")
        if not 0.0 <= self.random_event_probability <= 1.0:
            raise ValueError("random_event_probability must lie in [0, 1]")
        if self.random_event_increment < 0:
            raise ValueError("random_event_increment must be non-negative")
        if not 0.0 < self.enemy_radius_min <= self.enemy_radius_max:
            raise ValueError("enemy radius range must satisfy 0 < min <= max")
        if 2.0 * self.enemy_radius_max >= min(self.width, self.height):
            # edge reflection assumes an enemy always fits inside the canvas
            raise ValueError("enemy diameter must stay below the smaller canvas side")
        if not 0.0 <= self.enemy_speed_min <= self.enemy_speed_max:
            raise ValueError("enemy speed range must satisfy 0 <= min <= max")
        if self.growth_factor <= 0:
            raise ValueError("growth_factor must be positive")
        if self.wobble_vertices < 3:
            raise ValueError("wobble_vertices must be at least 3")
        if self.cost_base_ms <= 0 or self.cost_per_entity_ms < 0 \
                or self.cost_per_vertex_ms < 0 or self.cost_per_pair_ms < 0:
            raise ValueError("cost coefficients must be positive (base) / non-negative")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, overrides: dict) -> "GameConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**overrides)
        config.validate()
        return config

    def copy(self) -> "GameConfig":
        return replace(self)


@dataclass
class Blob:
    """One circular entity. Outlines are wobbled at render time only."""

    x: float
    y: float
    vx: float
    vy: float
    radius: float
    wobble_seed: float
    wobble_vertices: int

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass
class StepEvents:
    """Everything noteworthy that happened in one tick."""

    ate: tuple[float, ...] = ()
    spawned: int = 0
    random_event: bool = False
    game_over: bool = False
    won: bool = False

    def __post_init__(self):
        assert not (self.won and self.game_over), "won and game_over are mutually exclusive"

    @property
    def empty(self) -> bool:
        return not (self.ate or self.spawned or self.random_event or self.game_over or self.won)

    def to_tokens(self) -> str:
        tokens = [f"ate:{r!r}" for r in self.ate]
        if self.spawned:
            tokens.append(f"spawned:{self.spawned}")
        if self.random_event:
            tokens.append("random_event")
        if self.game_over:
            tokens.append("game_over")
        if self.won:
            tokens.append("won")
        return ";".join(tokens) if tokens else "-"

    @classmethod
    def from_tokens(cls, text: str) -> "StepEvents":
        if text == "-":
            return cls()
        ate: list[float] = []
        spawned = 0
        random_event = game_over = won = False
        for token in text.split(";"):
            if token.startswith("ate:"):
                ate.append(float(token[4:]))
            elif token.startswith("spawned:"):
                spawned = int(token[8:])
            elif token == "random_event":
                random_event = True
            elif token == "game_over":
                game_over = True
            elif token == "won":
                won = True
            else:
                raise ValueError(f"unknown event token {token!r}")
        return cls(tuple(ate), spawned, random_event, game_over, won)


class EnemySet:
    """Struct-of-arrays storage for the enemy population."""

    __slots__ = ("pos", "vel", "radius", "wobble_seed")

    def __init__(self):
        self.pos = np.empty((0, 2), dtype=np.float64)
        self.vel = np.empty((0, 2), dtype=np.float64)
        self.radius = np.empty(0, dtype=np.float64)
        self.wobble_seed = np.empty(0, dtype=np.float64)

    @property
    def count(self) -> int:
        return self.radius.shape[0]

    def append(self, x, y, vx, vy, radius, wobble_seed) -> None:
        self.pos = np.vstack([self.pos, [[x, y]]])
        self.vel = np.vstack([self.vel, [[vx, vy]]])
        self.radius = np.append(self.radius, radius)
        self.wobble_seed = np.append(self.wobble_seed, wobble_seed)

    def remove(self, indices) -> None:
        keep = np.ones(self.count, dtype=bool)
        keep[indices] = False
        self.pos = self.pos[keep]
        self.vel = self.vel[keep]
        self.radius = self.radius[keep]
        self.wobble_seed = self.wobble_seed[keep]

    def as_blobs(self, wobble_vertices: int) -> list[Blob]:
        return [
            Blob(
                x=float(self.pos[i, 0]), y=float(self.pos[i, 1]),
                vx=float(self.vel[i, 0]), vy=float(self.vel[i, 1]),
                radius=float(self.radius[i]), wobble_seed=float(self.wobble_seed[i]),
                wobble_vertices=wobble_vertices,
            )
            for i in range(self.count)
        ]


@dataclass
class WorldView:
    """Read-only geometry handed to a steering policy."""

    player_x: float
    player_y: float
    player_radius: float
    enemy_pos: np.ndarray
    enemy_radius: np.ndarray


class World:
    """Full game state plus the seeded generator that drives it."""

    def __init__(self, config: GameConfig, rng: np.random.Generator):
        config.validate()
        self.config = config
        self.rng = rng
        self.player = Blob(
            x=config.width / 2.0, y=config.height / 2.0, vx=0.0, vy=0.0,
            radius=config.player_start_radius,
            wobble_seed=float(rng.uniform(0.0, 1000.0)),
            wobble_vertices=config.wobble_vertices,
        )
        self.enemies = EnemySet()
        self.score = 0
        self.tick = 0
        self.status = Status.RUNNING
        self.last_events = StepEvents()
        for _ in range(config.target_enemy_count):
            self.spawn_enemy()

    @classmethod
    def create(cls, seed: int, config: GameConfig | None = None) -> "World":
        return cls(config.copy() if config else GameConfig(), np.random.default_rng(seed))

    @property
    def width(self) -> float:
        return self.config.width

    @property
    def height(self) -> float:
        return self.config.height

    @property
    def running(self) -> bool:
        return self.status is Status.RUNNING

    def _finish(self, status: Status) -> None:
        if self.status is not Status.RUNNING:
            raise TerminalWorldError(f"cannot leave terminal status {self.status}")
        self.status = status

    # ------------------------------------------------------------------
    # Simulation
    # ------------------------------------------------------------------

    def step(self, direction=(0.0, 0.0)) -> StepEvents:
        """Advance one tick under the given steering input (|direction| <= 1).

        Order within a tick: player moves (clamped to the canvas), enemies
        advance and reflect, enemy pairs bounce if enabled, player/enemy
        overlaps resolve in enemy-index order (eat or die), the random load
        event may raise the enemy target, the population respawns up to the
        target, and finally the win condition is checked.
        """
        if self.status is not Status.RUNNING:
            raise TerminalWorldError(f"cannot step a world in status {self.status}")

        dx = float(direction[0])
        dy = float(direction[1])
        norm_sq = dx * dx + dy * dy
        if norm_sq > 1.0:
            inv = 1.0 / math.sqrt(norm_sq)
            dx *= inv
            dy *= inv

        self.tick += 1
        cfg = self.config
        p = self.player

        p.vx = dx * cfg.player_speed
        p.vy = dy * cfg.player_speed
        p.x = _clamp_center(p.x + p.vx, p.radius, cfg.width)
        p.y = _clamp_center(p.y + p.vy, p.radius, cfg.height)

        enemies = self.enemies
        if enemies.count:
            kernels.advance_enemies(enemies.pos, enemies.vel, enemies.radius,
                                    cfg.width, cfg.height)
            if cfg.enemy_enemy_collision and enemies.count >= 2:
                kernels.bounce_enemies(enemies.pos, enemies.vel, enemies.radius)

        ate: list[float] = []
        died = False
        if enemies.count:
            overlap = kernels.overlapping_enemies(enemies.pos, enemies.radius,
                                                  p.x, p.y, p.radius)
            if overlap.any():
                eaten_idx = []
                for i in np.flatnonzero(overlap):
                    enemy_r = float(enemies.radius[i])
                    if p.radius > enemy_r:
                        eaten_idx.append(i)
                        ate.append(enemy_r)
                        self.score += int(round(enemy_r))
                        p.radius = math.sqrt(p.radius * p.radius
                                             + cfg.growth_factor * enemy_r * enemy_r)
                    else:
                        died = True
                        break
                if eaten_idx:
                    enemies.remove(eaten_idx)

        if died:
            self._finish(Status.GAME_OVER)
            events = StepEvents(ate=tuple(ate), game_over=True)
            self.last_events = events
            return events

        random_event = bool(self.rng.random() < cfg.random_event_probability)
        if random_event:
            cfg.target_enemy_count += cfg.random_event_increment

        deficit = cfg.target_enemy_count - enemies.count
        for _ in range(deficit):
            self.spawn_enemy()

        won = p.diameter >= cfg.width
        if won:
            self._finish(Status.WON)

        events = StepEvents(
            ate=tuple(ate),
            spawned=max(deficit, 0),
            random_event=random_event,
            won=won,
        )
        self.last_events = events
        return events

    def spawn_enemy(self) -> Blob:
        """Spawn one enemy on a random canvas edge, aimed inward.

        Consumes rng draws in a fixed order (radius, edge, offset, jitter,
        speed, wobble seed), so spawns are reproducible from the rng state.
        """
        if self.status is not Status.RUNNING:
            raise TerminalWorldError("cannot spawn into a terminal world")
        cfg = self.config
        rng = self.rng
        radius = float(rng.uniform(cfg.enemy_radius_min, cfg.enemy_radius_max))
        edge = int(rng.integers(4))
        offset = float(rng.random())
        jitter = float(rng.uniform(-math.pi / 4.0, math.pi / 4.0))
        speed = float(rng.uniform(cfg.enemy_speed_min, cfg.enemy_speed_max))
        wobble_seed = float(rng.uniform(0.0, 1000.0))

        if edge == 0:  # top, moving down
            x, y, inward = offset * cfg.width, radius, math.pi / 2.0
        elif edge == 1:  # right, moving left
            x, y, inward = cfg.width - radius, offset * cfg.height, math.pi
        elif edge == 2:  # bottom, moving up
            x, y, inward = offset * cfg.width, cfg.height - radius, -math.pi / 2.0
        else:  # left, moving right
            x, y, inward = radius, offset * cfg.height, 0.0

        angle = inward + jitter
        vx = speed * math.cos(angle)
        vy = speed * math.sin(angle)
        self.enemies.append(x, y, vx, vy, radius, wobble_seed)
        return Blob(x=x, y=y, vx=vx, vy=vy, radius=radius,
                    wobble_seed=wobble_seed, wobble_vertices=cfg.wobble_vertices)

    # ------------------------------------------------------------------
    # Derived signals
    # ------------------------------------------------------------------

    def frame_cost(self) -> float:
        """Modeled frame cost in milliseconds for the current entity load."""
        return frame_cost_for(self.config, self.enemies.count)

    def fps(self) -> float:
        return min(60.0, 1000.0 / self.frame_cost())

    def view(self) -> WorldView:
        return WorldView(
            player_x=self.player.x,
            player_y=self.player.y,
            player_radius=self.player.radius,
            enemy_pos=self.enemies.pos,
            enemy_radius=self.enemies.radius,
        )

    def outline(self, blob: Blob) -> np.ndarray:
        """Wobbly closed outline of a blob at the current tick, for rendering."""
        return kernels.wobble_polygon(
            blob.x, blob.y, blob.radius, blob.wobble_seed,
            blob.wobble_vertices, self.tick, self.config.wobble_amplitude,
        )

    def enemy_blobs(self) -> list[Blob]:
        return self.enemies.as_blobs(self.config.wobble_vertices)

    def state_hash(self) -> str:
        """SHA-256 over the complete simulation state, bit-exact."""
        p = self.player
        h = hashlib.sha256()
        h.update(struct.pack("<qqq", self.tick, self.score,
                             list(Status).index(self.status)))
        h.update(struct.pack("<6d", p.x, p.y, p.vx, p.vy, p.radius, p.wobble_seed))
        h.update(self.enemies.pos.tobytes())
        h.update(self.enemies.vel.tobytes())
        h.update(self.enemies.radius.tobytes())
        h.update(self.enemies.wobble_seed.tobytes())
        h.update(json.dumps(self.config.to_dict(), sort_keys=True).encode())
        return h.hexdigest()


def frame_cost_for(config: GameConfig, enemy_count: int,
                   collision: bool | None = None) -> float:
    """Synthetic cost in milliseconds of one frame at the given entity load.

    cost = base + per_entity*n + per_vertex*V*n + per_pair*n(n-1)/2 with
    n counting the player, and the pair term only while enemy-enemy
    collision is on.
    """
    if collision is None:
        collision = config.enemy_enemy_collision
    n = enemy_count + 1
    cost = (config.cost_base_ms
            + config.cost_per_entity_ms * n
            + config.cost_per_vertex_ms * config.wobble_vertices * n)
    if collision:
        cost += config.cost_per_pair_ms * n * (n - 1) / 2.0
    return cost


def _clamp_center(value: float, radius: float, limit: float) -> float:
    """Keep a blob center inside [radius, limit - radius]; once the blob is
    wider than the canvas, pin it to the middle."""
    if 2.0 * radius >= limit:
        return limit / 2.0
    if value < radius:
        return radius
    if value > limit - radius:
        return limit - radius
    return value
