"""Session server: one live game per WebSocket connection.

The client opens the socket and sends a hello (optionally carrying config
overrides); the server answers with its own hello plus the first state frame,
then streams one frame per tick. Steering inputs buffer latest-wins, toggles
apply at the next tick boundary. The simulation never waits for the client:
a one-slot outbound queue drops stale frames, while adaptation and external-
change events ride a pending list that only clears when a frame is actually
sent, so each event reaches the client exactly once.

This module is loaded only by the serve command; the experiment path never
imports it.
"""

from __future__ import annotations

import asyncio
import json
import re
import secrets
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import goals as goal_model
from .goals import GoalModel
from .mape import Knowledge, mape_tick, monitor
from .world import GameConfig, World

PROTOCOL = "feesh-wire v1"
TOGGLE_KEYS = ("mapekEnabled", "enemyEnemyCollision", "targetEnemyCount")

_CAMEL = re.compile(r"(?<!^)(?=[A-Z])")


def _snake(name: str) -> str:
    return _CAMEL.sub("_", name).lower()


def merge_config_overrides(defaults: GameConfig, overrides: dict) -> GameConfig:
    """Apply wire overrides (camelCase or snake_case keys) over defaults;
    raises ValueError on unknown keys or out-of-range values."""
    merged = dict(defaults.to_dict())
    for key, value in overrides.items():
        if not isinstance(key, str):
            raise ValueError(f"config keys must be strings, got {key!r}")
        merged[_snake(key)] = value
    return GameConfig.from_dict(merged)


@dataclass
class SessionState:
    world: World
    knowledge: Knowledge
    mapek_enabled: bool = True
    direction: tuple[float, float] = (0.0, 0.0)
    pending_toggles: list[tuple[str, object]] = field(default_factory=list)
    # events awaiting their exactly-once broadcast
    pending_adaptations: list[dict] = field(default_factory=list)
    pending_external: list[dict] = field(default_factory=list)
    measured_fps: float | None = None


def build_state_frame(state: SessionState, evaluation) -> dict:
    world = state.world
    player = world.player

    def outline(blob) -> list[list[float]]:
        return [[round(float(x), 2), round(float(y), 2)]
                for x, y in world.outline(blob)]

    fps = world.fps() if state.measured_fps is None else state.measured_fps
    return {
        "type": "state",
        "tick": world.tick,
        "status": world.status.value,
        "score": world.score,
        "fps": round(fps, 2),
        "mapekEnabled": state.mapek_enabled,
        "targetEnemyCount": world.config.target_enemy_count,
        "enemyEnemyCollision": world.config.enemy_enemy_collision,
        "randomEvent": world.last_events.random_event,
        "width": world.config.width,
        "height": world.config.height,
        "player": {
            "x": round(player.x, 2), "y": round(player.y, 2),
            "radius": round(player.radius, 2),
            "outline": outline(player),
        },
        "enemies": [
            {
                "x": round(b.x, 2), "y": round(b.y, 2),
                "radius": round(b.radius, 2),
                "outline": outline(b),
            }
            for b in world.enemy_blobs()
        ],
        "utilities": {gid: evaluation.values[gid]
                      for gid in sorted(evaluation.values)},
        "goalStatuses": {gid: evaluation.statuses[gid].value
                         for gid in sorted(evaluation.statuses)},
    }


class Session:
    """Owns one world, its tick loop, and the outbound frame machinery."""

    def __init__(self, websocket: WebSocket, config: GameConfig, seed: int,
                 session_id: str, model: GoalModel, tick_rate: float,
                 real_fps: bool):
        self.ws = websocket
        self.id = session_id
        self.seed = seed
        self.tick_rate = tick_rate
        self.real_fps = real_fps
        world = World(config, np.random.default_rng(seed))
        self.state = SessionState(world=world,
                                  knowledge=Knowledge(model=model,
                                                      config=world.config))
        self._frame_slot: asyncio.Queue = asyncio.Queue(maxsize=1)

    # -- inbound ---------------------------------------------------------

    async def handle_message(self, raw: str) -> None:
        state = self.state
        try:
            msg = json.loads(raw)
            if not isinstance(msg, dict):
                raise ValueError("message must be a JSON object")
            kind = msg.get("type")
            if kind == "input":
                state.direction = (float(msg["dx"]), float(msg["dy"]))
            elif kind == "toggle":
                key = msg.get("key")
                if key not in TOGGLE_KEYS:
                    raise ValueError(f"unknown toggle key {key!r}")
                value = msg["value"]
                if key == "targetEnemyCount":
                    value = int(value)
                    if value < 0:
                        raise ValueError("targetEnemyCount must be >= 0")
                else:
                    value = bool(value)
                state.pending_toggles.append((key, value))
            else:
                raise ValueError(f"unknown message type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            await self.send_error(str(exc))

    async def send_error(self, message: str) -> None:
        try:
            await self.ws.send_text(json.dumps({
                "type": "error", "tick": self.state.world.tick,
                "message": message,
            }))
        except Exception:
            pass  # socket already gone; the session is ending anyway

    # -- tick loop -------------------------------------------------------

    def _apply_toggles(self) -> None:
        state = self.state
        for key, value in state.pending_toggles:
            if key == "mapekEnabled":
                state.mapek_enabled = value
            elif key == "enemyEnemyCollision":
                state.world.config.enemy_enemy_collision = value
            elif key == "targetEnemyCount":
                state.world.config.target_enemy_count = value
            state.pending_external.append({
                "tick": state.world.tick, "key": key, "value": value,
            })
        state.pending_toggles.clear()

    def _run_tick(self):
        """Advance one tick; returns the goal evaluation for the frame."""
        state = self.state
        world = state.world
        self._apply_toggles()
        world.step(state.direction)
        if not world.running:
            return goal_model.evaluate(state.knowledge.model,
                                       terminal_snapshot(world))
        if state.mapek_enabled:
            outcome = mape_tick(world, state.knowledge, fps=state.measured_fps)
            for action in outcome.applied:
                state.pending_adaptations.append({
                    "tick": world.tick,
                    "action": action.describe(),
                    "triggers": list(outcome.plan.trigger_goals),
                })
            return outcome.evaluation
        snapshot = monitor(world, fps=state.measured_fps)
        evaluation = goal_model.evaluate(state.knowledge.model, snapshot)
        state.knowledge.record(snapshot, evaluation)
        return evaluation

    def _offer_frame(self, frame: dict) -> None:
        # one-slot queue: junk the stale frame, never block the simulation
        if self._frame_slot.full():
            try:
                self._frame_slot.get_nowait()
            except asyncio.QueueEmpty:
                pass
        self._frame_slot.put_nowait(frame)

    def _attach_events(self, frame: dict) -> None:
        # attach-and-clear synchronously (no await in between), so each event
        # lands in exactly one frame that is actually transmitted
        state = self.state
        frame["adaptations"] = state.pending_adaptations[:]
        state.pending_adaptations.clear()
        frame["externalChanges"] = state.pending_external[:]
        state.pending_external.clear()

    async def _sender(self) -> None:
        while True:
            frame = await self._frame_slot.get()
            self._attach_events(frame)
            await self.ws.send_text(json.dumps(frame))

    async def run(self) -> None:
        state = self.state
        sender = asyncio.create_task(self._sender())
        loop = asyncio.get_running_loop()
        period = 1.0 / self.tick_rate
        next_deadline = loop.time()
        last_tick_at = loop.time()
        try:
            evaluation = goal_model.evaluate(state.knowledge.model,
                                             monitor(state.world))
            self._offer_frame(build_state_frame(state, evaluation))
            while state.world.running:
                next_deadline += period
                delay = next_deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_deadline = loop.time()  # fell behind, resync
                if self.real_fps:
                    now = loop.time()
                    dt = now - last_tick_at
                    last_tick_at = now
                    if dt > 0:
                        state.measured_fps = min(60.0, 1.0 / dt)
                evaluation = self._run_tick()
                self._offer_frame(build_state_frame(state, evaluation))

            # terminal: quiesce the sender, then flush the final frame + end
            sender.cancel()
            try:
                await sender
            except asyncio.CancelledError:
                pass
            final = build_state_frame(state, evaluation)
            self._attach_events(final)
            await self.ws.send_text(json.dumps(final))
            await self.ws.send_text(json.dumps({
                "type": "end", "tick": state.world.tick,
                "outcome": state.world.status.value,
                "score": state.world.score,
            }))
        except (WebSocketDisconnect, RuntimeError):
            pass  # client went away mid-stream
        finally:
            if not sender.done():
                sender.cancel()
                try:
                    await sender
                except (asyncio.CancelledError, Exception):
                    pass


def terminal_snapshot(world: World):
    """Metrics view of a finished world for the HUD's last frame (the
    monitor itself only accepts running worlds)."""
    from .goals import util_player_size
    from .mape import MetricsSnapshot
    diameter = world.player.diameter
    return MetricsSnapshot(
        fps=world.fps(), player_size=diameter,
        canvas_width=world.config.width,
        playability=util_player_size(diameter, world.config.width),
        score=world.score, enemy_count=world.enemies.count,
        collision_enabled=world.config.enemy_enemy_collision,
        execution_time=world.tick,
        random_event_fired=world.last_events.random_event,
    )


def build_app(config: GameConfig | None = None, base_seed: int | None = None,
              real_fps: bool = False, tick_rate: float = 60.0,
              static_dir=None) -> FastAPI:
    """Assemble the FastAPI app: /ws for sessions, plus the built client
    as static files when frontend/dist exists."""
    app = FastAPI(title="feesh session server")
    defaults = config or GameConfig()
    model = goal_model.default_model()
    counter = {"n": 0}

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        try:
            raw = await websocket.receive_text()
        except WebSocketDisconnect:
            return

        async def reject(message: str) -> None:
            await websocket.send_text(json.dumps({
                "type": "error", "tick": 0, "message": message}))
            await websocket.close()

        try:
            msg = json.loads(raw)
            if not isinstance(msg, dict) or msg.get("type") != "hello":
                raise ValueError("first message must be a hello")
            overrides = msg.get("config") or {}
            if not isinstance(overrides, dict):
                raise ValueError("hello config must be an object")
            session_config = merge_config_overrides(defaults, overrides)
        except (ValueError, TypeError, json.JSONDecodeError) as exc:
            await reject(str(exc))
            return

        counter["n"] += 1
        seed = (base_seed + counter["n"] - 1 if base_seed is not None
                else secrets.randbits(32))
        session = Session(
            websocket, session_config, seed,
            session_id=f"s{counter['n']:04d}-{secrets.token_hex(4)}",
            model=model, tick_rate=tick_rate, real_fps=real_fps,
        )
        await websocket.send_text(json.dumps({
            "type": "hello", "tick": 0,
            "protocol": PROTOCOL,
            "sessionId": session.id,
            "seed": seed,
            "tickRate": tick_rate,
            "config": session_config.to_dict(),
            "goals": [
                {
                    "id": g.id, "label": g.label, "kind": g.kind.value,
                    "invariant": g.invariant, "refinement": g.refinement.value,
                    "threshold": g.threshold,
                }
                for g in model.goals.values()
            ],
        }))

        runner = asyncio.create_task(session.run())
        try:
            while True:
                raw = await websocket.receive_text()
                await session.handle_message(raw)
        except WebSocketDisconnect:
            pass
        finally:
            runner.cancel()
            try:
                await runner
            except asyncio.CancelledError:
                pass

    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="client")
    return app
