"""Tick-by-tick trace files: write, parse, and verified replay.

A trace captures everything needed to re-execute a run: seed, config, whether
the adaptation loop was on, and per tick the steering input plus observed
outputs. Replay re-simulates from the header and checks every recorded value
and the final state hash, so a trace doubles as a regression fixture.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .world import GameConfig, StepEvents, World

FORMAT_TAG = "feesh-trace v1"
COLUMNS = "tick\tdx\tdy\tevents\tscore\tfps\tplayer_radius"


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    dx: float
    dy: float
    events: StepEvents
    score: int
    fps: float
    player_radius: float

    def to_line(self) -> str:
        return "\t".join([
            str(self.tick), repr(self.dx), repr(self.dy),
            self.events.to_tokens(), str(self.score),
            repr(self.fps), repr(self.player_radius),
        ])

    @classmethod
    def from_line(cls, line: str) -> "TraceRecord":
        parts = line.split("\t")
        if len(parts) != 7:
            raise ValueError(f"malformed trace line: {line!r}")
        return cls(
            tick=int(parts[0]), dx=float(parts[1]), dy=float(parts[2]),
            events=StepEvents.from_tokens(parts[3]), score=int(parts[4]),
            fps=float(parts[5]), player_radius=float(parts[6]),
        )


@dataclass(frozen=True)
class Trace:
    seed: int
    config: dict
    mapek: bool
    records: tuple[TraceRecord, ...]
    final_hash: str
    outcome: str


class TraceWriter:
    """Streams a run to disk; finish() seals it with hash and outcome."""

    def __init__(self, path, seed: int, config: GameConfig, mapek: bool):
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(f"# {FORMAT_TAG}\n")
        self._fh.write(f"# seed: {seed}\n")
        self._fh.write(f"# mapek: {'on' if mapek else 'off'}\n")
        self._fh.write(f"# config: {json.dumps(config.to_dict(), sort_keys=True)}\n")
        self._fh.write(COLUMNS + "\n")
        self._sealed = False

    def record(self, direction, events: StepEvents, world: World) -> None:
        rec = TraceRecord(
            tick=world.tick, dx=float(direction[0]), dy=float(direction[1]),
            events=events, score=world.score, fps=world.fps(),
            player_radius=world.player.radius,
        )
        self._fh.write(rec.to_line() + "\n")

    def finish(self, world: World) -> None:
        self._fh.write(f"# outcome: {world.status.value}\n")
        self._fh.write(f"# final_hash: {world.state_hash()}\n")
        self._fh.close()
        self._sealed = True

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if not self._sealed and not self._fh.closed:
            self._fh.close()


def read_trace(path) -> Trace:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != f"# {FORMAT_TAG}":
        raise ValueError(f"{path}: not a recognized trace file")
    seed = None
    mapek = None
    config = None
    final_hash = None
    outcome = None
    records = []
    for line in lines[1:]:
        if line.startswith("# seed: "):
            seed = int(line[len("# seed: "):])
        elif line.startswith("# mapek: "):
            mapek = line[len("# mapek: "):] == "on"
        elif line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif line.startswith("# outcome: "):
            outcome = line[len("# outcome: "):]
        elif line.startswith("# final_hash: "):
            final_hash = line[len("# final_hash: "):]
        elif line == COLUMNS or not line:
            continue
        else:
            records.append(TraceRecord.from_line(line))
    if seed is None or mapek is None or config is None:
        raise ValueError(f"{path}: incomplete trace header")
    if final_hash is None or outcome is None:
        raise ValueError(f"{path}: trace was not sealed (missing footer)")
    return Trace(seed=seed, config=config, mapek=mapek,
                 records=tuple(records), final_hash=final_hash, outcome=outcome)


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    ticks_checked: int
    mismatches: tuple[str, ...]


def replay(trace: Trace) -> ReplayResult:
    """Re-execute a trace and compare every recorded value bit-exactly."""
    from . import mape  # local import keeps trace usable without the loop

    world = World.create(trace.seed, GameConfig.from_dict(trace.config))
    knowledge = mape.Knowledge.for_world(world) if trace.mapek else None
    mismatches: list[str] = []

    def check(tick: int, name: str, got, want) -> None:
        if got != want:
            mismatches.append(f"tick {tick}: {name} replayed {got!r}, trace says {want!r}")

    for rec in trace.records:
        if not world.running:
            mismatches.append(f"tick {rec.tick}: world already terminal, trace continues")
            break
        events = world.step((rec.dx, rec.dy))
        check(rec.tick, "tick", world.tick, rec.tick)
        check(rec.tick, "events", events, rec.events)
        check(rec.tick, "score", world.score, rec.score)
        check(rec.tick, "fps", world.fps(), rec.fps)
        check(rec.tick, "player_radius", world.player.radius, rec.player_radius)
        if mismatches:
            break
        if knowledge is not None and world.running:
            mape.mape_tick(world, knowledge)

    if not mismatches:
        check(world.tick, "outcome", world.status.value, trace.outcome)
        check(world.tick, "final_hash", world.state_hash(), trace.final_hash)
    return ReplayResult(ok=not mismatches, ticks_checked=len(trace.records),
                        mismatches=tuple(mismatches))
