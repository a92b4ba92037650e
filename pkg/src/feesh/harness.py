"""Experiment runner: seeded replicates under both treatments, rank-test
comparisons, and deterministic report files.

Reports are pure functions of the per-replicate records plus run metadata, so
a report regenerated from the persisted records is byte-identical to the
original. All floats serialize via repr for exact round-trips.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import goals as goal_model
from . import stats
from .bot import BotPolicy
from .goals import util_player_size
from .mape import Knowledge, format_adaptation_log, mape_tick
from .trace import TraceWriter
from .world import GameConfig, Status, World

DEFAULT_TICK_LIMIT = 36_000  # ten simulated minutes at 60 ticks/s
DEFAULT_BASE_SEED = 1_000
DEFAULT_REPLICATES = 50
ALPHA = 0.05
TICKS_PER_SECOND = 60.0


class Treatment(Enum):
    MAPEK_ON = "mapek"
    NORMAL = "normal"


class Outcome(Enum):
    WON = "won"
    GAME_OVER = "game_over"
    FAILED = "failed"
    TICK_LIMIT = "tick_limit"


_STATUS_OUTCOME = {
    Status.WON: Outcome.WON,
    Status.GAME_OVER: Outcome.GAME_OVER,
    Status.FAILED: Outcome.FAILED,
}


@dataclass(frozen=True)
class ReplicateResult:
    seed: int
    treatment: Treatment
    ticks_survived: int
    mean_util_f: float
    final_score: int
    outcome: Outcome
    adaptations: int

    def to_line(self) -> str:
        return "\t".join([
            str(self.seed), self.treatment.value, str(self.ticks_survived),
            repr(self.mean_util_f), str(self.final_score),
            self.outcome.value, str(self.adaptations),
        ])

    @classmethod
    def from_line(cls, line: str) -> "ReplicateResult":
        parts = line.split("\t")
        if len(parts) != 7:
            raise ValueError(f"malformed replicate line: {line!r}")
        return cls(
            seed=int(parts[0]), treatment=Treatment(parts[1]),
            ticks_survived=int(parts[2]), mean_util_f=float(parts[3]),
            final_score=int(parts[4]), outcome=Outcome(parts[5]),
            adaptations=int(parts[6]),
        )


def run_replicate(seed: int, treatment: Treatment,
                  config: GameConfig | None = None,
                  tick_limit: int = DEFAULT_TICK_LIMIT,
                  policy: BotPolicy | None = None,
                  model=None,
                  trace_path=None) -> ReplicateResult:
    """One bot-driven run to a terminal status or the tick limit.

    mean_util_f averages the playability utility over end-of-tick states that
    are still Running (0.0 if the run dies on its first tick).
    """
    if tick_limit <= 0:
        raise ValueError("tick_limit must be positive")
    world = World.create(seed, config)
    policy = policy or BotPolicy()
    mapek = treatment is Treatment.MAPEK_ON
    knowledge = Knowledge.for_world(world, model) if mapek else None

    util_sum = 0.0
    running_ticks = 0
    writer = TraceWriter(trace_path, seed, world.config, mapek) if trace_path else None
    try:
        while world.running and world.tick < tick_limit:
            direction = policy.decide(world.view())
            events = world.step(direction)
            if writer is not None:
                writer.record(direction, events, world)
            if not world.running:
                break
            if mapek:
                mape_tick(world, knowledge)
            if world.running:
                util_sum += util_player_size(world.player.diameter, world.config.width)
                running_ticks += 1
        if writer is not None:
            writer.finish(world)
            writer = None
    finally:
        if writer is not None:
            writer.__exit__(None, None, None)

    outcome = _STATUS_OUTCOME.get(world.status, Outcome.TICK_LIMIT)
    return ReplicateResult(
        seed=seed,
        treatment=treatment,
        ticks_survived=world.tick,
        mean_util_f=util_sum / running_ticks if running_ticks else 0.0,
        final_score=world.score,
        outcome=outcome,
        adaptations=len(knowledge.adaptation_log) if knowledge else 0,
    )


# ----------------------------------------------------------------------
# Experiment aggregation
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    metric: str
    mapek: stats.Summary
    normal: stats.Summary
    test: stats.TestResult
    significant: bool
    direction: str  # "mapek", "normal", or "none"


@dataclass(frozen=True)
class ExperimentReport:
    replicates_per_treatment: int
    base_seed: int
    tick_limit: int
    config: dict
    results: tuple[ReplicateResult, ...]
    comparisons: tuple[Comparison, ...]

    def comparison(self, metric: str) -> Comparison:
        for c in self.comparisons:
            if c.metric == metric:
                return c
        raise KeyError(metric)


def run_experiment(replicates: int = DEFAULT_REPLICATES,
                   base_seed: int = DEFAULT_BASE_SEED,
                   config: GameConfig | None = None,
                   tick_limit: int = DEFAULT_TICK_LIMIT,
                   treatments: tuple[Treatment, ...] = (Treatment.MAPEK_ON, Treatment.NORMAL),
                   policy: BotPolicy | None = None,
                   progress=None) -> ExperimentReport:
    if replicates < 2:
        raise ValueError("need at least 2 replicates per treatment")
    config = config or GameConfig()
    results: list[ReplicateResult] = []
    for treatment in treatments:
        for i in range(replicates):
            result = run_replicate(base_seed + i, treatment, config,
                                   tick_limit, policy)
            results.append(result)
            if progress is not None:
                progress(result)
    return build_report(results, replicates, base_seed, tick_limit, config.to_dict())


def build_report(results, replicates_per_treatment: int, base_seed: int,
                 tick_limit: int, config: dict) -> ExperimentReport:
    """Assemble the report purely from replicate records and run metadata."""
    ordered = tuple(sorted(results, key=lambda r: (r.treatment.value, r.seed)))
    mapek = [r for r in ordered if r.treatment is Treatment.MAPEK_ON]
    normal = [r for r in ordered if r.treatment is Treatment.NORMAL]

    comparisons = []
    if mapek and normal:
        for metric, extract in (("ticks_survived", lambda r: float(r.ticks_survived)),
                                ("mean_util_f", lambda r: r.mean_util_f)):
            a = [extract(r) for r in mapek]
            b = [extract(r) for r in normal]
            test = stats.mann_whitney_u(a, b)
            center = len(a) * len(b) / 2.0
            if test.u_statistic > center:
                direction = "mapek"
            elif test.u_statistic < center:
                direction = "normal"
            else:
                direction = "none"
            comparisons.append(Comparison(
                metric=metric,
                mapek=stats.describe(a),
                normal=stats.describe(b),
                test=test,
                significant=test.p_value < ALPHA,
                direction=direction,
            ))
    return ExperimentReport(
        replicates_per_treatment=replicates_per_treatment,
        base_seed=base_seed,
        tick_limit=tick_limit,
        config=config,
        results=ordered,
        comparisons=tuple(comparisons),
    )


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------

REPLICATES_TAG = "feesh-replicates v1"
REPLICATE_COLUMNS = "seed\ttreatment\tticks_survived\tmean_util_f\tfinal_score\toutcome\tadaptations"


def write_replicates(path, report: ExperimentReport) -> None:
    lines = [
        f"# {REPLICATES_TAG}",
        f"# replicates_per_treatment: {report.replicates_per_treatment}",
        f"# base_seed: {report.base_seed}",
        f"# tick_limit: {report.tick_limit}",
        f"# config: {json.dumps(report.config, sort_keys=True)}",
        REPLICATE_COLUMNS,
    ]
    lines.extend(r.to_line() for r in report.results)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_replicates(path) -> ExperimentReport:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != f"# {REPLICATES_TAG}":
        raise ValueError(f"{path}: not a recognized replicates file")
    meta = {}
    results = []
    for line in lines[1:]:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif line == REPLICATE_COLUMNS or not line:
            continue
        else:
            results.append(ReplicateResult.from_line(line))
    return build_report(
        results,
        replicates_per_treatment=int(meta["replicates_per_treatment"]),
        base_seed=int(meta["base_seed"]),
        tick_limit=int(meta["tick_limit"]),
        config=json.loads(meta["config"]),
    )


def report_to_text(report: ExperimentReport) -> str:
    out = []
    out.append("feesh experiment report")
    out.append(f"replicates per treatment: {report.replicates_per_treatment}")
    out.append(f"base seed: {report.base_seed}    tick limit: {report.tick_limit}")
    out.append("")
    for treatment in (Treatment.MAPEK_ON, Treatment.NORMAL):
        rows = [r for r in report.results if r.treatment is treatment]
        if not rows:
            continue
        outcomes = {}
        for r in rows:
            outcomes[r.outcome.value] = outcomes.get(r.outcome.value, 0) + 1
        counts = ", ".join(f"{k}={v}" for k, v in sorted(outcomes.items()))
        out.append(f"treatment {treatment.value}: n={len(rows)}  outcomes: {counts}")
    out.append("")
    for c in report.comparisons:
        out.append(f"metric {c.metric}")
        for label, s in (("mapek", c.mapek), ("normal", c.normal)):
            out.append(
                f"  {label:<7} n={s.n} mean={s.mean!r} median={s.median!r} "
                f"q1={s.q1!r} q3={s.q3!r} min={s.minimum!r} max={s.maximum!r}")
            if c.metric == "ticks_survived":
                out.append(f"  {label:<7} median seconds at 60 t/s: "
                           f"{s.median / TICKS_PER_SECOND!r}")
        z = "-" if c.test.z_score is None else repr(c.test.z_score)
        out.append(f"  U={c.test.u_statistic!r} z={z} p={c.test.p_value!r} "
                   f"({c.test.method})")
        verdict = ("significant" if c.significant else "not significant")
        out.append(f"  verdict: {verdict} at {ALPHA}, higher under: {c.direction}")
        out.append("")
    return "\n".join(out)


def report_to_json(report: ExperimentReport) -> str:
    def comparison_dict(c: Comparison) -> dict:
        return {
            "metric": c.metric,
            "mapek": vars(c.mapek).copy(),
            "normal": vars(c.normal).copy(),
            "u_statistic": c.test.u_statistic,
            "z_score": c.test.z_score,
            "p_value": c.test.p_value,
            "method": c.test.method,
            "significant": c.significant,
            "direction": c.direction,
        }

    doc = {
        "replicates_per_treatment": report.replicates_per_treatment,
        "base_seed": report.base_seed,
        "tick_limit": report.tick_limit,
        "config": report.config,
        "comparisons": [comparison_dict(c) for c in report.comparisons],
        "replicates": [
            {
                "seed": r.seed,
                "treatment": r.treatment.value,
                "ticks_survived": r.ticks_survived,
                "mean_util_f": r.mean_util_f,
                "final_score": r.final_score,
                "outcome": r.outcome.value,
                "adaptations": r.adaptations,
            }
            for r in report.results
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_report_files(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    replicates_path = out / "replicates.tsv"
    write_replicates(replicates_path, report)
    paths.append(replicates_path)
    text_path = out / "report.txt"
    text_path.write_text(report_to_text(report), encoding="utf-8")
    paths.append(text_path)
    json_path = out / "report.json"
    json_path.write_text(report_to_json(report), encoding="utf-8")
    paths.append(json_path)
    return paths


# ----------------------------------------------------------------------
# Calibration sweep
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationPoint:
    enemy_count: int
    fps_collision_on: float
    fps_collision_off: float


def calibrate(config: GameConfig | None = None, max_enemies: int = 600,
              floor: float = 30.0) -> tuple[list[CalibrationPoint], int | None, int | None]:
    """Sweep enemy counts and locate where modeled fps crosses the floor,
    with and without pairwise collision cost."""
    from .world import frame_cost_for

    config = config or GameConfig()
    points = []
    crossing_on = None
    crossing_off = None
    for n in range(0, max_enemies + 1):
        on = min(60.0, 1000.0 / frame_cost_for(config, n, collision=True))
        off = min(60.0, 1000.0 / frame_cost_for(config, n, collision=False))
        points.append(CalibrationPoint(n, on, off))
        if crossing_on is None and on < floor:
            crossing_on = n
        if crossing_off is None and off < floor:
            crossing_off = n
    return points, crossing_on, crossing_off


def export_adaptations(results_knowledge, path) -> None:
    """Write one combined adaptation log for a set of (seed, knowledge) pairs."""
    lines = ["seed\t" + format_adaptation_log([]).splitlines()[0]]
    for seed, knowledge in results_knowledge:
        for record in knowledge.adaptation_log:
            lines.append(f"{seed}\t{record.to_line()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
