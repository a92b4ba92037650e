"""Monitor-Analyze-Plan-Execute loop over shared knowledge.

Each phase is a standalone function so tests can drive them separately; the
loop composes them once per game tick. Two independent routes can flag a
problem: goal utilities dropping below their thresholds, and direct metric
rules on the raw snapshot (fps under the floor, player wider than half the
canvas). Plans key off the union, so a bug in one route does not silence the
other.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from . import goals as goal_model
from .goals import GoalEvaluation, GoalModel, util_player_size
from .world import Status, TerminalWorldError, World


# ----------------------------------------------------------------------
# Domain types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsSnapshot:
    """Complete per-tick reading of the world. player_size is the diameter."""

    fps: float
    player_size: float
    canvas_width: float
    playability: float
    score: int
    enemy_count: int
    collision_enabled: bool
    execution_time: int
    random_event_fired: bool


@dataclass(frozen=True)
class ReduceEnemyCount:
    fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must lie in (0, 1)")

    def describe(self) -> str:
        return f"ReduceEnemyCount(fraction={self.fraction!r})"


@dataclass(frozen=True)
class DisableEnemyEnemyCollision:
    def describe(self) -> str:
        return "DisableEnemyEnemyCollision"


@dataclass(frozen=True)
class ReducePlayerSize:
    factor: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise ValueError("factor must lie in (0, 1)")

    def describe(self) -> str:
        return f"ReducePlayerSize(factor={self.factor!r})"


@dataclass(frozen=True)
class IncreaseEnemyCount:
    amount: int = 5

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError("amount must be positive")

    def describe(self) -> str:
        return f"IncreaseEnemyCount(amount={self.amount})"


Action = ReduceEnemyCount | DisableEnemyEnemyCollision | ReducePlayerSize | IncreaseEnemyCount


@dataclass(frozen=True)
class FlaggedGoal:
    goal_id: str
    invariant: bool
    value: float
    # Which Table-style metric row this flag maps to ("fps", "playability",
    # or None when the goal has no reconfiguration strategy).
    metric: str | None
    # "utility", "rule", or "both" depending on which route raised it.
    source: str


@dataclass(frozen=True)
class AnalysisReport:
    tick: int
    flagged: tuple[FlaggedGoal, ...]
    invariant_violated: bool

    @property
    def empty(self) -> bool:
        return not self.flagged

    def metrics(self) -> frozenset[str]:
        return frozenset(f.metric for f in self.flagged if f.metric is not None)


@dataclass(frozen=True)
class Plan:
    actions: tuple[Action, ...]
    trigger_goals: tuple[str, ...]
    tick: int

    @property
    def empty(self) -> bool:
        return not self.actions


@dataclass(frozen=True)
class AdaptationRecord:
    tick: int
    action: str
    trigger_goals: tuple[str, ...]
    pre_fps: float
    post_fps: float
    pre_player_size: float
    post_player_size: float

    def to_line(self) -> str:
        triggers = ",".join(self.trigger_goals) if self.trigger_goals else "-"
        return "\t".join([
            str(self.tick), self.action, triggers,
            repr(self.pre_fps), repr(self.post_fps),
            repr(self.pre_player_size), repr(self.post_player_size),
        ])


ADAPTATION_LOG_HEADER = "\t".join([
    "tick", "action", "trigger_goals",
    "pre_fps", "post_fps", "pre_player_size", "post_player_size",
])


def format_adaptation_log(records) -> str:
    lines = [ADAPTATION_LOG_HEADER]
    lines.extend(r.to_line() for r in records)
    return "\n".join(lines) + "\n"


@dataclass
class Knowledge:
    """Shared state every phase reads and writes."""

    model: GoalModel
    config: object  # the live GameConfig, shared with the world
    fps_floor: float = 30.0
    fps_goal_id: str = "B"
    playability_goal_id: str = "C"
    grace_window: int = 120
    grace_counter: int = 0
    history: deque = field(default_factory=lambda: deque(maxlen=256))
    adaptation_log: list[AdaptationRecord] = field(default_factory=list)

    @classmethod
    def for_world(cls, world: World, model: GoalModel | None = None, **kwargs) -> "Knowledge":
        return cls(model=model or goal_model.default_model(), config=world.config, **kwargs)

    def record(self, snapshot: MetricsSnapshot, evaluation: GoalEvaluation) -> None:
        self.history.append((snapshot, evaluation))

    def latest(self):
        return self.history[-1] if self.history else None


@dataclass(frozen=True)
class StepOutcome:
    snapshot: MetricsSnapshot
    evaluation: GoalEvaluation
    report: AnalysisReport
    plan: Plan
    applied: tuple[Action, ...]
    failed: bool

    @property
    def tick(self) -> int:
        return self.snapshot.execution_time


# ----------------------------------------------------------------------
# Phases
# ----------------------------------------------------------------------

def monitor(world: World, fps: float | None = None) -> MetricsSnapshot:
    """Read every monitored metric off the world in one consistent snapshot.

    fps defaults to the synthetic cost model; a live server may pass its
    measured wall-clock rate instead. The loop records the snapshot into
    Knowledge alongside its evaluation; calling monitor alone leaves
    Knowledge untouched.
    """
    if world.status is not Status.RUNNING:
        raise TerminalWorldError("cannot monitor a terminal world")
    diameter = world.player.diameter
    return MetricsSnapshot(
        fps=world.fps() if fps is None else fps,
        player_size=diameter,
        canvas_width=world.config.width,
        playability=util_player_size(diameter, world.config.width),
        score=world.score,
        enemy_count=world.enemies.count,
        collision_enabled=world.config.enemy_enemy_collision,
        execution_time=world.tick,
        random_event_fired=world.last_events.random_event,
    )


def _metric_of(model: GoalModel, goal_id: str, value: float) -> str | None:
    goal = model.goals[goal_id]
    if goal.utility is None:
        return None
    name = goal.utility.fn
    if name == "util_fps":
        # Dropping below full satisfaction is tolerable down to the floor;
        # only a zero utility means the fps crossed it.
        return "fps" if value <= 0.0 else None
    if name == "util_player_size":
        return "playability"
    return None


def analyze(snapshot: MetricsSnapshot, evaluation: GoalEvaluation,
            knowledge: Knowledge) -> AnalysisReport:
    """Flag under-threshold goals plus direct metric-rule violations, and
    advance or reset the invariant grace counter."""
    if snapshot.execution_time != evaluation.tick:
        raise ValueError(
            f"snapshot tick {snapshot.execution_time} does not match "
            f"evaluation tick {evaluation.tick}")
    model = knowledge.model
    flags: dict[str, FlaggedGoal] = {}

    for gid in evaluation.below_threshold(model):
        value = evaluation.values[gid]
        flags[gid] = FlaggedGoal(
            goal_id=gid,
            invariant=model.goals[gid].invariant,
            value=value,
            metric=_metric_of(model, gid, value),
            source="utility",
        )

    def rule_flag(gid: str, metric: str) -> None:
        prior = flags.get(gid)
        goal = model.goals.get(gid)
        flags[gid] = FlaggedGoal(
            goal_id=gid,
            invariant=goal.invariant if goal else True,
            value=evaluation.values.get(gid, 0.0),
            metric=metric,
            source="both" if prior else "rule",
        )

    if snapshot.fps < knowledge.fps_floor:
        rule_flag(knowledge.fps_goal_id, "fps")
    if snapshot.player_size > snapshot.canvas_width / 2.0:
        rule_flag(knowledge.playability_goal_id, "playability")

    flagged = tuple(flags[g] for g in sorted(flags))
    invariant_violated = any(f.invariant for f in flagged)
    if invariant_violated:
        knowledge.grace_counter += 1
    else:
        knowledge.grace_counter = 0
    return AnalysisReport(tick=snapshot.execution_time, flagged=flagged,
                          invariant_violated=invariant_violated)


def plan(report: AnalysisReport, knowledge: Knowledge) -> Plan:
    """Pick reconfiguration actions for the flagged metric rows, cheapest
    disruption first."""
    actions: list[Action] = []
    metrics = report.metrics()

    if "fps" in metrics:
        if knowledge.config.enemy_enemy_collision:
            actions.append(DisableEnemyEnemyCollision())
        else:
            actions.append(ReduceEnemyCount(0.2))

    if "playability" in metrics:
        shrink = ReducePlayerSize(0.5)
        actions.append(shrink)
        latest = knowledge.latest()
        if latest is not None:
            snapshot = latest[0]
            projected = snapshot.player_size * shrink.factor
            thresholds = [
                knowledge.model.goals[f.goal_id].threshold
                for f in report.flagged
                if f.metric == "playability" and f.goal_id in knowledge.model.goals
            ]
            floor = min(thresholds) if thresholds else 1.0
            if util_player_size(projected, snapshot.canvas_width) < floor:
                actions.append(ReduceEnemyCount(0.2))

    deduped: list[Action] = []
    for action in actions:
        if action not in deduped:
            deduped.append(action)
    triggers = tuple(f.goal_id for f in report.flagged)
    return Plan(actions=tuple(deduped), trigger_goals=triggers, tick=report.tick)


def execute(plan_: Plan, world: World, knowledge: Knowledge) -> tuple[Action, ...]:
    """Apply each planned action to the world and append one log record per
    application. Only the declared adaptation knobs are touched."""
    if world.status is not Status.RUNNING:
        raise TerminalWorldError("cannot execute actions on a terminal world")
    applied: list[Action] = []
    for action in plan_.actions:
        pre_fps = world.fps()
        pre_ps = world.player.diameter

        if isinstance(action, ReducePlayerSize):
            world.player.radius *= action.factor
        elif isinstance(action, ReduceEnemyCount):
            n = world.enemies.count
            k = math.ceil(action.fraction * n)
            if k > 0:
                victims = world.rng.choice(n, size=k, replace=False)
                world.enemies.remove(victims)
            # Pin the respawn target to the survivors, otherwise the next
            # step's respawn would undo the removal.
            world.config.target_enemy_count = world.enemies.count
        elif isinstance(action, DisableEnemyEnemyCollision):
            world.config.enemy_enemy_collision = False
        elif isinstance(action, IncreaseEnemyCount):
            world.config.target_enemy_count += action.amount
        else:
            raise TypeError(f"unknown action {action!r}")

        knowledge.adaptation_log.append(AdaptationRecord(
            tick=world.tick,
            action=action.describe(),
            trigger_goals=plan_.trigger_goals,
            pre_fps=pre_fps,
            post_fps=world.fps(),
            pre_player_size=pre_ps,
            post_player_size=world.player.diameter,
        ))
        applied.append(action)
    return tuple(applied)


def mape_tick(world: World, knowledge: Knowledge,
              fps: float | None = None) -> StepOutcome:
    """One full loop pass, to run right after world.step() while Running.

    Fails the world once an invariant goal has been violated for more than
    grace_window consecutive ticks despite whatever was adapted meanwhile.
    """
    snapshot = monitor(world, fps=fps)
    evaluation = goal_model.evaluate(knowledge.model, snapshot)
    knowledge.record(snapshot, evaluation)
    report = analyze(snapshot, evaluation, knowledge)

    if knowledge.grace_counter > knowledge.grace_window:
        world._finish(Status.FAILED)
        empty = Plan(actions=(), trigger_goals=tuple(f.goal_id for f in report.flagged),
                     tick=report.tick)
        return StepOutcome(snapshot, evaluation, report, empty, (), failed=True)

    plan_ = plan(report, knowledge)
    applied = execute(plan_, world, knowledge) if not plan_.empty else ()
    return StepOutcome(snapshot, evaluation, report, plan_, applied, failed=False)
