"""Self-adaptive feesh: a deterministic eat-and-grow game wrapped in a
goal-driven monitor/analyze/plan/execute loop, with an experiment harness
for comparing adaptive and non-adaptive runs.

The session server lives in feesh.service and is imported only by the
serve command, never by this package root or the experiment path.
"""

from .bot import BotPolicy
from .goals import (
    GoalModel,
    default_model,
    evaluate,
    load_goals,
    parse_goals,
    util_fps,
    util_player_size,
)
from .harness import (
    ReplicateResult,
    Treatment,
    run_experiment,
    run_replicate,
)
from .mape import Knowledge, MetricsSnapshot, mape_tick
from .stats import describe, mann_whitney_u
from .world import GameConfig, Status, World

__version__ = "0.1.0"

__all__ = [
    "BotPolicy",
    "GameConfig",
    "GoalModel",
    "Knowledge",
    "MetricsSnapshot",
    "ReplicateResult",
    "Status",
    "Treatment",
    "World",
    "__version__",
    "default_model",
    "describe",
    "evaluate",
    "load_goals",
    "mann_whitney_u",
    "mape_tick",
    "parse_goals",
    "run_experiment",
    "run_replicate",
    "util_fps",
    "util_player_size",
]
