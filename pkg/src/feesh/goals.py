"""Goal model: an acyclic AND/OR refinement graph with per-goal utility functions.

Leaf goals bind to one of the built-in utilities below; refined goals aggregate
their children (AND -> min, OR -> max). Every utility is normalized to [0.0, 1.0],
where 0.0 is a violation, 1.0 is satisfaction, and anything in between is the
degree of satisficement. Each goal carries a satisfaction threshold; values below
it mark the goal as needing attention.

Models are typically loaded from a ``.goals`` file (one goal per line, see
``parse_goals``). The default model shipped with the package is ``feesh.goals``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Protocol, Sequence


class GoalKind(Enum):
    MAINTAIN = "Maintain"
    ACHIEVE = "Achieve"


class Refinement(Enum):
    AND = "AND"
    OR = "OR"
    LEAF = "Leaf"


class GoalStatus(Enum):
    SATISFIED = "satisfied"
    SATISFICED = "satisficed"
    VIOLATED = "violated"


class ModelNotValidatedError(RuntimeError):
    """Raised when a model is evaluated before a successful validate()."""


# ---------------------------------------------------------------------------
# Utility functions
# ---------------------------------------------------------------------------

def util_fps(fps: float, lower: float = 30.0, upper: float = 40.0) -> float:
    """Frame-rate utility: 1.0 at or above `upper`, 0.0 below `lower`.

    Between the two thresholds the value ramps linearly, so the function is
    continuous at both boundaries.
    """
    if fps < 0:
        raise ValueError(f"fps must be non-negative, got {fps}")
    if fps >= upper:
        return 1.0
    if fps < lower:
        return 0.0
    return (fps - lower) / (upper - lower)


def util_player_size(ps: float, w: float) -> float:
    """Playability utility of the player diameter `ps` on a canvas of width `w`.

    1.0 while the player fits in half the canvas, 0.0 once it spans the whole
    width, and a linear falloff in between::

        1.0                         if ps <= w/2
        0.0                         if ps >= w
        1.0 - |ps - w/2| / (w/2)    otherwise
    """
    if w <= 0:
        raise ValueError(f"canvas width must be positive, got {w}")
    if ps < 0:
        raise ValueError(f"player size must be non-negative, got {ps}")
    if ps <= w / 2:
        return 1.0
    if ps >= w:
        return 0.0
    return 1.0 - abs(ps - w / 2) / (w / 2)


def util_const_one() -> float:
    """Trivially-true utility for goals with no measurable counterpart."""
    return 1.0


def util_score(scores: Sequence[float]) -> float:
    """1.0 while the score is non-decreasing over the window, else 0.0.

    The engine never decreases the score, so a single-sample window always
    yields 1.0; the windowed form exists for externally supplied histories.
    """
    if len(scores) == 0:
        raise ValueError("score window must be non-empty")
    return 1.0 if all(b >= a for a, b in zip(scores, scores[1:])) else 0.0


def util_enemy_count(count: int, target: int) -> float:
    """Enemy-pressure utility: fraction of the target population alive, capped at 1."""
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    return min(1.0, count / target)


class SnapshotLike(Protocol):
    """The monitored fields a utility binding may read."""

    fps: float
    player_size: float
    canvas_width: float
    score: int
    enemy_count: int


# Binding name -> (evaluator, required params, optional params).
_BINDINGS = {
    "util_fps": (
        lambda s, p: util_fps(s.fps, **p),
        frozenset(),
        frozenset({"lower", "upper"}),
    ),
    "util_player_size": (
        lambda s, p: util_player_size(s.player_size, s.canvas_width),
        frozenset(),
        frozenset(),
    ),
    "util_const_one": (
        lambda s, p: util_const_one(),
        frozenset(),
        frozenset(),
    ),
    "util_score": (
        lambda s, p: util_score((s.score,)),
        frozenset(),
        frozenset(),
    ),
    "util_enemy_count": (
        lambda s, p: util_enemy_count(s.enemy_count, **p),
        frozenset({"target"}),
        frozenset(),
    ),
}

BUILTIN_UTILITIES = frozenset(_BINDINGS)


# ---------------------------------------------------------------------------
# Model types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UtilityBinding:
    """Reference to a built-in utility plus its fixed parameters."""

    fn: str
    params: tuple[tuple[str, float], ...] = ()

    def evaluate(self, snapshot: SnapshotLike) -> float:
        evaluator, _, _ = _BINDINGS[self.fn]
        return evaluator(snapshot, dict(self.params))


@dataclass(frozen=True)
class Goal:
    id: str
    label: str
    kind: GoalKind
    invariant: bool
    refinement: Refinement
    children: tuple[str, ...] = ()
    utility: UtilityBinding | None = None
    threshold: float = 0.5


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple[str, ...] = ()


@dataclass
class GoalModel:
    """Refinement DAG of goals. Immutable by convention once validated."""

    goals: dict[str, Goal]
    root: str
    _order: tuple[str, ...] | None = field(default=None, repr=False, compare=False)

    @property
    def validated(self) -> bool:
        return self._order is not None

    def validate(self) -> ValidationReport:
        return validate(self)


@dataclass(frozen=True)
class GoalEvaluation:
    """Per-goal satisfaction values for one tick's snapshot."""

    tick: int
    values: dict[str, float]
    statuses: dict[str, GoalStatus]
    fatal: bool

    def degree(self, goal_id: str) -> float:
        return self.values[goal_id]

    def below_threshold(self, model: GoalModel) -> list[str]:
        """Ids of goals whose value fell below their satisfaction threshold."""
        return [
            gid for gid, value in self.values.items()
            if value < model.goals[gid].threshold
        ]


# ---------------------------------------------------------------------------
# Validation and evaluation
# ---------------------------------------------------------------------------

def validate(model: GoalModel) -> ValidationReport:
    """Structural check of the refinement graph.

    Reports (rather than raises) every violation found: unresolved children,
    cycles, leaves without a utility, refined goals with one, bad bindings,
    and root problems. On success the model is marked evaluable and a
    child-first evaluation order is cached.
    """
    errors: list[str] = []
    goals = model.goals

    if not goals:
        return ValidationReport(False, ("model has no goals",))

    referenced: set[str] = set()
    for goal in goals.values():
        for child in goal.children:
            referenced.add(child)
            if child not in goals:
                errors.append(f"goal {goal.id} refers to unknown child {child}")
        if goal.refinement is Refinement.LEAF:
            if goal.children:
                errors.append(f"leaf goal {goal.id} must not have children")
            if goal.utility is None:
                errors.append(f"leaf goal {goal.id} has no utility binding")
        else:
            if not goal.children:
                errors.append(f"refined goal {goal.id} has no children")
            if goal.utility is not None:
                errors.append(f"refined goal {goal.id} must not carry a utility binding")
        if goal.utility is not None:
            errors.extend(_check_binding(goal.id, goal.utility))
        if not 0.0 <= goal.threshold <= 1.0:
            errors.append(f"goal {goal.id} threshold {goal.threshold} outside [0, 1]")

    roots = [gid for gid in goals if gid not in referenced]
    if len(roots) != 1:
        errors.append(f"expected exactly one root, found {sorted(roots) or 'none'}")
    elif roots[0] != model.root:
        errors.append(f"declared root {model.root} but {roots[0]} is unreferenced")

    order, cyclic = _topological_order(goals)
    for gid in sorted(cyclic):
        errors.append(f"goal {gid} participates in a refinement cycle")

    if errors:
        model._order = None
        return ValidationReport(False, tuple(errors))
    model._order = order
    return ValidationReport(True)


def _check_binding(goal_id: str, binding: UtilityBinding) -> list[str]:
    if binding.fn not in _BINDINGS:
        return [f"goal {goal_id} binds unknown utility {binding.fn}"]
    _, required, optional = _BINDINGS[binding.fn]
    given = {name for name, _ in binding.params}
    errors = []
    for missing in sorted(required - given):
        errors.append(f"goal {goal_id}: {binding.fn} requires parameter {missing}")
    for extra in sorted(given - required - optional):
        errors.append(f"goal {goal_id}: {binding.fn} got unknown parameter {extra}")
    return errors


def _topological_order(goals: dict[str, Goal]) -> tuple[tuple[str, ...], set[str]]:
    """Child-first order via iterative DFS; returns (order, nodes on cycles)."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {gid: WHITE for gid in goals}
    order: list[str] = []
    cyclic: set[str] = set()

    for start in goals:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            gid, idx = stack[-1]
            children = goals[gid].children
            advanced = False
            while idx < len(children):
                child = children[idx]
                idx += 1
                stack[-1] = (gid, idx)
                if child not in goals:
                    continue
                if color[child] == GRAY:
                    cyclic.add(child)
                    cyclic.add(gid)
                elif color[child] == WHITE:
                    color[child] = GRAY
                    stack.append((child, 0))
                    advanced = True
                    break
            if not advanced and stack and stack[-1][0] == gid and stack[-1][1] >= len(children):
                stack.pop()
                color[gid] = BLACK
                order.append(gid)
    return tuple(order), cyclic


def evaluate(model: GoalModel, snapshot: SnapshotLike) -> GoalEvaluation:
    """Evaluate every goal against one tick's snapshot.

    Leaves apply their utility bindings; AND-refined goals take the minimum of
    their children and OR-refined goals the maximum. Pure: identical inputs
    produce identical outputs.
    """
    if model._order is None:
        raise ModelNotValidatedError("validate() must pass before evaluate()")

    values: dict[str, float] = {}
    statuses: dict[str, GoalStatus] = {}
    fatal = False
    for gid in model._order:
        goal = model.goals[gid]
        if goal.refinement is Refinement.LEAF:
            value = goal.utility.evaluate(snapshot)  # type: ignore[union-attr]
        else:
            child_values = [values[c] for c in goal.children]
            value = min(child_values) if goal.refinement is Refinement.AND else max(child_values)
        values[gid] = value
        if value >= goal.threshold:
            status = GoalStatus.SATISFIED
        elif value <= 0.0:
            status = GoalStatus.VIOLATED
        else:
            status = GoalStatus.SATISFICED
        statuses[gid] = status
        if status is GoalStatus.VIOLATED and goal.invariant:
            fatal = True

    tick = getattr(snapshot, "execution_time", 0)
    return GoalEvaluation(tick=tick, values=values, statuses=statuses, fatal=fatal)


# ---------------------------------------------------------------------------
# The .goals file format
# ---------------------------------------------------------------------------
#
#   id; kind; invariant; refinement; children; utility(params); threshold  # label
#
# One goal per line. `children` is a comma list of ids or `-`; `utility` is a
# built-in name with optional key=value parameters, or `-` for refined goals.
# A trailing `# ...` comment on a goal line doubles as the human-readable label.

class GoalsParseError(ValueError):
    """Raised on a malformed .goals line."""


def parse_goals(text: str) -> GoalModel:
    goals: dict[str, Goal] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        line, label = _split_label(line)
        parts = [p.strip() for p in line.split(";")]
        if len(parts) != 7:
            raise GoalsParseError(f"line {lineno}: expected 7 ';'-separated fields, got {len(parts)}")
        gid, kind_s, inv_s, ref_s, children_s, utility_s, threshold_s = parts
        if not gid:
            raise GoalsParseError(f"line {lineno}: empty goal id")
        if gid in goals:
            raise GoalsParseError(f"line {lineno}: duplicate goal id {gid}")
        try:
            kind = GoalKind(kind_s.capitalize())
        except ValueError:
            raise GoalsParseError(f"line {lineno}: unknown kind {kind_s!r}") from None
        if inv_s.lower() not in ("true", "false"):
            raise GoalsParseError(f"line {lineno}: invariant must be true or false, got {inv_s!r}")
        try:
            refinement = Refinement(ref_s if ref_s == "Leaf" else ref_s.upper())
        except ValueError:
            raise GoalsParseError(f"line {lineno}: unknown refinement {ref_s!r}") from None
        children = () if children_s in ("-", "") else tuple(
            c.strip() for c in children_s.split(",") if c.strip()
        )
        utility = None if utility_s in ("-", "") else _parse_binding(utility_s, lineno)
        try:
            threshold = float(threshold_s)
        except ValueError:
            raise GoalsParseError(f"line {lineno}: bad threshold {threshold_s!r}") from None
        goals[gid] = Goal(
            id=gid,
            label=label or gid,
            kind=kind,
            invariant=inv_s.lower() == "true",
            refinement=refinement,
            children=children,
            utility=utility,
            threshold=threshold,
        )

    if not goals:
        raise GoalsParseError("no goals defined")
    referenced = {c for g in goals.values() for c in g.children}
    roots = [gid for gid in goals if gid not in referenced]
    root = roots[0] if roots else next(iter(goals))
    return GoalModel(goals=goals, root=root)


def _split_label(line: str) -> tuple[str, str]:
    if "#" in line:
        body, comment = line.split("#", 1)
        return body.strip(), comment.strip()
    return line, ""


def _parse_binding(text: str, lineno: int) -> UtilityBinding:
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise GoalsParseError(f"line {lineno}: malformed utility {text!r}")
        name, arg_s = text[:-1].split("(", 1)
        name = name.strip()
        params = []
        for piece in arg_s.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise GoalsParseError(f"line {lineno}: utility parameters must be key=value, got {piece!r}")
            key, value_s = piece.split("=", 1)
            try:
                params.append((key.strip(), float(value_s)))
            except ValueError:
                raise GoalsParseError(f"line {lineno}: bad parameter value {value_s!r}") from None
    else:
        name, params = text, []
    return UtilityBinding(fn=name, params=tuple(params))


def load_goals(path: str) -> GoalModel:
    with open(path, encoding="utf-8") as fh:
        return parse_goals(fh.read())


def default_model() -> GoalModel:
    """The shipped feesh goal model, parsed and validated."""
    text = resources.files(__package__).joinpath("feesh.goals").read_text(encoding="utf-8")
    model = parse_goals(text)
    report = validate(model)
    if not report.ok:  # pragma: no cover - packaged file is kept valid
        raise GoalsParseError(f"packaged model invalid: {report.errors}")
    return model
