"""Deterministic path-planning benchmark simulators over categorical inputs.

Three problems share the "one factor = one timestep decision" layout:

* maze: 5 actions on a grid; cost is the shortest-path distance from the
  final cell to the goal.
* snake: 5 actions on a grid; reward per step with early-prize discounting,
  consecutive-prize bonus, idle penalty and out-of-bounds penalty.
* rover: 9 actions (speed x heading, or stay) tracing a piecewise-linear
  trajectory; cost integrates an obstacle-occupancy field along the path
  plus a terminal distance penalty.

Grid coordinates are 1-indexed (x right, y up). Every simulator records a
per-step trace from which its scalar value is exactly recomputable.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .encoding import Point

# action codes for maze/snake: up, down, left, right, stay
MOVES5 = {1: (0, 1), 2: (0, -1), 3: (-1, 0), 4: (1, 0), 5: (0, 0)}

ROVER_ANGLES = (0.0, np.pi / 6, np.pi / 3, np.pi / 2)


@dataclass(frozen=True)
class SimResult:
    value: float
    trace: tuple[dict, ...]


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    start: tuple[int, int]
    goal: tuple[int, int] | None = None
    obstacles: frozenset = frozenset()
    prizes: frozenset = frozenset()
    # conventions that the reward definition leaves open, kept in config
    # so alternatives stay testable
    start_is_prize: bool = False
    oob_rule: str = "clamp"  # out-of-bounds step: score, keep last position

    def __post_init__(self):
        if not self.in_bounds(self.start):
            raise ValueError("start outside grid")
        if self.start in self.obstacles:
            raise ValueError("start sits on an obstacle")
        if self.goal is not None and not self.in_bounds(self.goal):
            raise ValueError("goal outside grid")

    def in_bounds(self, cell) -> bool:
        x, y = cell
        return 1 <= x <= self.width and 1 <= y <= self.height


def distance_field(world: GridWorld) -> dict[tuple[int, int], int]:
    """BFS distances to the goal over non-obstacle cells, 4-neighbor moves."""
    if world.goal is None:
        raise ValueError("world has no goal")
    dist = {world.goal: 0}
    queue = deque([world.goal])
    while queue:
        cx, cy = queue.popleft()
        for dx, dy in ((0, 1), (0, -1), (-1, 0), (1, 0)):
            nxt = (cx + dx, cy + dy)
            if (
                world.in_bounds(nxt)
                and nxt not in world.obstacles
                and nxt not in dist
            ):
                dist[nxt] = dist[(cx, cy)] + 1
                queue.append(nxt)
    return dist


def walk(world: GridWorld, path: Point) -> list[tuple[int, int]]:
    """Positions after each step under the bounce-stay rule: a move into an
    obstacle or off the grid leaves the position unchanged."""
    if path.M != 5:
        raise ValueError("maze/snake paths use M=5 actions")
    pos = world.start
    out = []
    for a in path.levels:
        dx, dy = MOVES5[a]
        cand = (pos[0] + dx, pos[1] + dy)
        if world.in_bounds(cand) and cand not in world.obstacles:
            pos = cand
        out.append(pos)
    return out


def maze_cost(world: GridWorld, path: Point) -> SimResult:
    """Cost of a path: BFS distance from its final cell to the goal."""
    dist = distance_field(world)
    unreachable = world.width * world.height  # larger than any true distance
    pos = world.start
    trace = []
    for j, a in enumerate(path.levels, start=1):
        dx, dy = MOVES5[a]
        cand = (pos[0] + dx, pos[1] + dy)
        blocked = not world.in_bounds(cand) or cand in world.obstacles
        if not blocked:
            pos = cand
        trace.append(
            {"step": j, "action": a, "position": pos, "blocked": blocked,
             "step_value": 0.0}
        )
    cost = float(dist.get(pos, unreachable))
    trace[-1]["step_value"] = cost
    return SimResult(cost, tuple(trace))


def snake_reward(world: GridWorld, path: Point) -> SimResult:
    """Cumulative reward of a path on the prize grid.

    Step j landing on a prize square scores 5*(d-j+1), doubled when the
    previous square was also a prize; a non-prize in-bounds square scores
    -2*(j-1); stepping out of bounds scores -10 and keeps the previous
    position. The starting square counts as non-prize for the first step
    unless the config says otherwise.
    """
    d = path.d
    pos = world.start
    prev_on_prize = world.start_is_prize and pos in world.prizes
    total = 0.0
    trace = []
    for j, a in enumerate(path.levels, start=1):
        dx, dy = MOVES5[a]
        cand = (pos[0] + dx, pos[1] + dy)
        if not world.in_bounds(cand):
            r = -10.0
            # oob_rule "clamp": score the penalty, stay on the last square
            on_prize = pos in world.prizes
        else:
            pos = cand
            on_prize = pos in world.prizes
            if on_prize:
                r = (10.0 if prev_on_prize else 5.0) * (d - j + 1)
            else:
                r = -2.0 * (j - 1)
        total += r
        trace.append(
            {"step": j, "action": a, "position": pos, "prize": on_prize,
             "step_value": r}
        )
        prev_on_prize = on_prize
    return SimResult(total, tuple(trace))


@dataclass(frozen=True)
class ObstacleCourse:
    start: tuple[float, float] = (0.05, 0.05)
    target: tuple[float, float] = (0.75, 0.75)
    speed_low: float = 0.05
    speed_high: float = 0.125
    boxes: tuple = field(default=())  # axis-aligned (x0, y0, x1, y1)
    substeps: int = 20


def _occupancy(course: ObstacleCourse, p: np.ndarray) -> float:
    for x0, y0, x1, y1 in course.boxes:
        if x0 <= p[0] <= x1 and y0 <= p[1] <= y1:
            return 30.0
    return 0.0


def rover_decision(code: int, course: ObstacleCourse) -> tuple[float, float]:
    """Map an action code 1..9 to a per-timestep displacement vector."""
    if not 1 <= code <= 9:
        raise ValueError(f"rover action {code} outside 1..9")
    if code == 9:
        return (0.0, 0.0)
    speed = course.speed_low if code <= 4 else course.speed_high
    angle = ROVER_ANGLES[(code - 1) % 4]
    return (speed * float(np.cos(angle)), speed * float(np.sin(angle)))


def rover_cost(
    course: ObstacleCourse, path: Point, substeps: int | None = None
) -> SimResult:
    """Trajectory cost: trapezoidal integral of (obstacle occupancy + 0.05)
    along the path at sub-step resolution, plus 50 * distance from the
    final position to the target, minus a constant 5."""
    if path.M != 9:
        raise ValueError("rover paths use M=9 actions")
    S = substeps if substeps is not None else course.substeps
    pos = np.asarray(course.start, dtype=float)
    trace = []
    running = 0.0
    for j, a in enumerate(path.levels, start=1):
        delta = np.asarray(rover_decision(a, course))
        nxt = pos + delta
        seg = 0.0
        step_len = float(np.linalg.norm(delta)) / S
        if step_len > 0:
            samples = [pos + delta * (t / S) for t in range(S + 1)]
            costs = [_occupancy(course, p) + 0.05 for p in samples]
            for t in range(S):
                seg += 0.5 * (costs[t] + costs[t + 1]) * step_len
        running += seg
        trace.append(
            {"step": j, "action": a, "position": (float(nxt[0]), float(nxt[1])),
             "step_value": seg}
        )
        pos = nxt
    terminal = 50.0 * float(np.linalg.norm(pos - np.asarray(course.target))) - 5.0
    trace.append({"step": path.d + 1, "action": None,
                  "position": (float(pos[0]), float(pos[1])),
                  "step_value": terminal})
    return SimResult(running + terminal, tuple(trace))


# -- configuration files ------------------------------------------------


def gridworld_from_dict(obj: dict) -> GridWorld:
    return GridWorld(
        width=int(obj["width"]),
        height=int(obj["height"]),
        start=tuple(obj["start"]),
        goal=tuple(obj["goal"]) if obj.get("goal") else None,
        obstacles=frozenset(tuple(c) for c in obj.get("obstacles", [])),
        prizes=frozenset(tuple(c) for c in obj.get("prizes", [])),
        start_is_prize=bool(obj.get("start_is_prize", False)),
        oob_rule=obj.get("oob_rule", "clamp"),
    )


def course_from_dict(obj: dict) -> ObstacleCourse:
    return ObstacleCourse(
        start=tuple(obj.get("start", (0.05, 0.05))),
        target=tuple(obj.get("target", (0.75, 0.75))),
        speed_low=float(obj.get("speeds", {}).get("low", 0.05)),
        speed_high=float(obj.get("speeds", {}).get("high", 0.125)),
        boxes=tuple(tuple(b) for b in obj.get("boxes", [])),
        substeps=int(obj.get("substeps", 20)),
    )


def _load_data(name: str) -> dict:
    with resources.files("quip.data").joinpath(name).open() as fh:
        return json.load(fh)


def default_maze() -> GridWorld:
    return gridworld_from_dict(_load_data("maze6.json"))


def default_snake() -> GridWorld:
    return gridworld_from_dict(_load_data("snake8.json"))


def default_rover() -> ObstacleCourse:
    return course_from_dict(_load_data("rover.json"))


def load_world(path) -> GridWorld:
    with open(path) as fh:
        return gridworld_from_dict(json.load(fh))


def load_course(path) -> ObstacleCourse:
    with open(path) as fh:
        return course_from_dict(json.load(fh))
