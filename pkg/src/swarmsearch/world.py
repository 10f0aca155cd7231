"""Arena geometry, targets, disc sensing, pheromone marks and collision commit.

Scenario files are JSON documents::

    {
      "arena": {"width": 20.0, "height": 20.0},
      "obstacles": [
        {"type": "circle", "center": [x, y], "radius": r},
        {"type": "rect", "min": [x0, y0], "max": [x1, y1]}
      ],
      "targets": [[x, y], ...],
      "defaults": {"r_v": 1.0, "pheromone_radius": 2.0}
    }

All lengths are metres. ``targets`` and ``defaults`` are optional; a
scenario without targets gets them sampled per trial.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple, Sequence, Union

import numpy as np

from .errors import PheromoneError, SetupError
from .stochastic import RngStream

if TYPE_CHECKING:
    from .agent import RobotState

EPS_SEP = 1e-3
DEFAULT_R_V = 1.0
PHEROMONE_FACTOR = 2.0
AVOID_FACTOR = 0.5
# fractions of the avoidance distance probed for obstacles along the heading
_PROBES = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    radius: float

    def contains(self, x: float, y: float) -> bool:
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 < self.radius ** 2

    def bounding_radius(self) -> float:
        return self.radius

    def center(self) -> tuple[float, float]:
        return self.cx, self.cy

    def to_dict(self) -> dict:
        return {"type": "circle", "center": [float(self.cx), float(self.cy)],
                "radius": float(self.radius)}


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float) -> bool:
        return self.xmin < x < self.xmax and self.ymin < y < self.ymax

    def bounding_radius(self) -> float:
        return 0.5 * math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def center(self) -> tuple[float, float]:
        return 0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax)

    def to_dict(self) -> dict:
        return {"type": "rect", "min": [float(self.xmin), float(self.ymin)],
                "max": [float(self.xmax), float(self.ymax)]}


Shape = Union[Circle, Rect]


def shape_from_dict(d: dict) -> Shape:
    kind = d.get("type")
    if kind == "circle":
        cx, cy = d["center"]
        return Circle(float(cx), float(cy), float(d["radius"]))
    if kind == "rect":
        (x0, y0), (x1, y1) = d["min"], d["max"]
        return Rect(float(x0), float(y0), float(x1), float(y1))
    raise SetupError(f"unknown obstacle type {kind!r}")


@dataclass(frozen=True)
class Arena:
    width: float = 20.0
    height: float = 20.0
    obstacles: tuple = ()

    def __post_init__(self):
        if not self.width > 0 or not self.height > 0:
            raise SetupError("arena width and height must be positive")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def in_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def is_free(self, x: float, y: float) -> bool:
        return self.in_bounds(x, y) and not any(o.contains(x, y) for o in self.obstacles)


@dataclass(frozen=True)
class Scenario:
    """Static layout: arena, obstacles, target positions and sensing radii."""

    arena: Arena
    targets: tuple = ()
    r_v: float = DEFAULT_R_V
    pheromone_radius: float = PHEROMONE_FACTOR * DEFAULT_R_V

    def __post_init__(self):
        if not self.r_v > 0:
            raise SetupError("r_v must be positive")
        if not self.pheromone_radius > self.r_v:
            raise SetupError("pheromone_radius must exceed r_v")
        for x, y in self.targets:
            if not self.arena.is_free(x, y):
                raise SetupError(f"target at ({x}, {y}) is outside the arena or inside an obstacle")

    def to_dict(self) -> dict:
        return {
            "arena": {"width": float(self.arena.width), "height": float(self.arena.height)},
            "obstacles": [o.to_dict() for o in self.arena.obstacles],
            "targets": [[float(x), float(y)] for x, y in self.targets],
            "defaults": {"r_v": float(self.r_v), "pheromone_radius": float(self.pheromone_radius)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            arena_d = d.get("arena", {})
            arena = Arena(float(arena_d.get("width", 20.0)), float(arena_d.get("height", 20.0)),
                          tuple(shape_from_dict(o) for o in d.get("obstacles", [])))
            defaults = d.get("defaults", {})
            r_v = float(defaults.get("r_v", DEFAULT_R_V))
            pher = float(defaults.get("pheromone_radius", PHEROMONE_FACTOR * r_v))
            targets = tuple((float(x), float(y)) for x, y in d.get("targets", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise SetupError(f"malformed scenario document: {exc}") from exc
        return cls(arena, targets, r_v, pher)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_scenario(path: Union[str, Path]) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SetupError(f"{path}: invalid JSON ({exc})") from exc
    return Scenario.from_dict(doc)


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")


def _sample_obstacle(rng: RngStream, arena: Arena, margin: float) -> Shape:
    size_lo, size_hi = 0.5, 2.0
    if rng.uniform() < 0.5:
        r = 0.5 * (size_lo + (size_hi - size_lo) * rng.uniform())
        cx = margin + r + (arena.width - 2 * (margin + r)) * rng.uniform()
        cy = margin + r + (arena.height - 2 * (margin + r)) * rng.uniform()
        return Circle(cx, cy, r)
    w = size_lo + (size_hi - size_lo) * rng.uniform()
    h = size_lo + (size_hi - size_lo) * rng.uniform()
    x0 = margin + (arena.width - 2 * margin - w) * rng.uniform()
    y0 = margin + (arena.height - 2 * margin - h) * rng.uniform()
    return Rect(x0, y0, x0 + w, y0 + h)


def sample_free_point(rng: RngStream, arena: Arena, max_tries: int = 10_000) -> tuple[float, float]:
    for _ in range(max_tries):
        x = arena.width * rng.uniform()
        y = arena.height * rng.uniform()
        if arena.is_free(x, y):
            return x, y
    raise SetupError("no free space found for placement")


def sample_targets(rng: RngStream, arena: Arena, n_targets: int, min_spacing: float,
                   max_tries: int = 100_000) -> tuple:
    targets: list[tuple[float, float]] = []
    tries = 0
    while len(targets) < n_targets:
        tries += 1
        if tries > max_tries:
            raise SetupError(f"could not place {n_targets} targets {min_spacing} m apart")
        x, y = sample_free_point(rng, arena)
        if all(math.hypot(x - tx, y - ty) >= min_spacing for tx, ty in targets):
            targets.append((x, y))
    return tuple(targets)


def generate_scenario(rng: RngStream, *, width: float = 20.0, height: float = 20.0,
                      n_obstacles: int = 6, n_targets: int = 8, r_v: float = DEFAULT_R_V,
                      pheromone_radius: float | None = None, clearance: float = 1.0,
                      max_tries: int = 10_000) -> Scenario:
    """Random layout by rejection sampling.

    Obstacles are circles or rectangles of size 0.5 to 2 m, kept at least
    ``clearance`` apart from each other and from the walls so no pocket of
    free space is sealed off. Targets are uniform in free space and at
    least ``2 * r_v`` apart.
    """
    arena = Arena(width, height)
    obstacles: list[Shape] = []
    tries = 0
    while len(obstacles) < n_obstacles:
        tries += 1
        if tries > max_tries:
            raise SetupError(f"could not place {n_obstacles} non-overlapping obstacles")
        cand = _sample_obstacle(rng, arena, clearance)
        cx, cy = cand.center()
        ok = all(
            math.hypot(cx - o.center()[0], cy - o.center()[1])
            >= cand.bounding_radius() + o.bounding_radius() + clearance
            for o in obstacles
        )
        if ok:
            obstacles.append(cand)
    arena = Arena(width, height, tuple(obstacles))
    targets = sample_targets(rng, arena, n_targets, 2.0 * r_v)
    pher = PHEROMONE_FACTOR * r_v if pheromone_radius is None else pheromone_radius
    return Scenario(arena, targets, r_v, pher)


@dataclass
class Target:
    position: tuple
    detect_radius: float
    pheromone_radius: float
    found: bool = False
    found_time: float | None = None


class Neighbor(NamedTuple):
    id: int
    dx: float
    dy: float
    distance: float


class PheromoneZone(NamedTuple):
    cx: float
    cy: float
    radius: float


@dataclass
class Percepts:
    """What one robot senses this tick.

    ``targets_in_range`` lists only unmarked targets; marked ones show up
    as ``pheromone_zones`` when the robot or its look-ahead point is inside
    the zone.
    """

    neighbors: list = field(default_factory=list)
    targets_in_range: list = field(default_factory=list)
    pheromone_zones: list = field(default_factory=list)
    obstacle_ahead: bool = False
    wall_ahead: bool = False


class _ObstacleArrays:
    def __init__(self, obstacles: Sequence[Shape]):
        circles = [o for o in obstacles if isinstance(o, Circle)]
        rects = [o for o in obstacles if isinstance(o, Rect)]
        self.circles = np.array([[c.cx, c.cy, c.radius] for c in circles]).reshape(-1, 3)
        self.rects = np.array([[r.xmin, r.ymin, r.xmax, r.ymax] for r in rects]).reshape(-1, 4)

    def inside(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        hit = np.zeros(x.shape, dtype=bool)
        if len(self.circles):
            c = self.circles
            d2 = (x[..., None] - c[:, 0]) ** 2 + (y[..., None] - c[:, 1]) ** 2
            hit |= (d2 < c[:, 2] ** 2).any(axis=-1)
        if len(self.rects):
            r = self.rects
            xi = x[..., None]
            yi = y[..., None]
            hit |= ((r[:, 0] < xi) & (xi < r[:, 2]) & (r[:, 1] < yi) & (yi < r[:, 3])).any(axis=-1)
        return hit


class WorldState:
    """Mutable world: layout, target marks, robots and the clock."""

    def __init__(self, scenario: Scenario, robots: list["RobotState"], time: float = 0.0):
        self.scenario = scenario
        self.arena = scenario.arena
        self.r_v = scenario.r_v
        self.pheromone_radius = scenario.pheromone_radius
        self.avoid_distance = AVOID_FACTOR * scenario.r_v
        self.targets = [Target(tuple(p), scenario.r_v, scenario.pheromone_radius)
                        for p in scenario.targets]
        self.robots = robots
        self.time = time
        self._obstacles = _ObstacleArrays(self.arena.obstacles)
        self._target_xy = np.array([t.position for t in self.targets], dtype=float).reshape(-1, 2)

    @property
    def all_found(self) -> bool:
        return all(t.found for t in self.targets)

    def positions(self) -> np.ndarray:
        return np.array([(r.x, r.y) for r in self.robots], dtype=float).reshape(-1, 2)

    def blocked(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """True where a point is outside the arena or inside an obstacle."""
        out = (x < 0.0) | (x > self.arena.width) | (y < 0.0) | (y > self.arena.height)
        return out | self._obstacles.inside(x, y)

    def robot_distances(self, pos: np.ndarray | None = None) -> np.ndarray:
        pos = self.positions() if pos is None else pos
        diff = pos[:, None, :] - pos[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, np.inf)
        return d


def sense_all(world: WorldState, pos: np.ndarray | None = None,
              dist: np.ndarray | None = None) -> list[Percepts]:
    """Percepts for every robot from the current (frozen) snapshot.

    ``pos`` and ``dist`` may be passed when the caller already holds the
    snapshot positions and their distance matrix.
    """
    n = len(world.robots)
    if n == 0:
        return []
    pos = world.positions() if pos is None else pos
    theta = np.array([r.theta for r in world.robots])
    hx, hy = np.cos(theta), np.sin(theta)
    r_v = world.r_v
    dist = world.robot_distances(pos) if dist is None else dist

    a = world.avoid_distance
    ax = pos[:, 0] + a * hx
    ay = pos[:, 1] + a * hy
    w, h = world.arena.width, world.arena.height
    wall = (ax < 0.0) | (ax > w) | (ay < 0.0) | (ay > h)
    fr = np.array(_PROBES)
    px = pos[:, 0:1] + a * fr * hx[:, None]
    py = pos[:, 1:2] + a * fr * hy[:, None]
    obstacle = world._obstacles.inside(px, py).any(axis=1)

    percepts = [Percepts(obstacle_ahead=bool(obstacle[i]), wall_ahead=bool(wall[i])) for i in range(n)]

    close_i, close_j = np.nonzero(dist < r_v)
    for i, j in zip(close_i.tolist(), close_j.tolist()):
        percepts[i].neighbors.append(Neighbor(world.robots[j].id, pos[j, 0] - pos[i, 0],
                                              pos[j, 1] - pos[i, 1], float(dist[i, j])))

    if world.targets:
        txy = world._target_xy
        found = np.array([t.found for t in world.targets])
        dt_ = np.hypot(pos[:, 0:1] - txy[:, 0], pos[:, 1:2] - txy[:, 1])
        hit_i, hit_t = np.nonzero((dt_ < r_v) & ~found)
        for i, t in zip(hit_i.tolist(), hit_t.tolist()):
            percepts[i].targets_in_range.append(t)
        if found.any():
            da = np.hypot(ax[:, None] - txy[:, 0], ay[:, None] - txy[:, 1])
            R = world.pheromone_radius
            zi, zt = np.nonzero(((dt_ < R) | (da < R)) & found)
            for i, t in zip(zi.tolist(), zt.tolist()):
                tx, ty = world.targets[t].position
                percepts[i].pheromone_zones.append(PheromoneZone(tx, ty, R))
    return percepts


def sense(world: WorldState, robot_id: int) -> Percepts:
    """Percepts of a single robot, identical to its entry in ``sense_all``."""
    for idx, robot in enumerate(world.robots):
        if robot.id == robot_id:
            return sense_all(world)[idx]
    raise LookupError(f"unknown robot id {robot_id}")


def deposit_pheromone(world: WorldState, target_id: int, time: float) -> WorldState:
    """Mark a target as found and switch on its repelling zone for good."""
    target = world.targets[target_id]
    if target.found:
        raise PheromoneError(f"target {target_id} is already marked")
    target.found = True
    target.found_time = time
    return world


def resolve_collisions(world: WorldState, proposed: np.ndarray,
                       prior: np.ndarray | None = None) -> np.ndarray:
    """Commit proposed positions (index-aligned with ``world.robots``).

    Robots whose proposal leaves the arena or enters an obstacle keep their
    previous position. Pairs closer than ``EPS_SEP`` are pushed apart
    symmetrically along their axis to exactly ``EPS_SEP``; coincident
    robots split along x with the lower id on the +x side.
    """
    prior = world.positions() if prior is None else prior
    out = np.array(proposed, dtype=float).reshape(-1, 2)
    bad = world.blocked(out[:, 0], out[:, 1])
    out[bad] = prior[bad]
    if len(out) < 2:
        return out
    d = world.robot_distances(out)
    pairs_i, pairs_j = np.nonzero(d < EPS_SEP)
    ids = [r.id for r in world.robots]
    for i, j in zip(pairs_i.tolist(), pairs_j.tolist()):
        if i > j:
            continue
        lo, hi = (i, j) if ids[i] < ids[j] else (j, i)
        dx, dy = out[lo] - out[hi]
        rho = math.hypot(dx, dy)
        if rho == 0.0:
            ux, uy = 1.0, 0.0
        else:
            ux, uy = dx / rho, dy / rho
        mx, my = 0.5 * (out[lo] + out[hi])
        half = 0.5 * EPS_SEP
        out[lo] = (mx + half * ux, my + half * uy)
        out[hi] = (mx - half * ux, my - half * uy)
    if len(pairs_i):
        bad = world.blocked(out[:, 0], out[:, 1])
        out[bad] = prior[bad]
    return out
