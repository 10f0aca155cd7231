"""Discrete-time trial loop.

Each tick is two-phase: every robot senses and decides against a frozen
snapshot, then all motions are integrated, collisions resolved and target
catches committed at once. A trial is a pure function of its ``SimConfig``.

Event logs are JSON lines ``{"t", "robot", "event", "x", "y"}``. Event
names are ``spawn``, ``turn``, ``walk``, ``avoid``, ``pf_enter``,
``pf_exit``, ``catch`` and, when ``trajectory_stride`` is set, ``pos``
samples every that many ticks (the plotting trajectory dump).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .agent import Phase, RobotState, StrategyConfig, fsm_step, integrate_pose
from .errors import SetupError
from .stochastic import RngStream, derive_trial_seed
from .world import (
    Scenario,
    WorldState,
    deposit_pheromone,
    generate_scenario,
    resolve_collisions,
    sample_free_point,
    sample_targets,
    sense_all,
)

EventSink = Callable[[dict], None]


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines one trial.

    With ``scenario`` unset a layout of ``n_obstacles`` obstacles and
    ``n_targets`` targets is drawn from the trial seed. A scenario without
    targets gets ``n_targets`` sampled targets. ``spawn_positions`` pins
    robot start points instead of sampling them.
    """

    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    n_robots: int = 10
    n_targets: int = 8
    master_seed: int = 0
    trial_index: int = 0
    dt: float = 0.05
    t_max: float = 20_000.0
    scenario: Optional[Scenario] = None
    width: float = 20.0
    height: float = 20.0
    n_obstacles: int = 6
    r_v: float = 1.0
    spawn_positions: Optional[tuple] = None
    reverse_order: bool = False
    trajectory_stride: int = 0

    def __post_init__(self):
        if not self.dt > 0 or not self.t_max > 0:
            raise SetupError("dt and t_max must be positive")
        if self.n_robots < 1:
            raise SetupError("n_robots must be at least 1")
        if self.n_targets < 0:
            raise SetupError("n_targets must be non-negative")

    @property
    def trial_seed(self) -> int:
        return derive_trial_seed(self.master_seed, self.trial_index)


@dataclass
class TrialResult:
    completed: bool
    completion_time: float
    per_target_times: list
    total_distance: list
    event_counts: dict
    mean_nn_distance: Optional[float]
    ticks: int
    seed: int
    scenario_hash: str

    @property
    def distance_sum(self) -> float:
        return math.fsum(self.total_distance)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        """Canonical serialisation; equal results give equal bytes."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TrialResult":
        return cls(**d)


def build_world(config: SimConfig) -> WorldState:
    """Scenario, robots and per-robot streams for the configured trial."""
    root = RngStream(config.trial_seed)
    scenario = config.scenario
    if scenario is None:
        scenario = generate_scenario(
            root.child("scenario"), width=config.width, height=config.height,
            n_obstacles=config.n_obstacles, n_targets=config.n_targets, r_v=config.r_v,
        )
    elif not scenario.targets and config.n_targets:
        targets = sample_targets(root.child("targets"), scenario.arena, config.n_targets,
                                 2.0 * scenario.r_v)
        scenario = replace(scenario, targets=targets)

    if config.spawn_positions is not None:
        if len(config.spawn_positions) != config.n_robots:
            raise SetupError("spawn_positions must list one point per robot")
        spawns = [tuple(map(float, p)) for p in config.spawn_positions]
        for x, y in spawns:
            if not scenario.arena.is_free(x, y):
                raise SetupError(f"spawn point ({x}, {y}) is not in free space")
    else:
        spawn_rng = root.child("spawn")
        spawns = [sample_free_point(spawn_rng, scenario.arena) for _ in range(config.n_robots)]

    robots = []
    for i, (x, y) in enumerate(spawns):
        rng = root.child("robot", i)
        theta = -math.pi + 2.0 * math.pi * rng.uniform()
        robots.append(RobotState(i, x, y, theta, rng))
    return WorldState(scenario, robots)


def layout_hash(world: WorldState) -> str:
    """Digest of the layout plus spawn points, for environment pairing checks."""
    spawn = json.dumps([[r.x, r.y] for r in world.robots])
    return hashlib.sha256((world.scenario.digest() + spawn).encode()).hexdigest()[:16]


def tick(world: WorldState, config: SimConfig, strategy: StrategyConfig,
         sink: Optional[EventSink] = None) -> np.ndarray:
    """Advance ``world`` by one ``dt`` in place.

    Returns the robot distance matrix of the snapshot the decisions were
    made against.
    """
    dt = config.dt
    robots = world.robots
    t_next = world.time + dt
    snapshot = world.positions()
    dist = world.robot_distances(snapshot)
    percepts = sense_all(world, snapshot, dist)

    order = range(len(robots) - 1, -1, -1) if config.reverse_order else range(len(robots))
    commands = [None] * len(robots)
    for idx in order:
        _, commands[idx] = fsm_step(robots[idx], percepts[idx], strategy, dt,
                                    world.avoid_distance)

    proposed = np.empty_like(snapshot)
    for idx, robot in enumerate(robots):
        cmd = commands[idx]
        x, y, theta = integrate_pose(robot.x, robot.y, robot.theta, cmd.L, cmd.speed,
                                     cmd.omega, dt)
        proposed[idx] = (x, y)
        robot.theta = theta
    committed = resolve_collisions(world, proposed, snapshot)

    catches: dict[int, list[int]] = {}
    for idx, robot in enumerate(robots):
        nx, ny = float(committed[idx, 0]), float(committed[idx, 1])
        robot.distance += math.hypot(nx - robot.x, ny - robot.y)
        robot.x, robot.y = nx, ny
        if robot.phase is Phase.CATCH_TARGET and robot.catch_target is not None:
            catches.setdefault(robot.catch_target, []).append(robot.id)
        if sink is not None:
            for ev in commands[idx].events:
                if ev != "catch_request":
                    sink({"t": t_next, "robot": robot.id, "event": ev, "x": nx, "y": ny})

    by_id = {r.id: r for r in robots}
    for target_id in sorted(catches):
        winner = by_id[min(catches[target_id])]
        if not world.targets[target_id].found:
            deposit_pheromone(world, target_id, t_next)
            winner.catches += 1
            if sink is not None:
                sink({"t": t_next, "robot": winner.id, "event": "catch", "x": winner.x,
                      "y": winner.y, "target": target_id})
    world.time = t_next
    return dist


def run_trial(config: SimConfig, sink: Optional[EventSink] = None) -> TrialResult:
    """Run one trial until every target is marked or ``t_max`` is reached."""
    world = build_world(config)
    strategy = config.strategy.resolved(config.dt, world.arena.diagonal)
    scen_hash = layout_hash(world)
    if sink is not None:
        for r in world.robots:
            sink({"t": 0.0, "robot": r.id, "event": "spawn", "x": r.x, "y": r.y})

    n = len(world.robots)
    nn_sum = 0.0
    ticks = 0
    max_ticks = int(math.ceil(config.t_max / config.dt - 1e-9))
    stride = config.trajectory_stride
    while not world.all_found and ticks < max_ticks:
        dist = tick(world, config, strategy, sink)
        ticks += 1
        world.time = ticks * config.dt
        if n > 1:
            nn_sum += float(dist.min(axis=1).mean())
        if sink is not None and stride and ticks % stride == 0:
            for r in world.robots:
                sink({"t": world.time, "robot": r.id, "event": "pos", "x": r.x, "y": r.y})

    found_times = sorted(t.found_time for t in world.targets if t.found)
    completed = world.all_found
    completion = (max(found_times) if found_times else 0.0) if completed else config.t_max
    return TrialResult(
        completed=completed,
        completion_time=completion,
        per_target_times=found_times,
        total_distance=[r.distance for r in world.robots],
        event_counts={
            "turns": [r.turns for r in world.robots],
            "avoidances": [r.avoidances for r in world.robots],
            "pf_activations": [r.pf_activations for r in world.robots],
            "catches": [r.catches for r in world.robots],
        },
        mean_nn_distance=(nn_sum / ticks) if (n > 1 and ticks) else None,
        ticks=ticks,
        seed=config.trial_seed,
        scenario_hash=scen_hash,
    )
