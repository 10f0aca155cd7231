"""Robot kinematics, the square-wave walk oscillator and the controller FSM.

A robot alternates between translating at constant speed (oscillator
level 1) and turning in place at a random angular rate (level 0). How long
each walk lasts is the only difference between the Levy and fixed-length
strategies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

from .errors import ParameterDomainError
from .potential_field import PotentialParams, net_repulsion
from .stochastic import LevyParams, RngStream, sample_gaussian, sample_levy
from .world import EPS_SEP, Percepts

_TWO_PI = 2.0 * math.pi
# timers below this are treated as expired (absorbs dt round-off)
TIMER_EPS = 1e-9


class Phase(enum.Enum):
    INIT = "init"
    WALK = "walk"
    TURN = "turn"
    POTENTIAL_FIELD = "potential_field"
    CATCH_TARGET = "catch_target"


def wrap_angle(theta: float) -> float:
    """Map an angle onto [-pi, pi)."""
    return (theta + math.pi) % _TWO_PI - math.pi


@dataclass
class WalkOscillator:
    """Square wave L(t): ``level`` 1 while walking, 0 while turning."""

    level: int = 0
    remaining: float = 0.0

    def edge(self, level: int, duration: float) -> None:
        self.level = level
        self.remaining = duration

    def advance(self, dt: float) -> None:
        self.remaining = max(self.remaining - dt, 0.0)

    @property
    def expired(self) -> bool:
        return self.remaining <= TIMER_EPS


@dataclass(frozen=True)
class LevyWalk:
    params: LevyParams = field(default_factory=LevyParams)


@dataclass(frozen=True)
class FixedWalk:
    duration: float = 1.5

    def __post_init__(self):
        if not self.duration > 0:
            raise ParameterDomainError("fixed walk duration must be positive")


WalkPolicy = Union[LevyWalk, FixedWalk]

STRATEGY_ALIASES = {
    "fl": "FL", "fixed": "FL",
    "l": "L", "levy": "L",
    "l+p": "L+P", "levy+pf": "L+P", "lp": "L+P",
}


def canonical_strategy(name: str) -> str:
    try:
        return STRATEGY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ParameterDomainError(f"unknown strategy {name!r}; use FL, L or L+P") from None


@dataclass(frozen=True)
class StrategyConfig:
    """Walk-length policy, optional repulsion and motion constants.

    ``d_min``/``d_max`` bound Levy walk durations; left as ``None`` they
    are filled in by the engine (one tick, and one arena diagonal at speed
    ``k``). ``v_max`` defaults to ``2 k``.
    """

    walk_policy: WalkPolicy = field(default_factory=LevyWalk)
    potential_field: Optional[PotentialParams] = None
    k: float = 0.6
    sigma_omega: float = math.pi
    turn_duration: float = 1.0
    d_min: Optional[float] = None
    d_max: Optional[float] = None
    c_f: float = 0.5
    v_max: Optional[float] = None

    def __post_init__(self):
        if not self.k > 0:
            raise ParameterDomainError("k must be positive")
        if not self.sigma_omega > 0:
            raise ParameterDomainError("sigma_omega must be positive")
        if not self.turn_duration > 0:
            raise ParameterDomainError("turn_duration must be positive")
        if self.d_min is not None and self.d_max is not None:
            if not 0 < self.d_min <= self.d_max:
                raise ParameterDomainError("need 0 < d_min <= d_max")

    @property
    def name(self) -> str:
        if isinstance(self.walk_policy, FixedWalk):
            return "FL+P" if self.potential_field else "FL"
        return "L+P" if self.potential_field else "L"

    @property
    def speed_cap(self) -> float:
        return 2.0 * self.k if self.v_max is None else self.v_max

    def resolved(self, dt: float, diagonal: float) -> "StrategyConfig":
        return replace(
            self,
            d_min=dt if self.d_min is None else self.d_min,
            d_max=diagonal / self.k if self.d_max is None else self.d_max,
        )


def make_strategy(name: str, *, levy: LevyParams | None = None, fixed_duration: float = 1.5,
                  potential: PotentialParams | None = None, **kwargs) -> StrategyConfig:
    """Build one of the named strategies FL, L or L+P."""
    canon = canonical_strategy(name)
    if canon == "FL":
        return StrategyConfig(FixedWalk(fixed_duration), None, **kwargs)
    policy = LevyWalk(levy or LevyParams())
    pf = (potential or PotentialParams()) if canon == "L+P" else None
    return StrategyConfig(policy, pf, **kwargs)


@dataclass
class RobotState:
    id: int
    x: float
    y: float
    theta: float
    rng: RngStream
    phase: Phase = Phase.INIT
    oscillator: WalkOscillator = field(default_factory=WalkOscillator)
    omega: float = 0.0
    catch_target: Optional[int] = None
    turns: int = 0
    avoidances: int = 0
    pf_activations: int = 0
    catches: int = 0
    distance: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return self.x, self.y

    @property
    def phase_timer(self) -> float:
        return self.oscillator.remaining


class MotionCommand(NamedTuple):
    L: int
    speed: float
    omega: float
    events: tuple = ()


def integrate_pose(x: float, y: float, theta: float, L: int, speed: float, omega: float,
                   dt: float) -> tuple[float, float, float]:
    if L:
        return x + speed * math.cos(theta) * dt, y + speed * math.sin(theta) * dt, theta
    return x, y, wrap_angle(theta + omega * dt)


def step_kinematics(state: RobotState, L: int, k: float, dt: float) -> RobotState:
    """Explicit Euler step; returns a new state and leaves ``state`` alone."""
    if not dt > 0:
        raise ParameterDomainError("dt must be positive")
    x, y, theta = integrate_pose(state.x, state.y, state.theta, L, k, state.omega, dt)
    return replace(state, x=x, y=y, theta=theta, oscillator=replace(state.oscillator))


def clamp_duration(value: float, d_min: float, d_max: float) -> float:
    return min(max(value, d_min), d_max)


def next_walk_duration(config: StrategyConfig, rng: RngStream) -> float:
    """Seconds of straight walking for the next flight."""
    policy = config.walk_policy
    if isinstance(policy, FixedWalk):
        return policy.duration
    d_min = config.d_min if config.d_min is not None else 0.0
    d_max = config.d_max if config.d_max is not None else math.inf
    return clamp_duration(abs(sample_levy(policy.params, rng)), d_min, d_max)


def next_turn_rate(config: StrategyConfig, rng: RngStream) -> float:
    return config.sigma_omega * sample_gaussian(rng)


def _start_turn(state: RobotState, config: StrategyConfig) -> None:
    state.phase = Phase.TURN
    state.omega = next_turn_rate(config, state.rng)
    state.oscillator.edge(0, config.turn_duration)
    state.turns += 1


def _start_walk(state: RobotState, config: StrategyConfig) -> None:
    state.phase = Phase.WALK
    state.omega = 0.0
    state.oscillator.edge(1, next_walk_duration(config, state.rng))


def _pheromone_ahead(state: RobotState, percepts: Percepts, lookahead: float) -> bool:
    hx, hy = math.cos(state.theta), math.sin(state.theta)
    ax, ay = state.x + lookahead * hx, state.y + lookahead * hy
    for zone in percepts.pheromone_zones:
        d_now = math.hypot(state.x - zone.cx, state.y - zone.cy)
        d_next = math.hypot(ax - zone.cx, ay - zone.cy)
        if d_next < zone.radius and d_next < d_now:
            return True
    return False


def _neighbor_ahead(state: RobotState, neighbors) -> bool:
    hx, hy = math.cos(state.theta), math.sin(state.theta)
    return any(nb.dx * hx + nb.dy * hy > 0.0 for nb in neighbors)


def fsm_step(state: RobotState, percepts: Percepts, config: StrategyConfig, dt: float,
             lookahead: float = 0.5) -> tuple[RobotState, MotionCommand]:
    """Advance the controller one tick.

    Updates ``state`` in place (phase, oscillator, heading in the potential
    field routine, turn rate, event counters) and returns it together with
    the motion to integrate. Rules, highest priority first:

    1. an unmarked target in range -> CATCH_TARGET (from any other phase)
    2. walking with a neighbour inside the repulsion radius and the field
       enabled -> POTENTIAL_FIELD
    3. walking towards an obstacle, wall, pheromone zone or (unhandled)
       neighbour -> walk truncated
    4. walk expired -> TURN with a fresh Gaussian turn rate
    5. turn expired -> WALK with a fresh duration
    6. POTENTIAL_FIELD steers along the net repulsion until no neighbour
       is inside the repulsion radius, then resumes walking
    7. CATCH_TARGET -> TURN
    8. INIT -> TURN
    """
    events: list[str] = []
    osc = state.oscillator
    pf = config.potential_field

    if state.phase is not Phase.CATCH_TARGET and percepts.targets_in_range:
        state.phase = Phase.CATCH_TARGET
        state.catch_target = min(percepts.targets_in_range)
        osc.edge(0, 0.0)
        state.omega = 0.0
        return state, MotionCommand(0, 0.0, 0.0, ("catch_request",))

    if state.phase is Phase.CATCH_TARGET or state.phase is Phase.INIT:
        state.catch_target = None
        _start_turn(state, config)
        events.append("turn")
        osc.advance(dt)
        return state, MotionCommand(0, 0.0, state.omega, tuple(events))

    if state.phase is Phase.TURN:
        if not osc.expired:
            osc.advance(dt)
            return state, MotionCommand(0, 0.0, state.omega)
        _start_walk(state, config)
        events.append("walk")

    if pf is not None:
        close = [nb for nb in percepts.neighbors if nb.distance < pf.rho0]
        others = [nb for nb in percepts.neighbors if nb.distance >= pf.rho0]
    else:
        close = []
        others = percepts.neighbors

    if state.phase is Phase.POTENTIAL_FIELD and not close:
        _start_walk(state, config)
        events.append("pf_exit")

    if close:
        if state.phase is not Phase.POTENTIAL_FIELD:
            state.phase = Phase.POTENTIAL_FIELD
            state.pf_activations += 1
            events.append("pf_enter")
        # neighbours are clamped to the minimum separation before the force law
        nbs = []
        for nb in close:
            if nb.distance < EPS_SEP:
                scale = EPS_SEP / nb.distance if nb.distance > 0 else 0.0
                nbs.append((state.x + nb.dx * scale, state.y + nb.dy * scale) if scale
                           else (state.x - EPS_SEP, state.y))
            else:
                nbs.append((state.x + nb.dx, state.y + nb.dy))
        force = net_repulsion((state.x, state.y), nbs, pf)
        magnitude = math.hypot(force[0], force[1])
        if magnitude > 0.0:
            state.theta = math.atan2(force[1], force[0])
        speed = min(config.k * (1.0 + config.c_f * magnitude), config.speed_cap)
        osc.edge(1, 0.0)
        return state, MotionCommand(1, speed, 0.0, tuple(events))

    # state.phase is WALK here
    if (percepts.wall_ahead or percepts.obstacle_ahead
            or _pheromone_ahead(state, percepts, lookahead)
            or _neighbor_ahead(state, others)):
        osc.edge(1, 0.0)
        state.avoidances += 1
        events.append("avoid")

    if osc.expired:
        _start_turn(state, config)
        events.append("turn")
        osc.advance(dt)
        return state, MotionCommand(0, 0.0, state.omega, tuple(events))

    osc.advance(dt)
    return state, MotionCommand(1, config.k, 0.0, tuple(events))
