import copy
import itertools
import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swarmsearch import agent
from swarmsearch.agent import (
    FixedWalk,
    LevyWalk,
    Phase,
    RobotState,
    StrategyConfig,
    WalkOscillator,
    canonical_strategy,
    fsm_step,
    make_strategy,
    next_turn_rate,
    next_walk_duration,
    step_kinematics,
    wrap_angle,
)
from swarmsearch.errors import ParameterDomainError
from swarmsearch.potential_field import PotentialParams, net_repulsion
from swarmsearch.stochastic import LevyParams, RngStream
from swarmsearch.world import Neighbor, Percepts, PheromoneZone


def robot(phase=Phase.WALK, timer=5.0, theta=0.0, seed=1):
    r = RobotState(0, 10.0, 10.0, theta, RngStream(seed))
    r.phase = phase
    r.oscillator = WalkOscillator(1 if phase in (Phase.WALK, Phase.POTENTIAL_FIELD) else 0, timer)
    return r


def config(pf=True, **kw):
    kw.setdefault("d_min", 0.05)
    kw.setdefault("d_max", 47.0)
    return StrategyConfig(LevyWalk(), PotentialParams(1.0, 0.6) if pf else None, **kw)


# -- kinematics -------------------------------------------------------------

def test_walk_step_moves_along_heading():
    r = robot(theta=0.0)
    out = step_kinematics(r, 1, 0.6, 0.1)
    assert out.x - r.x == pytest.approx(0.06, abs=1e-15)
    assert out.y == r.y
    assert out.theta == r.theta


def test_turn_step_rotates_in_place():
    r = robot(theta=0.0)
    r.omega = 0.5
    out = step_kinematics(r, 0, 0.6, 0.1)
    assert (out.x, out.y) == (r.x, r.y)
    assert out.theta - r.theta == pytest.approx(0.05, abs=1e-15)


def test_walk_step_north():
    r = robot(theta=math.pi / 2)
    out = step_kinematics(r, 1, 0.6, 1.0)
    assert abs(out.x - r.x) < 1e-12
    assert out.y - r.y == pytest.approx(0.6, abs=1e-12)


def test_step_kinematics_does_not_mutate():
    r = robot()
    step_kinematics(r, 1, 0.6, 0.1)
    assert (r.x, r.y) == (10.0, 10.0)


def test_step_kinematics_rejects_nonpositive_dt():
    with pytest.raises(ParameterDomainError):
        step_kinematics(robot(), 1, 0.6, 0.0)


@given(st.floats(-100, 100, allow_nan=False))
def test_wrap_angle_range(theta):
    w = wrap_angle(theta)
    assert -math.pi <= w < math.pi
    assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)


# -- walk and turn draws ----------------------------------------------------

def test_levy_duration_clamped_below(monkeypatch):
    monkeypatch.setattr(agent, "sample_levy", lambda params, rng: 0.0)
    assert next_walk_duration(config(), RngStream(0)) == 0.05


def test_levy_duration_clamped_above(monkeypatch):
    monkeypatch.setattr(agent, "sample_levy", lambda params, rng: 1e9)
    assert next_walk_duration(config(), RngStream(0)) == 47.0


def test_levy_duration_uses_absolute_value(monkeypatch):
    monkeypatch.setattr(agent, "sample_levy", lambda params, rng: -3.25)
    assert next_walk_duration(config(), RngStream(0)) == 3.25


def test_fixed_duration_constant():
    cfg = StrategyConfig(FixedWalk(4.0))
    rng = RngStream(3)
    assert {next_walk_duration(cfg, rng) for _ in range(50)} == {4.0}


def test_turn_rate_moments():
    cfg = StrategyConfig(sigma_omega=1.0)
    rng = RngStream(11)
    draws = [next_turn_rate(cfg, rng) for _ in range(100_000)]
    assert abs(statistics.pstdev(draws) - 1.0) < 0.02


def test_turn_rate_scales_to_zero():
    a = next_turn_rate(StrategyConfig(sigma_omega=1.0), RngStream(4))
    b = next_turn_rate(StrategyConfig(sigma_omega=1e-9), RngStream(4))
    assert b == pytest.approx(a * 1e-9)


def test_turn_rate_deterministic():
    cfg = StrategyConfig()
    assert next_turn_rate(cfg, RngStream(9)) == next_turn_rate(cfg, RngStream(9))


def test_walk_durations_keep_levy_tail():
    # unclamped durations inherit the survival exponent of |z|
    cfg = StrategyConfig(LevyWalk(LevyParams(alpha=1.5)), d_min=1e-300, d_max=math.inf)
    rng = RngStream(77)
    d = np.sort([next_walk_duration(cfg, rng) for _ in range(60_000)])
    x_lo = d[int(0.99 * len(d))]
    xs = np.geomspace(x_lo, 10 * x_lo, 10)
    surv = (len(d) - np.searchsorted(d, xs, side="right")) / len(d)
    slope = np.polyfit(np.log(xs), np.log(surv), 1)[0]
    assert abs(slope + 1.5) < 0.3


def test_strategy_config_validation():
    with pytest.raises(ParameterDomainError):
        StrategyConfig(k=0.0)
    with pytest.raises(ParameterDomainError):
        StrategyConfig(d_min=2.0, d_max=1.0)
    with pytest.raises(ParameterDomainError):
        FixedWalk(0.0)


def test_make_strategy_names():
    assert make_strategy("fixed").name == "FL"
    assert make_strategy("levy").name == "L"
    assert make_strategy("levy+pf").name == "L+P"
    assert canonical_strategy(" l+p ") == "L+P"
    with pytest.raises(ParameterDomainError):
        canonical_strategy("brownian")


def test_resolved_fills_clamp_defaults():
    cfg = StrategyConfig(k=0.5).resolved(0.05, 10.0)
    assert cfg.d_min == 0.05
    assert cfg.d_max == 20.0


# -- FSM ---------------------------------------------------------------------

def test_walk_timer_expired_turns():
    r = robot(timer=0.0)
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert r.phase is Phase.TURN
    assert cmd.L == 0
    assert r.turns == 1


def test_walk_neighbor_enters_potential_field():
    r = robot(theta=0.0)
    nb = Neighbor(1, 0.3, 0.2, math.hypot(0.3, 0.2))
    cfg = config()
    _, cmd = fsm_step(r, Percepts(neighbors=[nb]), cfg, 0.05)
    assert r.phase is Phase.POTENTIAL_FIELD
    f = net_repulsion((10.0, 10.0), [(10.3, 10.2)], cfg.potential_field)
    assert r.theta == pytest.approx(math.atan2(f.y, f.x))
    assert cmd.L == 1
    assert cfg.k < cmd.speed <= cfg.speed_cap
    assert r.pf_activations == 1


def test_walk_unmarked_target_catches():
    r = robot()
    _, cmd = fsm_step(r, Percepts(targets_in_range=[3]), config(), 0.05)
    assert r.phase is Phase.CATCH_TARGET
    assert r.catch_target == 3
    assert cmd.L == 0
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert r.phase is Phase.TURN


def test_potential_field_exits_to_walk():
    r = robot(Phase.POTENTIAL_FIELD, timer=0.0)
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert r.phase is Phase.WALK
    assert cmd.L == 1
    assert "pf_exit" in cmd.events


def test_turn_expiry_draws_walk():
    r = robot(Phase.TURN, timer=0.0)
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert r.phase is Phase.WALK
    assert cmd.L == 1
    assert r.phase_timer > 0 or cmd.L == 1


def test_init_goes_to_turn():
    r = robot(Phase.INIT, timer=0.0)
    fsm_step(r, Percepts(), config(), 0.05)
    assert r.phase is Phase.TURN


@pytest.mark.parametrize("percepts", [
    Percepts(wall_ahead=True),
    Percepts(obstacle_ahead=True),
    Percepts(pheromone_zones=[PheromoneZone(11.5, 10.0, 2.0)]),
])
def test_avoidance_truncates_walk(percepts):
    r = robot(timer=10.0, theta=0.0)
    _, cmd = fsm_step(r, percepts, config(), 0.05)
    assert r.phase is Phase.TURN
    assert r.avoidances == 1


def test_pheromone_behind_is_ignored():
    r = robot(timer=10.0, theta=0.0)
    fsm_step(r, Percepts(pheromone_zones=[PheromoneZone(9.0, 10.0, 2.0)]), config(), 0.05)
    assert r.phase is Phase.WALK


def test_neighbor_without_field_truncates_only_when_ahead():
    ahead = Neighbor(1, 0.5, 0.0, 0.5)
    behind = Neighbor(1, -0.5, 0.0, 0.5)
    r = robot(timer=10.0)
    fsm_step(r, Percepts(neighbors=[ahead]), config(pf=False), 0.05)
    assert r.phase is Phase.TURN
    r = robot(timer=10.0)
    fsm_step(r, Percepts(neighbors=[behind]), config(pf=False), 0.05)
    assert r.phase is Phase.WALK


def test_walk_heading_constant_turn_position_constant():
    r = robot(timer=1.0, theta=0.3)
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert cmd.L == 1 and r.theta == 0.3
    r = robot(Phase.TURN, timer=1.0)
    r.omega = 2.0
    _, cmd = fsm_step(r, Percepts(), config(), 0.05)
    assert cmd.L == 0 and cmd.speed == 0.0


PHASES = list(Phase)
FLAGS = ("target", "close_nb", "far_nb", "obstacle", "wall", "pheromone", "expired")


def _case(phase, flags, pf):
    r = robot(phase, timer=0.0 if "expired" in flags else 2.0, seed=5)
    if phase is Phase.CATCH_TARGET:
        r.catch_target = 0
    p = Percepts(obstacle_ahead="obstacle" in flags, wall_ahead="wall" in flags)
    if "target" in flags:
        p.targets_in_range.append(0)
    if "close_nb" in flags:
        p.neighbors.append(Neighbor(1, 0.3, 0.1, math.hypot(0.3, 0.1)))
    if "far_nb" in flags:
        p.neighbors.append(Neighbor(2, 0.8, 0.0, 0.8))
    if "pheromone" in flags:
        p.pheromone_zones.append(PheromoneZone(11.5, 10.0, 2.0))
    return r, p, config(pf=pf)


def enumerate_fsm_cases():
    """Run every phase x percept-flag combination; count ill-defined outcomes."""
    n = bad = 0
    for pf in (True, False):
        for phase in PHASES:
            for k in range(len(FLAGS) + 1):
                for flags in itertools.combinations(FLAGS, k):
                    n += 1
                    r1, p, cfg = _case(phase, flags, pf)
                    r2 = copy.deepcopy(r1)
                    try:
                        _, c1 = fsm_step(r1, p, cfg, 0.05)
                        _, c2 = fsm_step(r2, p, cfg, 0.05)
                    except Exception:
                        bad += 1
                        continue
                    ok = (isinstance(r1.phase, Phase) and c1.L in (0, 1)
                          and r1.phase is r2.phase and c1 == c2
                          and r1.phase_timer >= 0.0
                          and r1.phase is not Phase.INIT)
                    if "target" in flags and phase is not Phase.CATCH_TARGET:
                        ok = ok and r1.phase is Phase.CATCH_TARGET
                    bad += not ok
    return n, bad


def test_fsm_totality():
    n, bad = enumerate_fsm_cases()
    assert n == 2 * len(PHASES) * 2 ** len(FLAGS)
    assert bad == 0


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PHASES), st.sets(st.sampled_from(FLAGS)), st.booleans())
def test_fsm_never_leaves_timer_negative(phase, flags, pf):
    r, p, cfg = _case(phase, tuple(flags), pf)
    for _ in range(5):
        fsm_step(r, p, cfg, 0.05)
        assert r.phase_timer >= 0.0
