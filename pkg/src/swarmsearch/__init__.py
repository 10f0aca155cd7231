"""Multi-robot random search with Levy flights and repulsive potential fields."""

from .agent import (
    FixedWalk,
    LevyWalk,
    MotionCommand,
    Phase,
    RobotState,
    StrategyConfig,
    WalkOscillator,
    fsm_step,
    make_strategy,
    next_turn_rate,
    next_walk_duration,
    step_kinematics,
)
from .bench import (
    AggregateStats,
    ExperimentSpec,
    StrategyOptions,
    compare_strategies,
    export_results,
    load_experiment_spec,
    run_experiment,
)
from .engine import SimConfig, TrialResult, run_trial, tick
from .levy_theory import SearchGeometry, levy_pdf, mean_flights, optimal_alpha, tail_approx
from .potential_field import (
    PotentialParams,
    Vector2,
    net_repulsion,
    repulsive_force,
    repulsive_potential,
)
from .stochastic import LevyParams, RngStream, sample_gaussian, sample_levy, sample_uniform
from .world import (
    Arena,
    Circle,
    Percepts,
    Rect,
    Scenario,
    WorldState,
    deposit_pheromone,
    generate_scenario,
    load_scenario,
    resolve_collisions,
    sense,
)

__version__ = "0.1.0"
