"""Combinatorial pure exploration with strong and weak arm pulls."""

from swapcpe.bounds import (
    BoundInputs,
    BoundUndefinedError,
    break_even_j,
    strong_only_bound,
    swap_bound,
    weak_only_bound,
)
from swapcpe.difficulty import DifficultyReport, compute_gap, difficulty, hardness, top_k_gaps
from swapcpe.environments import (
    GaussianEnvironment,
    PullOutcome,
    ReplayData,
    ReplayEnvironment,
    ReplayExhaustedError,
    load_replay_csv,
)
from swapcpe.model import (
    ConfigError,
    DecisionClass,
    InstanceGenerator,
    Objective,
    ObjectiveKind,
    ProblemInstance,
    compute_width,
    evaluate,
)
from swapcpe.oracles import InfeasibleError, OracleKind, maximize, maximize_constrained
from swapcpe.policies import (
    BaselineKind,
    PullPolicy,
    RunRecord,
    StoppingRule,
    Termination,
    run_baseline,
    run_clucb,
    run_swap,
    spp_probability,
)
from swapcpe.zone import Zone, ZoneCell, optimal_zone

__version__ = "0.1.0"
