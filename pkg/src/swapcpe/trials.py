"""One seeded trial of a named policy on a problem instance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from swapcpe.bounds import BoundInputs, BoundUndefinedError, strong_only_bound, swap_bound, weak_only_bound
from swapcpe.difficulty import difficulty
from swapcpe.environments import GaussianEnvironment, ReplayData, ReplayEnvironment
from swapcpe.model import (
    ConfigError,
    DecisionClass,
    InstanceGenerator,
    Objective,
    ObjectiveKind,
    ProblemInstance,
)
from swapcpe.oracles import BRUTE_FORCE_LIMIT, OracleKind, maximize
from swapcpe.policies import (
    BaselineKind,
    PullPolicy,
    RunRecord,
    StoppingRule,
    run_baseline,
    run_swap,
    spp_probability,
)

POLICY_NAMES = ("swap", "strong", "weak", "uniform", "random")

InstanceSource = Union[ProblemInstance, InstanceGenerator]


def instance_for(source: InstanceSource, seed: int) -> ProblemInstance:
    if isinstance(source, InstanceGenerator):
        return source.draw(seed)
    return source


def decision_class_for(instance: ProblemInstance, k: int, objective: ObjectiveKind) -> DecisionClass:
    if objective is ObjectiveKind.DIVERSITY:
        if instance.labels is None:
            raise ConfigError("diversity objective needs labelled arms")
        obj = Objective.diversity(instance.labels)
    else:
        obj = Objective(objective)
    return DecisionClass.top_k(instance.n, k, obj)


def pull_policy(name: str, s: float, j: float) -> PullPolicy:
    if name == "swap":
        return PullPolicy.formula(s, j)
    if name == "strong":
        return PullPolicy.strong_only(s, j)
    if name == "weak":
        return PullPolicy.weak_only(s, j)
    raise ConfigError(f"{name!r} is not a SWAP pull policy")


def run_named(
    name: str,
    env,
    dclass: DecisionClass,
    oracle: OracleKind,
    stopping: StoppingRule,
    delta: float,
    seed: int,
    sigma: float,
    random_budget: float | None = None,
) -> RunRecord:
    if name == "uniform":
        return run_baseline(BaselineKind.UNIFORM, env, dclass, oracle, seed=seed)
    if name == "random":
        return run_baseline(BaselineKind.RANDOM, env, dclass, oracle, seed=seed, budget=random_budget)
    policy = pull_policy(name, env.s, env.j)
    return run_swap(env, dclass, oracle, policy, stopping, delta, seed, sigma=sigma)


def make_environment(instance: ProblemInstance, s: float, j: float, seed: int,
                     replay: ReplayData | None = None, fallback_sigma: float | None = None):
    if replay is not None:
        return ReplayEnvironment(replay, fallback_sigma, s, j, seed)
    return GaussianEnvironment.from_instance(instance, s, j, seed)


def reference_oracle(dclass: DecisionClass, fallback: OracleKind) -> OracleKind:
    """Exact oracle for scoring outcomes when the class is small enough."""
    if dclass.size() <= BRUTE_FORCE_LIMIT:
        return OracleKind.BRUTE_FORCE
    return fallback


@dataclass(frozen=True)
class TrialResult:
    policy: str
    s: float
    j: float
    trial: int
    seed: int
    cost: float
    converged: bool
    cohort: tuple[int, ...]
    utility: float
    success: bool
    greedy_success: bool | None
    hardness: float
    bound: float


def policy_bound(name: str, n: int, s: float, j: float, delta: float, sigma: float,
                 h_tilde: float) -> float:
    """Closed-form cost bound matching the policy, NaN where none applies."""
    if name not in ("swap", "strong", "weak") or not math.isfinite(h_tilde):
        return math.nan
    inputs = BoundInputs.for_policy(pull_policy(name, s, j), n, delta, sigma, h_tilde)
    if name == "weak":
        return weak_only_bound(inputs)
    if name == "strong":
        return strong_only_bound(inputs)
    try:
        return swap_bound(inputs)
    except BoundUndefinedError:
        return math.nan


@dataclass(frozen=True)
class TrialSetup:
    """Everything needed to replay one trial from its seed."""

    source: InstanceSource
    k: int
    objective: ObjectiveKind
    oracle: OracleKind
    delta: float
    stopping: StoppingRule
    sigma: float | None = None
    replay: ReplayData | None = None
    fallback_sigma: float | None = None
    random_budget: float | None = None


def run_trial(setup: TrialSetup, policies: Sequence[str], grid: Sequence[tuple[float, float]],
              trial: int, seed: int) -> list[TrialResult]:
    """Run every policy in every (s, j) cell on the instance of one trial.

    All runs share the trial seed, hence the same instance and per-arm reward
    streams. The weak-only run does not depend on (s, j), and neither does
    general SWAP when its strong-pull probability is zero, so those runs are
    computed once and reused across cells.
    """
    instance = instance_for(setup.source, seed)
    dclass = decision_class_for(instance, setup.k, setup.objective)
    sigma = instance.sigma if setup.sigma is None else setup.sigma
    exact = reference_oracle(dclass, setup.oracle)
    truth = instance.utilities
    optimum = maximize(exact, truth, dclass)
    greedy_optimum = None
    if setup.objective is ObjectiveKind.DIVERSITY:
        greedy_optimum = maximize(OracleKind.GREEDY, truth, dclass)
    h_tilde = hardness = math.nan
    if sigma > 0:
        report = difficulty(ProblemInstance(truth, sigma, instance.labels), dclass, exact)
        hardness, h_tilde = report.hardness, report.h_tilde

    weak_record = None
    results = []
    for s, j in grid:
        for name in policies:
            reuse = name == "weak" or (name == "swap" and spp_probability(pull_policy(name, s, j)) == 0.0)
            if reuse and weak_record is not None:
                record = weak_record
            else:
                env = make_environment(instance, s, j, seed, setup.replay, setup.fallback_sigma)
                record = run_named(name, env, dclass, setup.oracle, setup.stopping, setup.delta,
                                   seed, sigma, setup.random_budget)
                if reuse:
                    weak_record = record
            cohort = frozenset(record.cohort)
            results.append(TrialResult(
                policy=name,
                s=s,
                j=j,
                trial=trial,
                seed=seed,
                cost=record.total_cost,
                converged=record.converged,
                cohort=record.cohort,
                utility=dclass.value(truth, cohort),
                success=cohort == optimum,
                greedy_success=None if greedy_optimum is None else cohort == greedy_optimum,
                hardness=hardness,
                bound=policy_bound(name, instance.n, s, j, setup.delta, sigma, h_tilde),
            ))
    return results
