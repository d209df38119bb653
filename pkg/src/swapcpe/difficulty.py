"""Gap, hardness and width metrics of a problem instance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from swapcpe.model import ConfigError, DecisionClass, ProblemInstance, compute_width
from swapcpe.oracles import InfeasibleError, OracleKind, maximize, maximize_constrained


@dataclass(frozen=True)
class DifficultyReport:
    gaps: tuple[float, ...]
    hardness: float
    width: int
    h_tilde: float
    optimum: frozenset[int]


def compute_gap(
    instance: ProblemInstance, dclass: DecisionClass, arm: int, oracle: OracleKind
) -> float:
    """Objective loss of the best cohort that disagrees with the optimum on ``arm``.

    Returns ``math.inf`` when no feasible cohort disagrees (the arm is never
    contested). A zero gap means the optimum is not unique.
    """
    u = instance.utilities
    best = maximize(oracle, u, dclass)
    try:
        if arm in best:
            rival = maximize_constrained(oracle, u, dclass, force_exclude=arm)
        else:
            rival = maximize_constrained(oracle, u, dclass, force_include=arm)
    except InfeasibleError:
        return math.inf
    return dclass.value(u, best) - dclass.value(u, rival)


def top_k_gaps(utilities: Sequence[float], k: int) -> tuple[float, ...]:
    """Closed-form gaps for the linear top-K objective.

    An arm inside the top K competes with the (K+1)-th best arm; an arm
    outside competes with the K-th best.
    """
    n = len(utilities)
    if not 1 <= k < n:
        raise ConfigError("need 1 <= k < n")
    order = sorted(range(n), key=lambda a: (-utilities[a], a))
    kth, next_ = utilities[order[k - 1]], utilities[order[k]]
    top = set(order[:k])
    return tuple(
        utilities[a] - next_ if a in top else kth - utilities[a] for a in range(n)
    )


def hardness(gaps: Sequence[float]) -> float:
    """Sum of inverse squared gaps; infinite if any gap is zero."""
    if any(g <= 0 for g in gaps):
        return math.inf
    return math.fsum(1.0 / (g * g) for g in gaps)


def difficulty(
    instance: ProblemInstance, dclass: DecisionClass, oracle: OracleKind
) -> DifficultyReport:
    if not instance.sigma > 0:
        raise ConfigError("difficulty requires sigma > 0")
    if instance.n != dclass.n:
        raise ConfigError("instance and decision class disagree on the number of arms")
    gaps = tuple(compute_gap(instance, dclass, a, oracle) for a in range(instance.n))
    h = hardness(gaps)
    width = compute_width(dclass)
    h_tilde = max(width**2 * instance.sigma**2 * h, 1.0)
    best = maximize(oracle, instance.utilities, dclass)
    return DifficultyReport(gaps, h, width, h_tilde, best)
