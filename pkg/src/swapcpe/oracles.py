"""Maximization oracles: argmax of the class objective under a weight vector.

All oracles break ties toward the lowest arm index (lexicographically first
cohort for brute force) so that seeded runs are reproducible.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Sequence

from swapcpe.model import ClassKind, ConfigError, DecisionClass, ObjectiveKind, evaluate

BRUTE_FORCE_LIMIT = 2**20


class OracleKind(enum.Enum):
    SORT_TOP_K = "sort_top_k"
    GREEDY = "greedy"
    BRUTE_FORCE = "brute_force"


class InfeasibleError(ValueError):
    """No member of the class satisfies the include/exclude constraint."""


def check_pairing(kind: OracleKind, dclass: DecisionClass) -> None:
    """Raise ConfigError if ``kind`` cannot maximize over ``dclass``."""
    objective = dclass.objective.kind
    if kind is OracleKind.SORT_TOP_K:
        if dclass.kind is not ClassKind.TOP_K:
            raise ConfigError("sort_top_k oracle needs a top-K class")
        if objective is ObjectiveKind.DIVERSITY:
            raise ConfigError("sort_top_k oracle cannot maximize the diversity objective")
    elif kind is OracleKind.GREEDY:
        if dclass.kind is not ClassKind.TOP_K:
            raise ConfigError("greedy oracle needs a top-K (cardinality) class")
    elif kind is OracleKind.BRUTE_FORCE:
        if dclass.size() > BRUTE_FORCE_LIMIT:
            raise ConfigError(
                f"brute-force oracle refuses classes with more than {BRUTE_FORCE_LIMIT} members"
            )


def _sort_top_k(weights, k, candidates, seed_set):
    ranked = sorted(candidates, key=lambda a: (-weights[a], a))
    return frozenset(seed_set) | frozenset(ranked[: k - len(seed_set)])


def _greedy(weights, dclass, candidates, seed_set):
    objective = dclass.objective
    kind = objective.kind
    labels = objective.labels
    chosen = set(seed_set)
    # running partition masses; linear gains need none
    mass: dict[int, float] = {}
    total = 0.0
    for a in chosen:
        w = max(weights[a], 0.0)
        total += w
        if labels is not None:
            mass[labels[a]] = mass.get(labels[a], 0.0) + w
    pool = [a for a in candidates if a not in chosen]
    while len(chosen) < dclass.k:
        best, best_gain = -1, -math.inf
        for a in pool:
            if kind is ObjectiveKind.TOP_K_LINEAR:
                gain = weights[a]
            elif kind is ObjectiveKind.SQRT_TOP_K:
                gain = math.sqrt(total + max(weights[a], 0.0)) - math.sqrt(total)
            else:
                m = mass.get(labels[a], 0.0)
                gain = math.sqrt(m + max(weights[a], 0.0)) - math.sqrt(m)
            if gain > best_gain:
                best, best_gain = a, gain
        chosen.add(best)
        pool.remove(best)
        w = max(weights[best], 0.0)
        total += w
        if labels is not None:
            mass[labels[best]] = mass.get(labels[best], 0.0) + w
    return frozenset(chosen)


def _brute_force(weights, dclass, include, exclude):
    best, best_value = None, -math.inf
    for m in dclass.members():
        if include is not None and include not in m:
            continue
        if exclude is not None and exclude in m:
            continue
        value = evaluate(dclass.objective, weights, m)
        if value > best_value:
            best, best_value = m, value
    return best


def maximize_constrained(
    kind: OracleKind,
    weights: Sequence[float],
    dclass: DecisionClass,
    force_include: int | None = None,
    force_exclude: int | None = None,
) -> frozenset[int]:
    """Class maximizer among cohorts that contain ``force_include`` / omit ``force_exclude``.

    Constraints restrict the candidate pool directly rather than perturbing
    weights, so the greedy marginal gains of the remaining arms are untouched.

    Raises:
        ConfigError: bad oracle/class pairing or both constraints given.
        InfeasibleError: no feasible cohort satisfies the constraint.
    """
    if force_include is not None and force_exclude is not None:
        raise ConfigError("at most one of force_include / force_exclude may be set")
    if len(weights) != dclass.n:
        raise ConfigError(f"expected {dclass.n} weights, got {len(weights)}")
    check_pairing(kind, dclass)
    for arm in (force_include, force_exclude):
        if arm is not None and not 0 <= arm < dclass.n:
            raise ConfigError(f"arm {arm} out of range")

    if kind is OracleKind.BRUTE_FORCE:
        result = _brute_force(weights, dclass, force_include, force_exclude)
        if result is None:
            raise InfeasibleError("no cohort satisfies the constraint")
        return result

    candidates = [a for a in range(dclass.n) if a != force_exclude and a != force_include]
    seed_set = () if force_include is None else (force_include,)
    if len(candidates) + len(seed_set) < dclass.k:
        raise InfeasibleError("too few arms remain to fill a cohort")
    if kind is OracleKind.SORT_TOP_K:
        return _sort_top_k(weights, dclass.k, candidates, seed_set)
    return _greedy(weights, dclass, candidates, seed_set)


def maximize(kind: OracleKind, weights: Sequence[float], dclass: DecisionClass) -> frozenset[int]:
    """Oracle(weights): the cohort in ``dclass`` maximizing its objective."""
    return maximize_constrained(kind, weights, dclass)


def make_oracle(kind: OracleKind, dclass: DecisionClass) -> Callable[[Sequence[float]], frozenset[int]]:
    """Validated single-argument oracle for the hot loop of a bandit run."""
    check_pairing(kind, dclass)
    n = dclass.n
    if kind is OracleKind.SORT_TOP_K:
        k = dclass.k
        arms = range(n)

        def oracle(weights):
            # stable descending sort keeps the lowest index first among ties
            return frozenset(sorted(arms, key=weights.__getitem__, reverse=True)[:k])

    elif kind is OracleKind.GREEDY:
        arms = list(range(n))

        def oracle(weights):
            return _greedy(weights, dclass, arms, ())

    else:
        members = list(dclass.members())
        objective = dclass.objective

        def oracle(weights):
            best, best_value = None, -math.inf
            for m in members:
                value = evaluate(objective, weights, m)
                if value > best_value:
                    best, best_value = m, value
            return best

    return oracle
