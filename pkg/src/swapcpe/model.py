"""Static problem data: arms, objectives and decision classes."""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from swapcpe.rng import instance_rng


class ConfigError(ValueError):
    """Raised for invalid problem, oracle or experiment configuration."""


class ObjectiveKind(enum.Enum):
    TOP_K_LINEAR = "top_k_linear"
    SQRT_TOP_K = "sqrt_top_k"
    DIVERSITY = "diversity"


@dataclass(frozen=True)
class Objective:
    """Cohort objective. Diversity needs one partition label per arm."""

    kind: ObjectiveKind
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind is ObjectiveKind.DIVERSITY:
            if self.labels is None:
                raise ConfigError("diversity objective requires partition labels")
            if any(lab < 0 for lab in self.labels):
                raise ConfigError("partition labels must be non-negative")

    @classmethod
    def top_k_linear(cls) -> "Objective":
        return cls(ObjectiveKind.TOP_K_LINEAR)

    @classmethod
    def sqrt_top_k(cls) -> "Objective":
        return cls(ObjectiveKind.SQRT_TOP_K)

    @classmethod
    def diversity(cls, labels: Sequence[int]) -> "Objective":
        return cls(ObjectiveKind.DIVERSITY, tuple(int(x) for x in labels))


def _linear(utilities, cohort):
    return math.fsum(map(utilities.__getitem__, cohort))


def _sqrt_total(utilities, cohort):
    return math.sqrt(math.fsum(max(utilities[a], 0.0) for a in cohort))


def _diversity(labels):
    def value(utilities, cohort):
        parts: dict[int, list[float]] = {}
        for a in cohort:
            parts.setdefault(labels[a], []).append(max(utilities[a], 0.0))
        return math.fsum(math.sqrt(math.fsum(parts[lab])) for lab in sorted(parts))

    return value


def value_function(objective: Objective) -> Callable[[Sequence[float], Iterable[int]], float]:
    """``f(utilities, cohort)`` computing the objective; see :func:`evaluate`."""
    if objective.kind is ObjectiveKind.TOP_K_LINEAR:
        return _linear
    if objective.kind is ObjectiveKind.SQRT_TOP_K:
        return _sqrt_total
    return _diversity(objective.labels)


def evaluate(objective: Objective, utilities: Sequence[float], cohort: Iterable[int]) -> float:
    """Objective value of ``cohort`` under ``utilities``.

    The square-root objectives clamp each utility at zero so that noisy
    (possibly negative) estimates keep the value real and monotone.
    """
    return value_function(objective)(utilities, cohort)


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth for one simulated problem; hidden from the algorithms."""

    utilities: tuple[float, ...]
    sigma: float
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.utilities) < 2:
            raise ConfigError("an instance needs at least two arms")
        if any(not (0.0 <= u <= 1.0) for u in self.utilities):
            raise ConfigError("utilities must lie in [0, 1]")
        if self.labels is not None:
            if len(self.labels) != len(self.utilities):
                raise ConfigError("labels must have one entry per arm")
            if any(lab < 0 for lab in self.labels):
                raise ConfigError("labels must be non-negative")
        if not self.sigma >= 0.0:
            raise ConfigError("sigma must be non-negative")

    @property
    def n(self) -> int:
        return len(self.utilities)

    @property
    def n_labels(self) -> int:
        return 0 if self.labels is None else max(self.labels) + 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "utilities": list(self.utilities),
            "labels": None if self.labels is None else list(self.labels),
            "sigma": self.sigma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        utilities = tuple(float(u) for u in data["utilities"])
        if "n" in data and int(data["n"]) != len(utilities):
            raise ConfigError(f"n={data['n']} does not match {len(utilities)} utilities")
        labels = data.get("labels")
        return cls(
            utilities=utilities,
            sigma=float(data["sigma"]),
            labels=None if labels is None else tuple(int(x) for x in labels),
        )

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ProblemInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class InstanceGenerator:
    """Draws uniform utilities in [0, 1] with a minimum pairwise separation.

    Sorted spacings are drawn on the shrunken interval and then padded, which
    samples exactly the uniform distribution conditioned on the separation.
    """

    n: int
    sigma: float
    min_separation: float = 0.0
    n_labels: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.min_separation < 0 or (self.n - 1) * self.min_separation >= 1.0:
            raise ConfigError("min_separation too large for n arms in [0, 1]")

    def draw(self, seed: int) -> ProblemInstance:
        rng = instance_rng(seed)
        slack = 1.0 - (self.n - 1) * self.min_separation
        base = np.sort(rng.uniform(0.0, slack, size=self.n))
        values = base + self.min_separation * np.arange(self.n)
        values = np.clip(values, 0.0, 1.0)[rng.permutation(self.n)]
        labels = None
        if self.n_labels > 0:
            labels = tuple(int(x) for x in rng.integers(0, self.n_labels, size=self.n))
        return ProblemInstance(tuple(float(v) for v in values), self.sigma, labels)


class ClassKind(enum.Enum):
    TOP_K = "top_k"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class DecisionClass:
    """Family of feasible cohorts together with the objective maximized over it."""

    n: int
    objective: Objective
    kind: ClassKind
    k: int | None = None
    sets: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        if self.kind is ClassKind.TOP_K:
            if self.k is None or not 1 <= self.k < self.n:
                raise ConfigError(f"top-K class needs 1 <= K < n, got K={self.k}, n={self.n}")
        else:
            if self.sets is None or len(set(self.sets)) < 2:
                raise ConfigError("explicit class needs at least two distinct subsets")
            for m in self.sets:
                if not m:
                    raise ConfigError("explicit class members must be non-empty")
                if any(not 0 <= a < self.n for a in m):
                    raise ConfigError("explicit class member references an unknown arm")
        if self.objective.labels is not None and len(self.objective.labels) != self.n:
            raise ConfigError("objective labels must have one entry per arm")

    @classmethod
    def top_k(cls, n: int, k: int, objective: Objective | None = None) -> "DecisionClass":
        return cls(n, objective or Objective.top_k_linear(), ClassKind.TOP_K, k=k)

    @classmethod
    def explicit(
        cls, n: int, sets: Iterable[Iterable[int]], objective: Objective | None = None
    ) -> "DecisionClass":
        members: list[frozenset[int]] = []
        for m in sets:
            fm = frozenset(int(a) for a in m)
            if fm not in members:
                members.append(fm)
        return cls(n, objective or Objective.top_k_linear(), ClassKind.EXPLICIT, sets=tuple(members))

    def size(self) -> int:
        if self.kind is ClassKind.TOP_K:
            return math.comb(self.n, self.k)
        return len(self.sets)

    def members(self) -> Iterator[frozenset[int]]:
        """Feasible cohorts; top-K classes enumerate in lexicographic order."""
        if self.kind is ClassKind.TOP_K:
            for combo in itertools.combinations(range(self.n), self.k):
                yield frozenset(combo)
        else:
            yield from self.sets

    def contains(self, cohort: Iterable[int]) -> bool:
        cohort = frozenset(cohort)
        if self.kind is ClassKind.TOP_K:
            return len(cohort) == self.k and all(0 <= a < self.n for a in cohort)
        return cohort in self.sets

    def value(self, utilities: Sequence[float], cohort: Iterable[int]) -> float:
        return evaluate(self.objective, utilities, cohort)


def compute_width(dclass: DecisionClass) -> int:
    """Smallest symmetric-difference size between two distinct members."""
    if dclass.kind is ClassKind.TOP_K:
        return 2
    sets = list(dclass.members())
    if len(sets) < 2:
        raise ConfigError("width is undefined for a class with fewer than two members")
    return min(len(a ^ b) for a, b in itertools.combinations(sets, 2))
