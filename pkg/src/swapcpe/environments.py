"""Reward sources for strong and weak arm pulls."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from swapcpe.model import ConfigError, ProblemInstance
from swapcpe.rng import reward_sequences

_BLOCK = 512


class PullOutcome(NamedTuple):
    reward: float
    cost: float
    gain: float


class ReplayExhaustedError(RuntimeError):
    pass


def _check_pull_params(s: float, j: float) -> None:
    if not s >= 1.0:
        raise ConfigError(f"strong-pull gain s must be >= 1, got {s}")
    if not j >= 1.0:
        raise ConfigError(f"strong-pull cost j must be >= 1, got {j}")


class _NormalStreams:
    """Per-arm standard-normal streams drawn in blocks.

    The k-th draw of arm a depends only on (seed, a, k), so rewards are paired
    across policies that visit arms in different orders.
    """

    def __init__(self, seed: int, n: int):
        self._gens = [np.random.default_rng(ss) for ss in reward_sequences(seed, n)]
        self._buf: list[list[float]] = [[] for _ in range(n)]
        self._pos = [0] * n

    def next(self, arm: int) -> float:
        pos = self._pos[arm]
        buf = self._buf[arm]
        if pos >= len(buf):
            buf = self._buf[arm] = self._gens[arm].standard_normal(_BLOCK).tolist()
            pos = 0
        self._pos[arm] = pos + 1
        return buf[pos]


class GaussianEnvironment:
    """Weak pulls ~ N(u(a), sigma); strong pulls ~ N(u(a), sigma / sqrt(s)).

    A strong pull returns a single reward that already stands for the average
    of ``s`` weak observations. Rewards are not clamped to [0, 1].
    """

    def __init__(self, utilities: Sequence[float], sigma: float, s: float = 1.0,
                 j: float = 1.0, seed: int = 0):
        _check_pull_params(s, j)
        if not sigma >= 0:
            raise ConfigError("sigma must be non-negative")
        self.utilities = tuple(float(u) for u in utilities)
        self.sigma = float(sigma)
        self.s = float(s)
        self.j = float(j)
        self.seed = seed
        self._strong_scale = self.sigma / math.sqrt(self.s)
        self._noise = _NormalStreams(seed, len(self.utilities))

    @classmethod
    def from_instance(cls, instance: ProblemInstance, s: float = 1.0, j: float = 1.0,
                      seed: int = 0, sigma: float | None = None) -> "GaussianEnvironment":
        return cls(instance.utilities, instance.sigma if sigma is None else sigma, s, j, seed)

    @property
    def n(self) -> int:
        return len(self.utilities)

    def pull(self, arm: int, strong: bool = False) -> PullOutcome:
        z = self._noise.next(arm)
        if strong:
            return PullOutcome(self.utilities[arm] + self._strong_scale * z, self.j, self.s)
        return PullOutcome(self.utilities[arm] + self.sigma * z, 1.0, 1.0)


@dataclass(frozen=True)
class ReplayData:
    """Recorded review scores per arm, as read from a replay CSV."""

    base_scores: tuple[float, ...]
    labels: tuple[int, ...]
    scores: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.base_scores)

    def to_instance(self, sigma: float) -> ProblemInstance:
        """Instance whose ground truth is the per-arm base score."""
        return ProblemInstance(self.base_scores, sigma, self.labels)


def load_replay_csv(path: str | Path) -> ReplayData:
    """Read ``arm_id,base_score,label,scores`` rows; ``scores`` is ``;``-separated."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"arm_id", "base_score", "label", "scores"} - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"replay file is missing columns: {sorted(missing)}")
        for line, row in enumerate(reader, start=2):
            try:
                arm = int(row["arm_id"])
                base = float(row["base_score"])
                label = int(row["label"])
                raw = (row["scores"] or "").strip()
                scores = tuple(float(x) for x in raw.split(";") if x.strip()) if raw else ()
            except ValueError as exc:
                raise ConfigError(f"replay file line {line}: {exc}") from None
            if arm in rows:
                raise ConfigError(f"replay file line {line}: duplicate arm_id {arm}")
            if any(not 0.0 <= x <= 1.0 for x in scores):
                raise ConfigError(f"replay file line {line}: scores must lie in [0, 1]")
            rows[arm] = (base, label, scores)
    if sorted(rows) != list(range(len(rows))):
        raise ConfigError("replay arm_id values must be 0..n-1")
    ordered = [rows[a] for a in range(len(rows))]
    return ReplayData(
        base_scores=tuple(r[0] for r in ordered),
        labels=tuple(r[1] for r in ordered),
        scores=tuple(r[2] for r in ordered),
    )


class ReplayEnvironment:
    """Replays recorded scores in order, then samples around each base score.

    A strong pull consumes one recorded score but reports gain ``s``. Once an
    arm's record is used up, rewards come from N(base, fallback_sigma) (scaled
    by 1/sqrt(s) for strong pulls); with no fallback the pull fails.
    """

    def __init__(self, data: ReplayData, fallback_sigma: float | None = None,
                 s: float = 1.0, j: float = 1.0, seed: int = 0):
        _check_pull_params(s, j)
        if fallback_sigma is not None and fallback_sigma < 0:
            raise ConfigError("fallback_sigma must be non-negative")
        self.data = data
        self.fallback_sigma = fallback_sigma
        self.s = float(s)
        self.j = float(j)
        self.seed = seed
        self._next = [0] * data.n
        self._noise = _NormalStreams(seed, data.n)

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def utilities(self) -> tuple[float, ...]:
        return self.data.base_scores

    def pull(self, arm: int, strong: bool = False) -> PullOutcome:
        cost, gain = (self.j, self.s) if strong else (1.0, 1.0)
        recorded = self.data.scores[arm]
        k = self._next[arm]
        if k < len(recorded):
            self._next[arm] = k + 1
            return PullOutcome(recorded[k], cost, gain)
        if self.fallback_sigma is None:
            raise ReplayExhaustedError(f"arm {arm} has no recorded scores left and no fallback")
        scale = self.fallback_sigma / math.sqrt(gain)
        return PullOutcome(self.data.base_scores[arm] + scale * self._noise.next(arm), cost, gain)
