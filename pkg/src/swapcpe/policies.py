"""SWAP (strong/weak arm pulls), its weak-only CLUCB special case, and baselines."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Protocol

from swapcpe.model import ConfigError, DecisionClass, value_function
from swapcpe.oracles import OracleKind, make_oracle
from swapcpe.environments import PullOutcome
from swapcpe.rng import coin_rng

EXACT_TOLERANCE = 1e-12
DEFAULT_BUDGET_CAP = 1e6


class Environment(Protocol):
    s: float
    j: float

    @property
    def n(self) -> int: ...

    def pull(self, arm: int, strong: bool = False) -> PullOutcome: ...


class SppKind(enum.Enum):
    FORMULA = "formula"
    ALWAYS_STRONG = "always_strong"
    ALWAYS_WEAK = "always_weak"
    CONSTANT = "constant"


@dataclass(frozen=True)
class PullPolicy:
    """Strong-pull gain ``s``, strong-pull cost ``j`` and the rule choosing pull strength."""

    s: float = 1.0
    j: float = 1.0
    kind: SppKind = SppKind.FORMULA
    p: float | None = None

    def __post_init__(self):
        if not self.s >= 1.0:
            raise ConfigError(f"s must be >= 1, got {self.s}")
        if not self.j >= 1.0:
            raise ConfigError(f"j must be >= 1, got {self.j}")
        if self.kind is SppKind.CONSTANT and (self.p is None or not 0.0 <= self.p <= 1.0):
            raise ConfigError("constant pull policy needs p in [0, 1]")

    @classmethod
    def formula(cls, s: float, j: float) -> "PullPolicy":
        return cls(s, j, SppKind.FORMULA)

    @classmethod
    def strong_only(cls, s: float, j: float) -> "PullPolicy":
        return cls(s, j, SppKind.ALWAYS_STRONG)

    @classmethod
    def weak_only(cls, s: float = 1.0, j: float = 1.0) -> "PullPolicy":
        return cls(s, j, SppKind.ALWAYS_WEAK)

    @classmethod
    def constant(cls, s: float, j: float, p: float) -> "PullPolicy":
        return cls(s, j, SppKind.CONSTANT, p)


def spp_probability(policy: PullPolicy) -> float:
    """Probability that SWAP strong-pulls the chosen arm.

    The formula (s - j) / (s - 1) is clamped to [0, 1]; with s = 1 there is no
    reason to pay for a strong pull, so the probability is 0.
    """
    if policy.kind is SppKind.ALWAYS_STRONG:
        return 1.0
    if policy.kind is SppKind.ALWAYS_WEAK:
        return 0.0
    if policy.kind is SppKind.CONSTANT:
        return float(policy.p)
    if policy.s == 1.0:
        return 0.0
    return min(max((policy.s - policy.j) / (policy.s - 1.0), 0.0), 1.0)


def confidence_radius(sigma: float, n: int, cost_like: float, delta: float, info_gain: float) -> float:
    """sigma * sqrt(2 ln(4 n cost_like^3 / delta) / info_gain)."""
    return sigma * math.sqrt(2.0 * math.log(4.0 * n * cost_like**3 / delta) / info_gain)


class StopKind(enum.Enum):
    EXACT = "exact"
    PAC = "pac"


@dataclass(frozen=True)
class StoppingRule:
    """Exact stopping, or PAC stopping within ``epsilon``; both capped by ``budget_cap``."""

    kind: StopKind = StopKind.EXACT
    epsilon: float = 0.0
    budget_cap: float = DEFAULT_BUDGET_CAP

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ConfigError("epsilon must be >= 0")

    @classmethod
    def exact(cls, budget_cap: float = DEFAULT_BUDGET_CAP) -> "StoppingRule":
        return cls(StopKind.EXACT, 0.0, budget_cap)

    @classmethod
    def pac(cls, epsilon: float, budget_cap: float = DEFAULT_BUDGET_CAP) -> "StoppingRule":
        return cls(StopKind.PAC, epsilon, budget_cap)

    def holds(self, m_t: frozenset, m_tilde: frozenset, value_t: float, value_tilde: float) -> bool:
        if self.kind is StopKind.EXACT:
            return m_t == m_tilde or abs(value_tilde - value_t) <= EXACT_TOLERANCE
        return abs(value_tilde - value_t) <= self.epsilon


class Termination(enum.Enum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one run. ``trace`` lists (arm, strong) pulls after initialization."""

    cohort: tuple[int, ...]
    total_cost: float
    weak_pulls: tuple[int, ...]
    strong_pulls: tuple[int, ...]
    terminated: Termination
    seed: int
    iterations: int
    means: tuple[float, ...]
    info_gain: tuple[float, ...]
    trace: tuple[tuple[int, bool], ...] | None = field(default=None, compare=False)

    @property
    def converged(self) -> bool:
        return self.terminated is Termination.CONVERGED

    @property
    def pulled_arms(self) -> tuple[int, ...] | None:
        return None if self.trace is None else tuple(a for a, _ in self.trace)


class BanditState:
    """Empirical means, information gain and spend of a running algorithm."""

    def __init__(self, n: int):
        self.means = [0.0] * n
        self.info = [0.0] * n
        self.weak = [0] * n
        self.strong = [0] * n
        self.cost = 0.0
        self.pulls = 0

    def record(self, arm: int, strong: bool, outcome: PullOutcome) -> None:
        t_old = self.info[arm]
        gain = outcome.gain
        self.means[arm] = (self.means[arm] * t_old + gain * outcome.reward) / (t_old + gain)
        self.info[arm] = t_old + gain
        self.cost += outcome.cost
        self.pulls += 1
        if strong:
            self.strong[arm] += 1
        else:
            self.weak[arm] += 1

    def to_record(self, cohort, terminated, seed, iterations, trace) -> RunRecord:
        return RunRecord(
            cohort=tuple(sorted(cohort)),
            total_cost=self.cost,
            weak_pulls=tuple(self.weak),
            strong_pulls=tuple(self.strong),
            terminated=terminated,
            seed=seed,
            iterations=iterations,
            means=tuple(self.means),
            info_gain=tuple(self.info),
            trace=None if trace is None else tuple(trace),
        )


class _Uniforms:
    """Block-buffered U[0, 1) draws from one generator."""

    def __init__(self, rng, block: int = 512):
        self._rng = rng
        self._block = block
        self._buf = ()
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(self._block).tolist()
            self._pos = 0
        self._pos += 1
        return self._buf[self._pos - 1]


def _resolve_sigma(env, sigma: float | None) -> float:
    if sigma is None:
        sigma = getattr(env, "sigma", None)
        if sigma is None:
            raise ConfigError("sigma must be given for environments without a noise scale")
    if not sigma >= 0:
        raise ConfigError("sigma must be non-negative")
    return float(sigma)


def _check_run_args(env, dclass: DecisionClass, delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if env.n != dclass.n:
        raise ConfigError(f"environment has {env.n} arms, decision class has {dclass.n}")


def run_swap(
    env: Environment,
    dclass: DecisionClass,
    oracle: OracleKind,
    policy: PullPolicy,
    stopping: StoppingRule | None = None,
    delta: float = 0.1,
    seed: int = 0,
    sigma: float | None = None,
    record_trace: bool = False,
) -> RunRecord:
    """Run SWAP until the stopping rule certifies the empirical best cohort.

    ``sigma`` is the sub-Gaussian scale assumed by the confidence radius; it
    defaults to the environment's ``sigma``. The strong/weak coin is drawn from
    a stream derived from ``seed`` independent of the environment's rewards.

    Radius horizons: weak-only uses the pull count t, strong-only uses t * j,
    and every other policy uses the running cost.
    """
    _check_run_args(env, dclass, delta)
    if (env.s, env.j) != (policy.s, policy.j):
        raise ConfigError("environment and pull policy disagree on (s, j)")
    stopping = stopping or StoppingRule.exact()
    sigma = _resolve_sigma(env, sigma)
    best_of = make_oracle(oracle, dclass)
    value_of = value_function(dclass.objective)
    alpha = spp_probability(policy)
    coin = coin_rng(seed)
    n = dclass.n
    j = policy.j
    log_scale = 4.0 * n / delta
    horizon = policy.kind

    state = BanditState(n)
    for a in range(n):
        state.record(a, False, env.pull(a, False))
    means, info = state.means, state.info
    inv_root = [1.0 / math.sqrt(info[a]) for a in range(n)]
    arms = range(n)
    flips = _Uniforms(coin)
    trace = [] if record_trace else None
    iterations = 0

    while True:
        m_t = best_of(means)
        if horizon is SppKind.ALWAYS_WEAK:
            cost_like = float(state.pulls)
        elif horizon is SppKind.ALWAYS_STRONG:
            cost_like = state.pulls * j
        else:
            cost_like = state.cost
        root = sigma * math.sqrt(2.0 * math.log(log_scale * cost_like**3))
        rad = [root * inv_root[a] for a in arms]
        pess = [means[a] - rad[a] if a in m_t else means[a] + rad[a] for a in arms]
        m_tilde = best_of(pess)
        if m_t == m_tilde or stopping.holds(m_t, m_tilde, value_of(pess, m_t), value_of(pess, m_tilde)):
            return state.to_record(m_t, Termination.CONVERGED, seed, iterations, trace)
        if state.cost >= stopping.budget_cap:
            return state.to_record(m_t, Termination.BUDGET_EXHAUSTED, seed, iterations, trace)

        p = min(m_t ^ m_tilde, key=lambda a: (-rad[a], a))
        strong = flips.next() < alpha
        state.record(p, strong, env.pull(p, strong))
        inv_root[p] = 1.0 / math.sqrt(info[p])
        if trace is not None:
            trace.append((p, strong))
        iterations += 1


def run_clucb(
    env: Environment,
    dclass: DecisionClass,
    oracle: OracleKind,
    stopping: StoppingRule | None = None,
    delta: float = 0.1,
    seed: int = 0,
    sigma: float | None = None,
    record_trace: bool = False,
) -> RunRecord:
    """Weak-pull-only combinatorial LUCB, kept separate from :func:`run_swap`."""
    _check_run_args(env, dclass, delta)
    stopping = stopping or StoppingRule.exact()
    sigma = _resolve_sigma(env, sigma)
    best_of = make_oracle(oracle, dclass)
    n = dclass.n

    rewards_sum_mean = [0.0] * n
    counts = [0] * n
    weak = [0] * n
    for a in range(n):
        rewards_sum_mean[a] = env.pull(a, False).reward
        counts[a] = 1
        weak[a] = 1
    t = n
    trace = [] if record_trace else None

    def finish(cohort, terminated):
        return RunRecord(
            cohort=tuple(sorted(cohort)),
            total_cost=float(t),
            weak_pulls=tuple(weak),
            strong_pulls=(0,) * n,
            terminated=terminated,
            seed=seed,
            iterations=t - n,
            means=tuple(rewards_sum_mean),
            info_gain=tuple(float(c) for c in counts),
            trace=None if trace is None else tuple(trace),
        )

    while True:
        m_t = best_of(rewards_sum_mean)
        width_term = sigma * math.sqrt(2.0 * math.log(4.0 * n / delta * float(t) ** 3))
        radius = [width_term * (1.0 / math.sqrt(counts[a])) for a in range(n)]
        lower_upper = [
            rewards_sum_mean[a] - radius[a] if a in m_t else rewards_sum_mean[a] + radius[a]
            for a in range(n)
        ]
        m_tilde = best_of(lower_upper)
        w_t = dclass.value(lower_upper, m_t)
        w_tilde = dclass.value(lower_upper, m_tilde)
        if stopping.holds(m_t, m_tilde, w_t, w_tilde):
            return finish(m_t, Termination.CONVERGED)
        if t >= stopping.budget_cap:
            return finish(m_t, Termination.BUDGET_EXHAUSTED)
        candidates = sorted(m_t ^ m_tilde)
        p = candidates[0]
        for a in candidates[1:]:
            if radius[a] > radius[p]:
                p = a
        r = env.pull(p, False).reward
        rewards_sum_mean[p] = (rewards_sum_mean[p] * counts[p] + 1.0 * r) / (counts[p] + 1.0)
        counts[p] += 1
        weak[p] += 1
        t += 1
        if trace is not None:
            trace.append((p, False))


class BaselineKind(enum.Enum):
    UNIFORM = "uniform"
    RANDOM = "random"


def run_baseline(
    kind: BaselineKind,
    env: Environment,
    dclass: DecisionClass,
    oracle: OracleKind,
    seed: int = 0,
    budget: float | None = None,
) -> RunRecord:
    """Non-adaptive reference strategies.

    Uniform weak-pulls and strong-pulls every arm once. Random picks an arm and
    a pull strength uniformly at random until the next pull would overrun
    ``budget``. Both return the oracle cohort of the final empirical means.
    """
    if env.n != dclass.n:
        raise ConfigError(f"environment has {env.n} arms, decision class has {dclass.n}")
    best_of = make_oracle(oracle, dclass)
    n = dclass.n
    state = BanditState(n)
    if kind is BaselineKind.UNIFORM:
        for a in range(n):
            state.record(a, False, env.pull(a, False))
            state.record(a, True, env.pull(a, True))
        terminated = Termination.CONVERGED
    else:
        if budget is None or not budget >= 1.0:
            raise ConfigError("random baseline needs a budget of at least one weak pull")
        rng = coin_rng(seed)
        while True:
            arm = int(rng.integers(n))
            strong = bool(rng.random() < 0.5)
            if state.cost + (env.j if strong else 1.0) > budget:
                break
            state.record(arm, strong, env.pull(arm, strong))
        terminated = Termination.BUDGET_EXHAUSTED
    return state.to_record(best_of(state.means), terminated, seed, state.pulls, None)
