"""Closed-form upper bounds on the total cost of SWAP and its special cases.

All bounds carry the explicit constant 499 from the non-asymptotic proofs, so
they sit far above empirical costs; compare them on log-log axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from swapcpe.model import ConfigError
from swapcpe.policies import PullPolicy, spp_probability

BOUND_CONSTANT = 499.0


class BoundUndefinedError(ValueError):
    """The expected information gain minus its deviation term is not positive."""


@dataclass(frozen=True)
class BoundInputs:
    """Parameters shared by every cost bound.

    ``delta`` is the confidence used inside the radius; ``delta2`` and
    ``delta3`` only control the cost and gain deviation terms. ``alpha`` is
    the strong-pull probability. ``t_ref`` is the horizon at which the cost
    deviation is evaluated (defaults to the weak-only bound).
    """

    n: int
    delta: float
    sigma: float
    h_tilde: float
    s: float = 1.0
    j: float = 1.0
    alpha: float = 0.0
    delta2: float | None = None
    delta3: float | None = None
    t_ref: float | None = None
    sigma_cost: float | None = None
    sigma_gain: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be positive")
        for name in ("delta", "delta2", "delta3"):
            value = getattr(self, name)
            if value is not None and not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if not self.h_tilde >= 1.0:
            raise ConfigError("h_tilde must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.s < 1.0 or self.j < 1.0:
            raise ConfigError("s and j must be >= 1")

    @classmethod
    def for_policy(cls, policy: PullPolicy, n: int, delta: float, sigma: float,
                   h_tilde: float, **kwargs) -> "BoundInputs":
        return cls(n=n, delta=delta, sigma=sigma, h_tilde=h_tilde, s=policy.s, j=policy.j,
                   alpha=spp_probability(policy), **kwargs)

    @property
    def x_cost(self) -> float:
        """Expected cost of one pull."""
        return self.alpha * self.j + (1.0 - self.alpha)

    @property
    def x_gain(self) -> float:
        """Expected information gain of one pull."""
        return self.alpha * self.s + (1.0 - self.alpha)

    @property
    def eps1(self) -> float:
        delta2 = self.delta if self.delta2 is None else self.delta2
        t_ref = weak_only_bound(self) if self.t_ref is None else self.t_ref
        scale = self.sigma if self.sigma_cost is None else self.sigma_cost
        return scale * math.sqrt(2.0 * math.log(2.0 / delta2) / t_ref)

    @property
    def eps2(self) -> float:
        delta3 = self.delta if self.delta3 is None else self.delta3
        scale = self.sigma if self.sigma_gain is None else self.sigma_gain
        return scale * math.sqrt(2.0 * math.log(2.0 / delta3) / self.n)


def weak_only_bound(inputs: BoundInputs) -> float:
    h = inputs.h_tilde
    return BOUND_CONSTANT * h * math.log(4.0 * inputs.n * h / inputs.delta) + 2.0 * inputs.n


def strong_only_bound(inputs: BoundInputs) -> float:
    h = inputs.h_tilde
    log_term = math.log(4.0 * inputs.n * inputs.j**3 * h / inputs.delta)
    return BOUND_CONSTANT * h * log_term / inputs.s + 2.0 * inputs.n


def swap_bound(inputs: BoundInputs, eps1: float | None = None, eps2: float | None = None) -> float:
    """General bound with expected cost/gain shifted by their deviation terms.

    Pass ``eps1=0, eps2=0`` to evaluate at the expectations.

    Raises:
        BoundUndefinedError: if ``x_gain - eps2 <= 0``.
    """
    eps1 = inputs.eps1 if eps1 is None else eps1
    eps2 = inputs.eps2 if eps2 is None else eps2
    denominator = inputs.x_gain - eps2
    if denominator <= 0:
        raise BoundUndefinedError(
            f"expected gain {inputs.x_gain:.4g} does not exceed deviation {eps2:.4g}"
        )
    h = inputs.h_tilde
    log_term = math.log(4.0 * inputs.n * (inputs.x_cost + eps1) ** 3 * h / inputs.delta)
    return BOUND_CONSTANT * h * log_term / denominator + 2.0 * inputs.n


def break_even_j(s: float, n: int, h_tilde: float, delta: float) -> float:
    """Largest strong-pull cost j at which strong-only is guaranteed no worse than weak-only."""
    c = 4.0 * n * h_tilde / delta
    return c ** ((s - 1.0) / 3.0)
