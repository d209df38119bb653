"""Seed derivation shared by environments, policies and the experiment harness.

Every trial is identified by one integer seed. Independent streams are split
off it with fixed spawn keys so that, e.g., changing the pull policy never
perturbs the reward draws of a paired comparison.
"""

from __future__ import annotations

import numpy as np

REWARD_KEY = 0
COIN_KEY = 1
INSTANCE_KEY = 2


def _sequence(seed: int, key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(key,))


def reward_sequences(seed: int, n_arms: int) -> list[np.random.SeedSequence]:
    """One child sequence per arm, so the k-th pull of an arm is fixed by the seed."""
    return _sequence(seed, REWARD_KEY).spawn(n_arms)


def coin_rng(seed: int) -> np.random.Generator:
    """Generator for the strong/weak coin and baseline arm choices."""
    return np.random.default_rng(_sequence(seed, COIN_KEY))


def instance_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, INSTANCE_KEY))


def trial_seed(base_seed: int, trial: int) -> int:
    """Deterministic 63-bit seed for trial number ``trial`` of an experiment."""
    state = np.random.SeedSequence([int(base_seed), int(trial)]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
