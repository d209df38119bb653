"""Where in the (s, j) plane mixing strong and weak pulls beats both pure strategies."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from swapcpe.model import ObjectiveKind
from swapcpe.oracles import OracleKind
from swapcpe.policies import StoppingRule
from swapcpe.rng import trial_seed
from swapcpe.trials import InstanceSource, TrialSetup, run_trial

ZONE_POLICIES = ("swap", "strong", "weak")
ZONE_COLUMNS = ("s", "j", "mean_cost_swap", "mean_cost_strong", "mean_cost_weak", "class")


class Zone(enum.Enum):
    SWAP_BEST = "swap_best"
    BEATS_ONE = "beats_one"
    WORST = "worst"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ZoneCell:
    s: float
    j: float
    mean_cost_swap: float
    mean_cost_strong: float
    mean_cost_weak: float
    zone: Zone

    def row(self) -> list:
        return [self.s, self.j, self.mean_cost_swap, self.mean_cost_strong,
                self.mean_cost_weak, self.zone.value]


def classify(swap: float, strong: float, weak: float) -> Zone:
    """Compare mean costs; NaN (no converged run) makes the cell inconclusive."""
    if any(math.isnan(x) for x in (swap, strong, weak)):
        return Zone.INCONCLUSIVE
    beats_strong, beats_weak = swap < strong, swap < weak
    if beats_strong and beats_weak:
        return Zone.SWAP_BEST
    if beats_strong or beats_weak:
        return Zone.BEATS_ONE
    return Zone.WORST


def converged_mean(costs: Iterable[float]) -> float:
    costs = list(costs)
    return math.fsum(costs) / len(costs) if costs else math.nan


def optimal_zone(
    grid: Sequence[tuple[float, float]],
    source: InstanceSource,
    k: int,
    trials: int,
    seed: int,
    objective: ObjectiveKind = ObjectiveKind.TOP_K_LINEAR,
    oracle: OracleKind = OracleKind.SORT_TOP_K,
    delta: float = 0.1,
    stopping: StoppingRule | None = None,
) -> list[ZoneCell]:
    """Paired-seed comparison of general SWAP against strong-only and weak-only.

    Trial ``i`` uses the same instance and reward streams in every cell and for
    every policy, so cell differences reflect (s, j) rather than noise.
    """
    setup = TrialSetup(source, k, objective, oracle, delta, stopping or StoppingRule.exact())
    seeds = [trial_seed(seed, i) for i in range(trials)]
    grid = [(float(s), float(j)) for s, j in grid]
    results = [r for i, sd in enumerate(seeds) for r in run_trial(setup, ZONE_POLICIES, grid, i, sd)]
    return zone_cells(grid, results)


def zone_cells(grid: Sequence[tuple[float, float]], results: Iterable) -> list[ZoneCell]:
    """Aggregate trial results into one classified cell per grid point."""
    costs = {(s, j, name): [] for s, j in grid for name in ZONE_POLICIES}
    for r in results:
        key = (r.s, r.j, r.policy)
        if r.converged and key in costs:
            costs[key].append(r.cost)
    cells = []
    for s, j in grid:
        means = [converged_mean(costs[(s, j, name)]) for name in ZONE_POLICIES]
        cells.append(ZoneCell(s, j, *means, classify(*means)))
    return cells


def write_zone_csv(cells: Iterable[ZoneCell], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ZONE_COLUMNS)
        for cell in cells:
            writer.writerow(cell.row())
