"""Configured experiment sweeps: paired-seed trials over an (s, j) grid.

A config is a JSON object::

    {
      "instance": {"source": "generated", "n": 8, "k": 3, "separation": 0.05, "labels": 0},
      "objective": "top_k_linear",
      "oracle": "sort_top_k",
      "delta": 0.1, "epsilon": null, "sigma": 0.5,
      "grid": {"s": [1, 2, 5, 10], "j": [1, 2, 4]},
      "trials": 200, "seed": 0, "budget_cap": 1000000, "out": "results"
    }

``instance.source`` may also be ``"replay"`` (``path`` to a replay CSV, plus
an optional ``fallback_sigma``) or ``"file"`` (``path`` to a JSON instance).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import shutil
import statistics
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

from swapcpe import svg
from swapcpe.bounds import (
    BoundInputs,
    BoundUndefinedError,
    break_even_j,
    strong_only_bound,
    swap_bound,
    weak_only_bound,
)
from swapcpe.difficulty import difficulty
from swapcpe.environments import ReplayData, load_replay_csv
from swapcpe.model import ConfigError, InstanceGenerator, ObjectiveKind, ProblemInstance
from swapcpe.oracles import OracleKind, check_pairing
from swapcpe.policies import DEFAULT_BUDGET_CAP, StoppingRule
from swapcpe.rng import trial_seed
from swapcpe.trials import (
    POLICY_NAMES,
    TrialResult,
    TrialSetup,
    decision_class_for,
    pull_policy,
    reference_oracle,
    run_trial,
)
from swapcpe.zone import ZONE_POLICIES, Zone, write_zone_csv, zone_cells

CELL_COLUMNS = (
    "s", "j", "policy", "trials", "converged", "mean_cost", "std_cost",
    "mean_utility", "std_utility", "success_rate", "greedy_success_rate",
)
HARDNESS_COLUMNS = ("s", "j", "policy", "trial", "seed", "hardness", "cost", "bound", "converged")
SOURCES = ("generated", "replay", "file")


@dataclass(frozen=True)
class InstanceConfig:
    source: str = "generated"
    k: int = 3
    n: int = 8
    separation: float = 0.05
    labels: int = 0
    path: str | None = None
    fallback_sigma: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    objective: str = "top_k_linear"
    oracle: str | None = None
    delta: float = 0.1
    epsilon: float | None = None
    sigma: float | None = 0.5
    grid: dict = field(default_factory=lambda: {"s": [1.0], "j": [1.0]})
    trials: int = 200
    seed: int = 0
    budget_cap: float = DEFAULT_BUDGET_CAP
    out: str = "results"
    threads: int = 1
    policies: tuple[str, ...] = ZONE_POLICIES
    random_budget: float | None = None
    svg: bool = True
    base_dir: str = field(default=".", compare=False)

    # Derived views; validation has already run when these are used.

    @property
    def objective_kind(self) -> ObjectiveKind:
        return ObjectiveKind(self.objective)

    @property
    def oracle_kind(self) -> OracleKind:
        if self.oracle is not None:
            return OracleKind(self.oracle)
        if self.objective_kind is ObjectiveKind.DIVERSITY:
            return OracleKind.GREEDY
        return OracleKind.SORT_TOP_K

    @property
    def cells(self) -> list[tuple[float, float]]:
        return [(float(s), float(j)) for s in self.grid["s"] for j in self.grid["j"]]

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop("base_dir")
        data.pop("threads")  # does not affect results
        data["policies"] = list(self.policies)
        data["oracle"] = self.oracle_kind.value
        return data


def _require(cond: bool, name: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{name}: {message}")


def _number(data: dict, key: str, prefix: str = "", allow_none: bool = False):
    value = data[key]
    name = prefix + key
    if value is None:
        _require(allow_none, name, "must not be null")
        return None
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), name, "must be a number")
    _require(math.isfinite(value), name, "must be finite")
    return value


def _integer(data: dict, key: str, prefix: str = "") -> int:
    value = data[key]
    _require(isinstance(value, int) and not isinstance(value, bool), prefix + key, "must be an integer")
    return value


def config_from_dict(data: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    """Validate a parsed JSON config. Errors name the offending field."""
    _require(isinstance(data, dict), "config", "must be a JSON object")
    if isinstance(data.get("config"), dict):
        data = data["config"]  # a manifest
    known = {f for f in ExperimentConfig.__dataclass_fields__ if f != "base_dir"}
    unknown = sorted(set(data) - known)
    _require(not unknown, unknown[0] if unknown else "", "unknown field")
    defaults = ExperimentConfig()
    merged = {**{k: getattr(defaults, k) for k in known}, **data}

    inst_raw = merged["instance"]
    if isinstance(inst_raw, InstanceConfig):
        inst_raw = asdict(inst_raw)
    _require(isinstance(inst_raw, dict), "instance", "must be an object")
    inst_known = set(InstanceConfig.__dataclass_fields__)
    bad = sorted(set(inst_raw) - inst_known)
    _require(not bad, "instance." + (bad[0] if bad else ""), "unknown field")
    inst = {**asdict(InstanceConfig()), **inst_raw}
    _require(inst["source"] in SOURCES, "instance.source", f"must be one of {list(SOURCES)}")
    k = _integer(inst, "k", "instance.")
    _require(k >= 1, "instance.k", "must be >= 1")
    if inst["source"] == "generated":
        n = _integer(inst, "n", "instance.")
        _require(n >= 2, "instance.n", "must be >= 2")
        _require(k < n, "instance.k", "must be smaller than instance.n")
        sep = _number(inst, "separation", "instance.")
        _require(sep >= 0 and (n - 1) * sep < 1.0, "instance.separation",
                 "must be >= 0 with (n - 1) * separation < 1")
        labels = _integer(inst, "labels", "instance.")
        _require(labels >= 0, "instance.labels", "must be >= 0")
    else:
        _require(isinstance(inst["path"], str) and inst["path"] != "", "instance.path",
                 f"required for source {inst['source']!r}")
    if inst["source"] == "replay":
        fb = _number(inst, "fallback_sigma", "instance.", allow_none=True)
        _require(fb is None or fb >= 0, "instance.fallback_sigma", "must be >= 0")
    instance = InstanceConfig(**inst)

    objectives = [o.value for o in ObjectiveKind]
    _require(merged["objective"] in objectives, "objective", f"must be one of {objectives}")
    if merged["objective"] == ObjectiveKind.DIVERSITY.value and instance.source == "generated":
        _require(instance.labels >= 1, "instance.labels", "diversity needs at least one partition label")
    oracles = [o.value for o in OracleKind]
    _require(merged["oracle"] is None or merged["oracle"] in oracles, "oracle", f"must be one of {oracles}")

    delta = _number(merged, "delta")
    _require(0 < delta < 1, "delta", "must lie in (0, 1)")
    eps = _number(merged, "epsilon", allow_none=True)
    _require(eps is None or eps >= 0, "epsilon", "must be >= 0")
    if instance.source == "file" and "sigma" not in data:
        merged["sigma"] = None  # take it from the instance file
    sigma = _number(merged, "sigma", allow_none=True)
    _require(sigma is None or sigma >= 0, "sigma", "must be >= 0")
    _require(sigma is not None or instance.source == "file", "sigma",
             "required unless the instance file supplies one")

    grid = merged["grid"]
    _require(isinstance(grid, dict) and set(grid) == {"s", "j"}, "grid", "must be an object with keys s and j")
    for axis in ("s", "j"):
        values = grid[axis]
        _require(isinstance(values, list) and len(values) > 0, f"grid.{axis}", "must be a non-empty list")
        for v in values:
            _require(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v >= 1,
                     f"grid.{axis}", "values must be numbers >= 1")
        _require(len(set(values)) == len(values), f"grid.{axis}", "values must be distinct")

    trials = _integer(merged, "trials")
    _require(trials >= 1, "trials", "must be >= 1")
    seed = _integer(merged, "seed")
    _require(seed >= 0, "seed", "must be >= 0")
    cap = _number(merged, "budget_cap")
    _require(cap > 0, "budget_cap", "must be positive")
    _require(isinstance(merged["out"], str) and merged["out"] != "", "out", "must be a non-empty path")
    threads = _integer(merged, "threads")
    _require(threads >= 1, "threads", "must be >= 1")

    policies = merged["policies"]
    _require(isinstance(policies, (list, tuple)) and len(policies) > 0, "policies", "must be a non-empty list")
    for p in policies:
        _require(p in POLICY_NAMES, "policies", f"{p!r} is not one of {list(POLICY_NAMES)}")
    _require(len(set(policies)) == len(policies), "policies", "must not repeat")
    rb = _number(merged, "random_budget", allow_none=True)
    if "random" in policies:
        _require(rb is not None and rb >= 1, "random_budget", "required (>= 1) for the random policy")
    _require(isinstance(merged["svg"], bool), "svg", "must be true or false")

    return ExperimentConfig(
        instance=instance,
        objective=merged["objective"],
        oracle=merged["oracle"],
        delta=float(delta),
        epsilon=None if eps is None else float(eps),
        sigma=None if sigma is None else float(sigma),
        grid={"s": [float(v) for v in grid["s"]], "j": [float(v) for v in grid["j"]]},
        trials=trials,
        seed=seed,
        budget_cap=float(cap),
        out=merged["out"],
        threads=threads,
        policies=tuple(policies),
        random_budget=None if rb is None else float(rb),
        svg=merged["svg"],
        base_dir=str(base_dir),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON config (or a previously written manifest)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return config_from_dict(data, base_dir=path.parent)


def with_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Apply non-None overrides and re-validate."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return config
    data = {**config.to_dict(), "threads": config.threads, **changes}
    return config_from_dict(data, base_dir=config.base_dir)


@dataclass(frozen=True)
class _Prepared:
    setup: TrialSetup
    sigma: float


def prepare(config: ExperimentConfig) -> _Prepared:
    """Build the trial setup, loading any referenced files."""
    ic = config.instance
    objective = config.objective_kind
    replay: ReplayData | None = None
    if ic.source == "generated":
        source = InstanceGenerator(ic.n, config.sigma, ic.separation, ic.labels)
        sigma = config.sigma
    elif ic.source == "replay":
        replay = load_replay_csv(config.resolve(ic.path))
        sigma = config.sigma
        source = replay.to_instance(sigma)
    else:
        loaded = ProblemInstance.load(config.resolve(ic.path))
        sigma = loaded.sigma if config.sigma is None else config.sigma
        source = replace(loaded, sigma=sigma)
    n = source.n
    _require(1 <= ic.k < n, "instance.k", f"must satisfy 1 <= k < n = {n}")
    if objective is ObjectiveKind.DIVERSITY and ic.source != "generated":
        _require(source.labels is not None, "objective", "diversity needs labelled arms")
    probe = source.draw(0) if isinstance(source, InstanceGenerator) else source
    try:
        check_pairing(config.oracle_kind, decision_class_for(probe, ic.k, objective))
    except ConfigError as exc:
        raise ConfigError(f"oracle: {exc}") from None
    stopping = (StoppingRule.exact(config.budget_cap) if config.epsilon is None
                else StoppingRule.pac(config.epsilon, config.budget_cap))
    setup = TrialSetup(
        source=source,
        k=ic.k,
        objective=objective,
        oracle=config.oracle_kind,
        delta=config.delta,
        stopping=stopping,
        sigma=sigma,
        replay=replay,
        fallback_sigma=ic.fallback_sigma,
        random_budget=config.random_budget,
    )
    return _Prepared(setup, sigma)


def _run_one(args) -> list[TrialResult]:
    setup, policies, grid, trial, seed = args
    return run_trial(setup, policies, grid, trial, seed)


def run_trials(config: ExperimentConfig, prepared: _Prepared | None = None) -> list[TrialResult]:
    """All trial results in (trial, cell, policy) order, independent of ``threads``."""
    prepared = prepared or prepare(config)
    grid = config.cells
    jobs = [(prepared.setup, config.policies, grid, i, trial_seed(config.seed, i))
            for i in range(config.trials)]
    if config.threads <= 1 or len(jobs) == 1:
        chunks = map(_run_one, jobs)
        return [r for chunk in chunks for r in chunk]
    with ProcessPoolExecutor(max_workers=config.threads) as pool:
        return [r for chunk in pool.map(_run_one, jobs) for r in chunk]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs) if xs else math.nan


def _std(xs: Sequence[float]) -> float:
    if len(xs) < 2:
        return 0.0 if xs else math.nan
    return statistics.stdev(xs)


def cell_rows(config: ExperimentConfig, results: Sequence[TrialResult]) -> list[list]:
    """Per-(s, j, policy) aggregates, reduced in trial order."""
    groups: dict[tuple, list[TrialResult]] = {}
    for r in results:
        groups.setdefault((r.s, r.j, r.policy), []).append(r)
    rows = []
    for s, j in config.cells:
        for name in config.policies:
            rs = sorted(groups.get((s, j, name), []), key=lambda r: r.trial)
            costs = [r.cost for r in rs]
            utils = [r.utility for r in rs]
            greedy = [r.greedy_success for r in rs if r.greedy_success is not None]
            rows.append([
                s, j, name, len(rs), sum(r.converged for r in rs),
                _mean(costs), _std(costs), _mean(utils), _std(utils),
                _mean([float(r.success) for r in rs]),
                _mean([float(g) for g in greedy]) if greedy else None,
            ])
    return rows


def hardness_rows(results: Sequence[TrialResult]) -> list[list]:
    return [[r.s, r.j, r.policy, r.trial, r.seed, r.hardness, r.cost, r.bound, r.converged]
            for r in results]


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    path.write_text(buf.getvalue())


_POLICY_COLORS = dict(zip(POLICY_NAMES, svg.PALETTE))
_ZONE_COLORS = {
    Zone.SWAP_BEST: "#2ca02c",
    Zone.BEATS_ONE: "#ffdd57",
    Zone.WORST: "#d62728",
    Zone.INCONCLUSIVE: "#bbbbbb",
}


def hardness_svg(results: Sequence[TrialResult], s: float, j: float) -> str:
    """Hardness vs. cost for one grid cell, with each policy's bound as a curve."""
    series, curves = [], []
    names = list(dict.fromkeys(r.policy for r in results))
    for name in names:
        rs = [r for r in results if r.policy == name and r.s == s and r.j == j]
        color = _POLICY_COLORS.get(name, svg.PALETTE[-1])
        series.append(svg.Series(name, [(r.hardness, r.cost) for r in rs if r.converged], color))
        bound_pts = [(r.hardness, r.bound) for r in rs if not math.isnan(r.bound)]
        if bound_pts:
            curves.append(svg.Curve(f"{name} bound", bound_pts, color))
    return svg.scatter_loglog(series, curves, title=f"Hardness vs. cost (s={s:g}, j={j:g})",
                              xlabel="hardness H", ylabel="total cost")


def zone_svg(config: ExperimentConfig, cells, overlay=()) -> str:
    xs, ys = config.grid["s"], config.grid["j"]
    heat = {(c.s, c.j): svg.HeatCell(_ZONE_COLORS[c.zone]) for c in cells}
    legend = [(z.value, color) for z, color in _ZONE_COLORS.items()]
    return svg.heatmap(xs, ys, heat, title="SWAP optimal zone", xlabel="s (strong-pull gain)",
                       ylabel="j (strong-pull cost)", legend=legend, overlay=overlay)


def strong_weak_svg(config: ExperimentConfig, cells, overlay=()) -> str:
    """Cells shaded by whether strong-only beats weak-only, with the theoretical break-even j."""
    xs, ys = config.grid["s"], config.grid["j"]
    heat = {}
    for c in cells:
        if math.isnan(c.mean_cost_strong) or math.isnan(c.mean_cost_weak):
            heat[(c.s, c.j)] = svg.HeatCell("#bbbbbb")
            continue
        ratio = c.mean_cost_weak / c.mean_cost_strong
        heat[(c.s, c.j)] = svg.HeatCell("#2ca02c" if ratio > 1 else "#d62728", f"{ratio:.2f}")
    legend = [("strong cheaper", "#2ca02c"), ("weak cheaper", "#d62728")]
    return svg.heatmap(xs, ys, heat, title="Weak / strong mean cost", xlabel="s (strong-pull gain)",
                       ylabel="j (strong-pull cost)", legend=legend, overlay=overlay)


def _boundary(config: ExperimentConfig, results: Sequence[TrialResult], n: int, sigma: float):
    hs = [r.hardness for r in results if math.isfinite(r.hardness)]
    if not hs or sigma <= 0:
        return []
    h_tilde = max(4.0 * sigma**2 * statistics.median(hs), 1.0)
    return [(s, break_even_j(s, n, h_tilde, config.delta)) for s in config.grid["s"]]


def _commit(tmp: Path, out: Path) -> None:
    """Move finished files into place; a fresh output directory is renamed whole."""
    if not out.exists():
        os.replace(tmp, out)
        return
    if not out.is_dir():
        raise NotADirectoryError(f"output path {out} exists and is not a directory")
    for item in sorted(tmp.iterdir()):
        os.replace(item, out / item.name)
    tmp.rmdir()


def run_experiment(config: ExperimentConfig) -> Path:
    """Run the sweep and write all result files into ``config.out``.

    Files are assembled in a temporary sibling directory and moved into place
    only once every trial finished, so a failure leaves no partial output.
    """
    prepared = prepare(config)
    results = run_trials(config, prepared)
    out = config.resolve(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        _write_csv(tmp / "cells.csv", CELL_COLUMNS, cell_rows(config, results))
        _write_csv(tmp / "hardness.csv", HARDNESS_COLUMNS, hardness_rows(results))
        zone = None
        if all(p in config.policies for p in ZONE_POLICIES):
            zone = zone_cells(config.cells, results)
            write_zone_csv(zone, tmp / "zone.csv")
        if config.svg:
            s0, j0 = config.cells[0]
            (tmp / "hardness.svg").write_text(hardness_svg(results, s0, j0))
            if zone is not None:
                n = prepared.setup.source.n
                line = _boundary(config, results, n, prepared.sigma)
                (tmp / "zone.svg").write_text(zone_svg(config, zone, line))
                (tmp / "strong_weak.svg").write_text(strong_weak_svg(config, zone, line))
        manifest = {
            "config": config.to_dict(),
            "trial_seeds": [trial_seed(config.seed, i) for i in range(config.trials)],
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        _commit(tmp, out)
    finally:
        if tmp.exists():
            shutil.rmtree(tmp, ignore_errors=True)
    return out


def describe_instance(config: ExperimentConfig) -> str:
    """Difficulty report for the configured instance (trial 0 if generated)."""
    prepared = prepare(config)
    setup = prepared.setup
    if prepared.sigma <= 0:
        raise ConfigError("sigma: difficulty needs sigma > 0")
    source = setup.source
    instance = source.draw(trial_seed(config.seed, 0)) if isinstance(source, InstanceGenerator) else source
    instance = replace(instance, sigma=prepared.sigma)
    dclass = decision_class_for(instance, setup.k, setup.objective)
    report = difficulty(instance, dclass, reference_oracle(dclass, setup.oracle))
    lines = [
        f"arms: {instance.n}  k: {setup.k}  objective: {setup.objective.value}  sigma: {prepared.sigma:g}",
        "utilities: " + ", ".join(f"{u:.6g}" for u in instance.utilities),
        "optimum: {" + ", ".join(str(a) for a in sorted(report.optimum)) + "}",
        "gaps: " + ", ".join(f"{g:.6g}" for g in report.gaps),
        f"hardness H: {report.hardness:.6g}",
        f"width: {report.width}",
        f"H_tilde: {report.h_tilde:.6g}",
    ]
    if not math.isfinite(report.h_tilde):
        lines.append("bounds: undefined (a gap is zero, so hardness is infinite)")
        return "\n".join(lines) + "\n"
    lines.append("s\tj\tweak_bound\tstrong_bound\tswap_bound")
    for s, j in config.cells:
        def bound(name, fn):
            inputs = BoundInputs.for_policy(pull_policy(name, s, j), instance.n, config.delta,
                                            prepared.sigma, report.h_tilde)
            try:
                return f"{fn(inputs):.6g}"
            except BoundUndefinedError:
                return "undefined"

        lines.append(f"{s:g}\t{j:g}\t{bound('weak', weak_only_bound)}\t"
                     f"{bound('strong', strong_only_bound)}\t{bound('swap', swap_bound)}")
    return "\n".join(lines) + "\n"
