import math
from decimal import Decimal, getcontext

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from swapcpe.environments import GaussianEnvironment
from swapcpe.model import ConfigError, DecisionClass, InstanceGenerator, Objective
from swapcpe.oracles import OracleKind
from swapcpe.policies import (
    BanditState,
    BaselineKind,
    PullPolicy,
    StoppingRule,
    Termination,
    confidence_radius,
    run_baseline,
    run_clucb,
    run_swap,
    spp_probability,
)

U = (0.6, 0.5, 0.3)
TOP2 = DecisionClass.top_k(3, 2)
SORT = OracleKind.SORT_TOP_K


@pytest.mark.parametrize("s,j,expected", [(6, 6, 0.0), (6, 1, 1.0), (6, 3, 0.6), (2, 4, 0.0), (1, 1, 0.0)])
def test_formula_spp(s, j, expected):
    assert spp_probability(PullPolicy.formula(s, j)) == pytest.approx(expected, abs=1e-15)


def test_fixed_spp_kinds():
    assert spp_probability(PullPolicy.strong_only(3, 2)) == 1.0
    assert spp_probability(PullPolicy.weak_only(3, 2)) == 0.0
    assert spp_probability(PullPolicy.constant(3, 2, 0.25)) == 0.25
    with pytest.raises(ConfigError):
        PullPolicy.constant(3, 2, 1.5)


@given(st.floats(1.0, 50.0), st.floats(1.0, 50.0))
def test_spp_in_unit_interval(s, j):
    assert 0.0 <= spp_probability(PullPolicy.formula(s, j)) <= 1.0


def test_radius_constructed_example():
    assert confidence_radius(1.0, 1, 1.0, 4 / math.e, 2.0) == pytest.approx(1.0, abs=1e-15)


def test_radius_high_precision():
    getcontext().prec = 50
    arg = Decimal(4) * 10 * Decimal(10) ** 6 / Decimal("0.1")
    expected = Decimal("0.5") * (2 * arg.ln() / 5).sqrt()
    assert confidence_radius(0.5, 10, 100.0, 0.1, 5.0) == pytest.approx(float(expected), rel=1e-14)


@given(st.floats(0.01, 2.0), st.integers(1, 50), st.floats(1.0, 1e6), st.floats(0.5, 1e4))
def test_doubling_gain_divides_radius_by_root_two(sigma, n, cost, gain):
    a = confidence_radius(sigma, n, cost, 0.1, gain)
    b = confidence_radius(sigma, n, cost, 0.1, 2 * gain)
    assert b == pytest.approx(a / math.sqrt(2), rel=1e-12)


def test_stopping_rules():
    exact, pac = StoppingRule.exact(), StoppingRule.pac(0.05)
    a, b = frozenset({0, 1}), frozenset({0, 2})
    assert exact.holds(a, a, 0.3, 0.9)
    assert not exact.holds(a, b, 1.0, 1.1)
    assert pac.holds(a, b, 1.0, 1.04)
    assert not pac.holds(a, b, 1.0, 1.06)


def test_example_cost_accounting():
    # arm a3 needs 10 units of information, strong pulls give 5 for cost 3
    s, j, need = 5, 3, 10
    env = GaussianEnvironment(U, 0.0, s=s, j=j)
    state = BanditState(3)
    while state.info[2] < need:
        state.record(2, True, env.pull(2, strong=True))
    assert state.strong[2] == math.ceil(need / s) == 2
    assert state.cost == 6


@pytest.mark.parametrize("s,j", [(1, 1), (2, 4), (5, 2), (10, 1), (6, 3)])
@pytest.mark.parametrize("seed", range(5))
def test_noiseless_runs_find_optimum(s, j, seed):
    env = GaussianEnvironment(U, 0.0, s=s, j=j, seed=seed)
    rec = run_swap(env, TOP2, SORT, PullPolicy.formula(s, j), seed=seed, sigma=0.5)
    assert rec.converged
    assert set(rec.cohort) == reference.best(U, 2)


def test_zero_sigma_stops_after_initialization():
    env = GaussianEnvironment(U, 0.0)
    rec = run_swap(env, TOP2, SORT, PullPolicy.weak_only())
    assert rec.total_cost == 3 and rec.iterations == 0 and rec.cohort == (0, 1)


def _env(seed, s=1, j=1, n=6):
    inst = InstanceGenerator(n, 0.5, 0.08).draw(seed)
    return inst, GaussianEnvironment.from_instance(inst, s, j, seed)


@pytest.mark.parametrize("seed", range(10))
def test_clucb_trace_matches_always_weak(seed):
    _, env_a = _env(seed)
    _, env_b = _env(seed)
    dc = DecisionClass.top_k(6, 2)
    a = run_clucb(env_a, dc, SORT, seed=seed, record_trace=True)
    b = run_swap(env_b, dc, SORT, PullPolicy.weak_only(), seed=seed, record_trace=True)
    assert a.trace == b.trace
    assert a == b


@pytest.mark.parametrize("seed", range(5))
def test_formula_with_equal_s_and_j_is_weak_only(seed):
    _, env_a = _env(seed, 4, 4)
    _, env_b = _env(seed, 4, 4)
    dc = DecisionClass.top_k(6, 2)
    a = run_swap(env_a, dc, SORT, PullPolicy.formula(4, 4), seed=seed, record_trace=True)
    b = run_swap(env_b, dc, SORT, PullPolicy.weak_only(4, 4), seed=seed, record_trace=True)
    assert a.trace == b.trace


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(1, 1), (3, 2), (5, 2), (10, 1), (2, 4)]))
def test_cost_and_info_accounting(seed, sj):
    s, j = sj
    _, env = _env(seed, s, j, n=5)
    dc = DecisionClass.top_k(5, 2)
    rec = run_swap(env, dc, SORT, PullPolicy.formula(s, j), seed=seed, record_trace=True)
    n_strong = sum(strong for _, strong in rec.trace)
    n_weak = len(rec.trace) - n_strong
    assert rec.total_cost == pytest.approx(5 + n_weak + j * n_strong)
    assert sum(rec.weak_pulls) == 5 + n_weak
    assert sum(rec.strong_pulls) == n_strong
    for a in range(5):
        assert rec.info_gain[a] == pytest.approx(rec.weak_pulls[a] + s * rec.strong_pulls[a])
    assert rec.converged and len(rec.cohort) == 2


def test_same_seed_same_record():
    dc = DecisionClass.top_k(6, 2)
    recs = [run_swap(_env(4, 5, 2)[1], dc, SORT, PullPolicy.formula(5, 2), seed=4) for _ in range(2)]
    assert recs[0] == recs[1]


def test_budget_cap():
    _, env = _env(1)
    rec = run_swap(env, DecisionClass.top_k(6, 2), SORT, PullPolicy.weak_only(),
                   StoppingRule.exact(budget_cap=20))
    assert rec.terminated is Termination.BUDGET_EXHAUSTED
    assert rec.total_cost == 20


@pytest.mark.parametrize("seed", range(5))
def test_pac_never_costs_more(seed):
    dc = DecisionClass.top_k(6, 2)
    exact = run_swap(_env(seed)[1], dc, SORT, PullPolicy.weak_only(), seed=seed)
    pac = run_swap(_env(seed)[1], dc, SORT, PullPolicy.weak_only(), StoppingRule.pac(0.01), seed=seed)
    assert pac.total_cost <= exact.total_cost


def test_mismatched_policy_rejected():
    env = GaussianEnvironment(U, 0.1, s=2, j=2)
    with pytest.raises(ConfigError):
        run_swap(env, TOP2, SORT, PullPolicy.formula(3, 2))


def test_bad_delta_rejected():
    with pytest.raises(ConfigError):
        run_swap(GaussianEnvironment(U, 0.1), TOP2, SORT, PullPolicy.weak_only(), delta=1.0)


def test_diversity_run_with_greedy():
    labels = (0, 0, 1, 1, 2)
    dc = DecisionClass.top_k(5, 2, Objective.diversity(labels))
    env = GaussianEnvironment((0.9, 0.8, 0.3, 0.2, 0.5), 0.0, s=3, j=2)
    rec = run_swap(env, dc, OracleKind.GREEDY, PullPolicy.formula(3, 2), sigma=0.3)
    assert rec.converged and set(rec.cohort) == {0, 4}


def test_uniform_baseline_cost():
    env = GaussianEnvironment([0.5] * 10, 0.1, s=3, j=6)
    rec = run_baseline(BaselineKind.UNIFORM, env, DecisionClass.top_k(10, 3), SORT)
    assert rec.total_cost == 70
    assert rec.weak_pulls == rec.strong_pulls == (1,) * 10


@given(st.floats(1.0, 300.0), st.integers(0, 1000))
@settings(max_examples=25)
def test_random_baseline_spends_floor_budget(budget, seed):
    env = GaussianEnvironment(U, 0.1, s=2, j=1)
    rec = run_baseline(BaselineKind.RANDOM, env, TOP2, SORT, seed=seed, budget=budget)
    assert rec.total_cost == math.floor(budget)
    assert rec.terminated is Termination.BUDGET_EXHAUSTED


def test_random_baseline_never_overruns():
    env = GaussianEnvironment(U, 0.1, s=2, j=5)
    rec = run_baseline(BaselineKind.RANDOM, env, TOP2, SORT, seed=3, budget=101)
    assert 96 < rec.total_cost <= 101


def test_random_baseline_needs_budget():
    env = GaussianEnvironment(U, 0.1)
    with pytest.raises(ConfigError):
        run_baseline(BaselineKind.RANDOM, env, TOP2, SORT, budget=0.5)
