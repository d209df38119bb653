import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import reference
from swapcpe.difficulty import compute_gap, difficulty, hardness, top_k_gaps
from swapcpe.model import ConfigError, DecisionClass, Objective, ProblemInstance
from swapcpe.oracles import OracleKind

U = (0.6, 0.5, 0.3)


def test_example_gaps_and_hardness():
    inst = ProblemInstance(U, 0.5)
    report = difficulty(inst, DecisionClass.top_k(3, 2), OracleKind.BRUTE_FORCE)
    expected = reference.gaps(U, 2)
    assert report.gaps == pytest.approx(expected, abs=1e-12)
    assert report.gaps == pytest.approx((0.3, 0.2, 0.2), abs=1e-12)
    assert report.hardness == pytest.approx(1 / 0.09 + 2 / 0.04, rel=1e-12)
    assert report.hardness == pytest.approx(61.11, abs=0.01)
    assert report.width == 2
    # 4 * 0.25 * H
    assert report.h_tilde == pytest.approx(report.hardness, rel=1e-12)
    assert report.optimum == {0, 1}


def test_two_arm_gaps():
    assert top_k_gaps((1.0, 0.0), 1) == (1.0, 1.0)


def test_h_tilde_floor():
    report = difficulty(ProblemInstance((1.0, 0.0), 0.1), DecisionClass.top_k(2, 1),
                        OracleKind.SORT_TOP_K)
    assert report.h_tilde == 1.0


def test_tied_optimum_gives_infinite_hardness():
    report = difficulty(ProblemInstance((0.5, 0.5, 0.1), 0.5), DecisionClass.top_k(3, 1),
                        OracleKind.SORT_TOP_K)
    assert math.isinf(report.hardness)


def test_uncontested_arm_has_infinite_gap():
    dc = DecisionClass.explicit(3, [{0, 1}, {0, 2}])
    gap = compute_gap(ProblemInstance(U, 0.5), dc, 0, OracleKind.BRUTE_FORCE)
    assert math.isinf(gap)
    assert hardness([math.inf, 0.5]) == pytest.approx(4.0)


def test_zero_sigma_rejected():
    with pytest.raises(ConfigError):
        difficulty(ProblemInstance(U, 0.0), DecisionClass.top_k(3, 2), OracleKind.SORT_TOP_K)


def test_closed_form_matches_enumeration_seeded():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(2, 10)
        k = rng.randint(1, n - 1)
        u = [rng.random() for _ in range(n)]
        assert top_k_gaps(u, k) == pytest.approx(reference.gaps(u, k), abs=1e-12)


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=7, unique=True), st.data())
def test_all_oracles_give_same_linear_gaps(u, data):
    k = data.draw(st.integers(1, len(u) - 1))
    inst = ProblemInstance(tuple(u), 0.5)
    dc = DecisionClass.top_k(len(u), k)
    by_sort = [compute_gap(inst, dc, a, OracleKind.SORT_TOP_K) for a in range(len(u))]
    by_brute = [compute_gap(inst, dc, a, OracleKind.BRUTE_FORCE) for a in range(len(u))]
    assert by_sort == pytest.approx(by_brute, abs=1e-12)
    assert all(g >= 0 for g in by_sort)


@given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=7), st.data())
def test_diversity_brute_gaps_match_reference(u, data):
    n = len(u)
    k = data.draw(st.integers(1, n - 1))
    labels = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    inst = ProblemInstance(tuple(u), 0.5, tuple(labels))
    dc = DecisionClass.top_k(n, k, Objective.diversity(labels))
    got = [compute_gap(inst, dc, a, OracleKind.BRUTE_FORCE) for a in range(n)]
    assert got == pytest.approx(reference.gaps(u, k, "div", labels), abs=1e-12)
