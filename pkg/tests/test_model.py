import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from swapcpe.model import (
    ConfigError,
    DecisionClass,
    InstanceGenerator,
    Objective,
    ObjectiveKind,
    ProblemInstance,
    compute_width,
    evaluate,
)

U = (0.6, 0.5, 0.3)
LABELS = (1, 1, 2)


def test_linear_value_of_top_pair():
    assert abs(evaluate(Objective.top_k_linear(), U, {0, 1}) - 1.1) <= 1e-12


def test_diversity_values():
    div = Objective.diversity(LABELS)
    assert abs(evaluate(div, U, {0, 1}) - math.sqrt(1.1)) <= 1e-12
    assert abs(evaluate(div, U, {0, 2}) - (math.sqrt(0.6) + math.sqrt(0.3))) <= 1e-12


@pytest.mark.parametrize("objective", [
    Objective.top_k_linear(), Objective.sqrt_top_k(), Objective.diversity(LABELS)
])
def test_empty_cohort_is_zero(objective):
    assert evaluate(objective, U, set()) == 0.0


def test_sqrt_objective_clamps_negative_estimates():
    assert evaluate(Objective.sqrt_top_k(), [-0.5, 0.25], {0, 1}) == 0.5


def test_diversity_requires_labels():
    with pytest.raises(ConfigError):
        Objective(ObjectiveKind.DIVERSITY)


utilities_st = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8)


@given(utilities_st, st.data())
def test_objectives_match_reference(u, data):
    n = len(u)
    cohort = data.draw(st.sets(st.integers(0, n - 1)))
    labels = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    assert evaluate(Objective.top_k_linear(), u, cohort) == pytest.approx(
        reference.value(u, cohort), abs=1e-12)
    assert evaluate(Objective.sqrt_top_k(), u, cohort) == pytest.approx(
        reference.value(u, cohort, "sqrt"), abs=1e-12)
    assert evaluate(Objective.diversity(labels), u, cohort) == pytest.approx(
        reference.value(u, cohort, "div", labels), abs=1e-12)


@given(utilities_st, st.data())
def test_diversity_is_monotone_and_submodular(u, data):
    n = len(u)
    labels = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    small = data.draw(st.sets(st.integers(0, n - 1)))
    big = small | data.draw(st.sets(st.integers(0, n - 1)))
    extra = data.draw(st.integers(0, n - 1).filter(lambda a: a not in big))
    f = Objective.diversity(labels)
    gain_small = evaluate(f, u, small | {extra}) - evaluate(f, u, small)
    gain_big = evaluate(f, u, big | {extra}) - evaluate(f, u, big)
    assert gain_small >= -1e-12
    assert gain_small >= gain_big - 1e-12


class TestProblemInstance:
    def test_rejects_out_of_range_utilities(self):
        with pytest.raises(ConfigError):
            ProblemInstance((0.2, 1.5), 0.1)

    def test_rejects_negative_sigma(self):
        with pytest.raises(ConfigError):
            ProblemInstance((0.2, 0.5), -1.0)

    def test_label_length_checked(self):
        with pytest.raises(ConfigError):
            ProblemInstance((0.2, 0.5), 0.1, labels=(0,))

    def test_json_round_trip(self, tmp_path):
        inst = ProblemInstance(U, 0.5, LABELS)
        path = tmp_path / "inst.json"
        inst.dump(path)
        assert json.loads(path.read_text()) == {
            "n": 3, "utilities": [0.6, 0.5, 0.3], "labels": [1, 1, 2], "sigma": 0.5}
        assert ProblemInstance.load(path) == inst

    def test_n_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            ProblemInstance.from_dict({"n": 4, "utilities": [0.1, 0.2], "sigma": 0.1})


class TestGenerator:
    def test_same_seed_same_instance(self):
        gen = InstanceGenerator(8, 0.5, 0.05, n_labels=3)
        assert gen.draw(11) == gen.draw(11)
        assert gen.draw(11) != gen.draw(12)

    @settings(max_examples=50)
    @given(st.integers(2, 12), st.floats(0.0, 0.08), st.integers(0, 2**32))
    def test_separation_and_range(self, n, sep, seed):
        if (n - 1) * sep >= 1.0:
            return
        inst = InstanceGenerator(n, 0.5, sep).draw(seed)
        values = sorted(inst.utilities)
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(b - a >= sep - 1e-12 for a, b in zip(values, values[1:]))

    def test_labels_in_range(self):
        inst = InstanceGenerator(10, 0.5, 0.0, n_labels=3).draw(0)
        assert set(inst.labels) <= {0, 1, 2}

    def test_infeasible_separation(self):
        with pytest.raises(ConfigError):
            InstanceGenerator(11, 0.5, 0.1)


class TestDecisionClass:
    def test_top_k_bounds(self):
        with pytest.raises(ConfigError):
            DecisionClass.top_k(3, 3)
        with pytest.raises(ConfigError):
            DecisionClass.top_k(3, 0)

    def test_members_and_size(self):
        dc = DecisionClass.top_k(5, 2)
        members = list(dc.members())
        assert len(members) == dc.size() == 10
        assert members[0] == {0, 1}
        assert dc.contains({3, 4}) and not dc.contains({1, 2, 3})

    def test_explicit_needs_two_sets(self):
        with pytest.raises(ConfigError):
            DecisionClass.explicit(4, [{0, 1}, {1, 0}])

    def test_explicit_unknown_arm(self):
        with pytest.raises(ConfigError):
            DecisionClass.explicit(3, [{0, 1}, {2, 3}])


@pytest.mark.parametrize("dclass,expected", [
    (DecisionClass.top_k(10, 3), 2),
    (DecisionClass.explicit(4, [{0, 1}, {2, 3}]), 4),
    (DecisionClass.explicit(4, reference.all_cohorts(4, 2)), 2),
])
def test_width_examples(dclass, expected):
    assert compute_width(dclass) == expected


@given(st.lists(st.sets(st.integers(0, 5), min_size=1), min_size=2, max_size=6, unique_by=frozenset))
def test_width_matches_pairwise_scan(sets):
    dc = DecisionClass.explicit(6, sets)
    assert compute_width(dc) == reference.width([frozenset(s) for s in sets])
