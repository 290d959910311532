from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from oracles import brute_tv
from sosgap.instance import random_m_clauses
from sosgap.soundness import (
    OutputDistribution,
    assignment_distribution,
    max_deviation,
    randomize_signs,
    stat_distance,
)


def test_single_clause_outputs():
    inst = make(3, [(1, 2, 3)])
    d = assignment_distribution(inst, [1, 1, 1])
    assert d.counts == (1, 0, 0, 0, 0, 0, 0, 0)
    d = assignment_distribution(inst, [-1, 1, 1])
    assert d.counts[0b001] == 1


def test_fixture_all_ones(path_fixture):
    d = assignment_distribution(path_fixture, [1] * 7)
    assert d.counts[0] == 3 and d.m == 3


def test_stat_distance_examples():
    u = [Fraction(1, 8)] * 8
    assert stat_distance(u, u) == 0
    assert stat_distance([1] + [0] * 7) == Fraction(7, 8)
    assert stat_distance([Fraction(1, 2), Fraction(1, 2)] + [0] * 6) == Fraction(3, 4)
    with pytest.raises(ValueError):
        stat_distance([1, 0], u)


hist = st.lists(st.integers(0, 6), min_size=8, max_size=8).filter(lambda c: sum(c) > 0)


@settings(max_examples=100, deadline=None)
@given(hist, hist, hist)
def test_stat_distance_is_metric(a, b, c):
    da, db, dc = (OutputDistribution(3, tuple(x)) for x in (a, b, c))
    assert stat_distance(da, db) == stat_distance(db, da) >= 0
    assert stat_distance(da, da) == 0
    assert stat_distance(da, dc) <= stat_distance(da, db) + stat_distance(db, dc)
    assert stat_distance(da) == brute_tv(a, 3)


def test_single_clause_max_deviation():
    res = max_deviation(make(3, [(1, 2, 3)]))
    assert res.max_distance == Fraction(7, 8)


def test_complementary_copies():
    inst = make(3, [(1, 2, 3), (1, 2, 3)], signs=[(1, 1, 1), (-1, -1, -1)])
    d = assignment_distribution(inst, [1, 1, 1])
    assert stat_distance(d) == Fraction(3, 4)
    # every assignment sees two antipodal outputs
    assert max_deviation(inst).max_distance == Fraction(3, 4)


def brute_max(inst):
    best = Fraction(-1)
    for mask in range(1 << inst.n):
        x = [-1 if (mask >> i) & 1 else 1 for i in range(inst.n)]
        best = max(best, stat_distance(assignment_distribution(inst, x)))
    return best


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 20))
def test_exhaustive_matches_brute_force(seed, m):
    inst = random_m_clauses(8, 3, m, seed)
    res = max_deviation(inst)
    assert res.max_distance == brute_max(inst)
    assert stat_distance(assignment_distribution(inst, res.x)) == res.max_distance


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_exhaustive_dominates_sampled(seed):
    inst = random_m_clauses(12, 3, 48, seed)
    ex = max_deviation(inst)
    sa = max_deviation(inst, "sampled", budget=64, seed=seed)
    assert ex.max_distance >= sa.max_distance
    assert stat_distance(assignment_distribution(inst, sa.x)) == sa.max_distance


def test_report_shape():
    inst = random_m_clauses(10, 3, 40, 0)
    d = max_deviation(inst, epsilon=0.9).to_dict()
    assert set(d) >= {"mode", "n", "m", "k", "max_distance", "argmax_x", "epsilon_target", "pass"}
    assert len(d["argmax_x"]) == 10 and d["pass"] is True
    with pytest.raises(ValueError):
        max_deviation(random_m_clauses(21, 3, 5, 0))


def test_randomize_signs():
    inst = random_m_clauses(20, 3, 10_000, 0)
    a, b = randomize_signs(inst, 5), randomize_signs(inst, 5)
    assert a == b
    assert [c.vars for c in a.clauses] == [c.vars for c in inst.clauses]
    S = np.array([c.signs for c in a.clauses])
    sd = np.sqrt(10_000 * 0.25)
    for j in range(3):
        assert abs((S[:, j] == 1).sum() - 5000) <= 3 * sd
