from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from oracles import brute_marginal, brute_nu, mu_as_tuples
from sosgap.closure import closure_vars
from sosgap.errors import NormalizationError, PreconditionError
from sosgap.localdist import (
    check_consistency,
    check_disjoint_product,
    check_union_factorization,
    enumerate_bridges,
    nu_closed,
    nu_of,
    peel_order,
    product_table,
    propagation_oracle,
    search_union_counterexample,
)
from sosgap.pairwise import PairwiseDist, builtin_mu


def chain(m):
    """Loose path of m 3-clauses on 2m+1 variables."""
    return make(2 * m + 1, [(i, i + 1, i + 2) for i in range(1, 2 * m, 2)])


def as_dict(table):
    """Table -> {+-1 tuple over sorted vars: prob}."""
    out = {}
    for mask, p in enumerate(table.probs()):
        out[tuple(-1 if (mask >> i) & 1 else 1 for i in range(len(table.vars)))] = p
    return out


def test_single_clause_is_mu(parity):
    inst = make(3, [(1, 2, 3)])
    nu = nu_closed(inst, parity, (1, 2, 3))
    assert nu.Z == 1
    assert nu.probs() == list(parity.probs)


def test_isolated_pair_uniform(parity):
    inst = make(5, [(3, 4, 5)])
    nu = nu_closed(inst, parity, (1, 2))
    assert nu.Z == Fraction(1, 4)
    assert nu.probs() == [Fraction(1, 4)] * 4


def test_fixture_full_domain(path_fixture, parity):
    nu = nu_closed(path_fixture, parity, range(1, 8))
    assert nu.Z == 4
    nz = [p for p in nu.probs() if p]
    assert len(nz) == 16 and set(nz) == {Fraction(1, 16)}
    dom, ref = brute_nu(path_fixture, mu_as_tuples(parity), range(1, 8))
    assert as_dict(nu) == ref
    assert nu.marginal([1]).probs() == [Fraction(1, 2)] * 2
    assert nu.marginal([1, 2, 3]).probs() == list(parity.probs)
    assert nu.marginal(range(1, 8)).same_as(nu)


def test_biased_mu_fails_normalization(path_fixture):
    probs = [Fraction(0)] * 8
    probs[0] = Fraction(1)
    bad = PairwiseDist(3, tuple(probs))
    with pytest.raises(NormalizationError):
        nu_closed(path_fixture, bad, range(1, 8))


def test_correlated_mu_with_uniform_singletons_still_normalizes(path_fixture):
    # on a tree only the one-variable marginals matter for normalization
    probs = [Fraction(0)] * 8
    probs[0] = probs[7] = Fraction(1, 2)
    assert nu_closed(path_fixture, PairwiseDist(3, tuple(probs)), range(1, 8)).total() == 1


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.sampled_from([1, -1]), st.sampled_from([1, -1]), st.sampled_from([1, -1])), min_size=3, max_size=3),
    st.sampled_from(["uniform", "parity+", "parity-"]),
)
def test_tables_match_brute_force(signs, name):
    inst = make(7, [(1, 2, 3), (3, 4, 5), (5, 6, 7)], signs=signs)
    mu = builtin_mu(name, 3)
    for dom in [(1, 2, 3), (1, 2, 3, 4, 5), tuple(range(1, 8)), (1, 2, 3, 6)]:
        d, ref = brute_nu(inst, mu_as_tuples(mu), dom)
        assert as_dict(product_table(inst, mu, dom)) == ref
        for T in [(1,), (2, 4), (1, 3, 5)]:
            T = [v for v in T if v in dom]
            assert as_dict(product_table(inst, mu, dom).marginal(T)) == brute_marginal(d, ref, T)


def test_consistency_examples(path_fixture, parity):
    assert check_consistency(path_fixture, parity, {1, 3}, {1, 3}).ok
    assert check_consistency(path_fixture, parity, {1, 3}, {1, 3, 5}).ok
    assert check_consistency(path_fixture, parity, {1}, range(1, 8)).ok
    with pytest.raises(PreconditionError):
        check_consistency(path_fixture, parity, {1, 4}, {1})


def test_consistency_random_pruned(pruned40, parity):
    rng = np.random.default_rng(0)
    done = 0
    for _ in range(400):
        B = set(rng.choice(np.arange(1, 41), size=int(rng.integers(2, 5)), replace=False).tolist())
        if len(closure_vars(pruned40, B, max_vars=10**6)) > 20:
            continue
        A = set(rng.choice(sorted(B), size=int(rng.integers(1, len(B) + 1)), replace=False).tolist())
        rep = check_consistency(pruned40, parity, A, B)
        assert rep.ok, rep.witness
        done += 1
        if done == 200:
            break
    assert done == 200


def test_disjoint_product_examples(parity):
    # first and last clause are 5 hops apart: each and their union are 3-closed
    inst = chain(7)
    rep = check_disjoint_product(inst, parity, {1, 2, 3}, {13, 14, 15})
    assert rep.ok
    assert check_disjoint_product(inst, parity, {4}, {12}).ok
    with pytest.raises(PreconditionError):
        check_disjoint_product(inst, parity, {1, 2, 3}, {5, 6, 7})
    with pytest.raises(PreconditionError):
        check_disjoint_product(inst, parity, {1, 2, 3}, {3, 4, 5})


def test_bridges_far_sets_empty(parity):
    bs = enumerate_bridges(chain(7), {1, 2, 3}, {13, 14, 15}, 3)
    assert bs.bridges == [] and bs.bridge_closures == []


def test_single_bridge(path_fixture, parity):
    bs = enumerate_bridges(path_fixture, {1, 2, 3}, {5, 6, 7}, 3)
    assert [p.edges for p in bs.bridges] == [(1,)]
    assert bs.bridge_closures == []
    assert not bs.claim_violations
    rep = check_union_factorization(path_fixture, parity, {1, 2, 3}, {5, 6, 7}, 100)
    assert rep.ok
    assert rep.details["extra_clauses"] == [1]
    assert rep.details["bridge_claim"]["enforced"] and rep.details["bridge_claim"]["holds"]


def test_bridge_precondition(path_fixture):
    with pytest.raises(PreconditionError):
        enumerate_bridges(path_fixture, {1, 5}, {7}, 3)


def test_union_far_sets_reduce_to_product(parity):
    rep = check_union_factorization(chain(7), parity, {1, 2, 3}, {13, 14, 15}, 100)
    assert rep.ok and rep.details["extra_clauses"] == []


def test_union_random_pruned(pruned40, parity):
    from sosgap.suites import random_closed_pairs

    pairs = list(random_closed_pairs(pruned40, 50, 3, ball_R=3))
    assert len(pairs) == 50
    for A, B in pairs:
        rep = check_union_factorization(pruned40, parity, A, B, 3)
        assert rep.ok, rep.witness


def test_peel_order(path_fixture):
    assert peel_order(path_fixture, {1, 2}, {1, 2}).order == []
    p = peel_order(path_fixture, {3}, {1, 2, 3})
    assert p.order == [0] and p.parts == [frozenset({1, 2})]
    B = closure_vars(path_fixture, {1, 2, 3, 4, 5})
    p = peel_order(path_fixture, {1, 2, 3}, B)
    assert p.order == [1] and p.parts == [frozenset({4, 5})]
    with pytest.raises(PreconditionError):
        peel_order(path_fixture, {1, 9}, {1})


def test_oracle_matches_formula(path_fixture, parity):
    nu = nu_closed(path_fixture, parity, range(1, 8))
    for seed in range(5):
        assert propagation_oracle(path_fixture, parity, range(1, 8), np.random.default_rng(seed)).same_as(nu)
    assert propagation_oracle(path_fixture, parity, range(1, 8)).same_as(nu)


def test_oracle_rejects_cycles(cycle_fixture, parity):
    with pytest.raises(PreconditionError):
        propagation_oracle(cycle_fixture, parity, range(1, 7))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["uniform", "parity+", "parity-"]))
def test_oracle_on_random_forests(seed, name):
    from sosgap.instance import prune_cycles, random_m_clauses

    inst, _ = prune_cycles(random_m_clauses(10, 3, 6, seed), 12)
    mu = builtin_mu(name, 3)
    rng = np.random.default_rng(seed)
    dom = sorted(closure_vars(inst, rng.choice(np.arange(1, 11), size=3, replace=False).tolist(), max_vars=10**6))
    assert propagation_oracle(inst, mu, dom, rng).same_as(nu_closed(inst, mu, dom))


def test_nu_of_marginalizes(path_fixture, parity):
    assert nu_of(path_fixture, parity, {1, 3}).vars == (1, 3)
    assert nu_of(path_fixture, parity, {1, 3}).probs() == [Fraction(1, 4)] * 4


def test_counterexample_search_runs():
    rep = search_union_counterexample(trials=30, seed=1)
    assert rep.status in ("pass", "fail")
    assert rep.trials > 0
    # a reported hit must come with a checkable witness
    for hit in rep.violations:
        assert "witness" in hit
