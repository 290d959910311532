import sys
from pathlib import Path

import pytest

from sosgap.instance import Clause, Instance, NiceParams, generate_random, prune_cycles
from sosgap.pairwise import parity_distribution

sys.path.insert(0, str(Path(__file__).parent))


def make(n, clauses, k=3, signs=None):
    signs = signs or [(1,) * k] * len(clauses)
    return Instance(n, k, tuple(Clause.make(c, s) for c, s in zip(clauses, signs)))


@pytest.fixture
def path_fixture():
    # C1={1,2,3}, C2={3,4,5}, C3={5,6,7}
    return make(7, [(1, 2, 3), (3, 4, 5), (5, 6, 7)])


@pytest.fixture
def cycle_fixture():
    return make(6, [(1, 2, 3), (3, 4, 5), (1, 5, 6)])


@pytest.fixture
def parity():
    return parity_distribution(3, 1)


def pruned(n, seed, k=3, gamma=2.0):
    raw = generate_random(n, k, gamma, seed)
    return prune_cycles(raw, NiceParams(k, gamma).girth_bound(n), seed=seed)[0]


@pytest.fixture(scope="session")
def pruned60():
    return pruned(60, 1)


@pytest.fixture(scope="session")
def pruned40():
    return pruned(40, 2)
