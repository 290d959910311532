from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sosgap.linalg import InconsistentSystem, ldl_pivoted, mat_vec, min_eigenvalue, min_norm_solve, nullspace, quad_form


def test_identity():
    r = ldl_pivoted([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert r.psd and r.pivots == [1, 1, 1] and r.rank == 3
    assert min_eigenvalue([[1, 0], [0, 1]]) == pytest.approx(1)


def test_two_by_two_indefinite():
    r = ldl_pivoted([[1, 2], [2, 1]])
    assert not r.psd
    assert r.witness == [1, -1] and r.value == -2


def test_zero_matrix():
    r = ldl_pivoted([[0, 0], [0, 0]])
    assert r.psd and r.rank == 0
    assert min_eigenvalue([[0, 0], [0, 0]]) == 0


def test_singular_psd():
    r = ldl_pivoted([[1, 1], [1, 1]])
    assert r.psd and r.rank == 1


def test_zero_diagonal_offdiagonal_nonzero():
    r = ldl_pivoted([[0, 1], [1, 0]])
    assert not r.psd and r.value < 0


def test_lifted_witness():
    # every 2x2 principal minor is fine, but the 3x3 matrix is indefinite
    M = [[2, 1, 1], [1, 2, -1], [1, -1, Fraction(1, 2)]]
    r = ldl_pivoted(M)
    assert not r.psd
    assert quad_form(M, r.witness) == r.value < 0
    assert len([x for x in r.witness if x]) == 3


def test_asymmetric_rejected():
    with pytest.raises(ValueError):
        ldl_pivoted([[1, 2], [0, 1]])


small_ints = st.integers(-3, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_ldl_agrees_with_eigenvalues(rows):
    n = len(rows)
    B = np.array(rows, dtype=float)
    for M in (B + B.T, B @ B.T):
        F = [[Fraction(int(round(x))) for x in row] for row in M]
        r = ldl_pivoted(F)
        lam = np.linalg.eigvalsh(M).min()
        if abs(lam) > 1e-9:
            assert r.psd == (lam > 0)
        if not r.psd:
            assert quad_form(F, r.witness) == r.value < 0
        else:
            assert r.rank == np.linalg.matrix_rank(M)
    assert n >= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n)), st.data())
def test_min_norm_solve(rows, data):
    A = np.array(rows, dtype=float)
    G = A @ A.T
    F = [[Fraction(int(round(x))) for x in row] for row in G]
    z = [Fraction(data.draw(small_ints)) for _ in rows]
    b = mat_vec(F, z)
    x, kdim = min_norm_solve(F, b)
    assert mat_vec(F, x) == b
    assert kdim == len(nullspace(F)) == len(rows) - np.linalg.matrix_rank(G)
    ref = np.linalg.pinv(G) @ np.array([float(v) for v in b])
    assert np.allclose([float(v) for v in x], ref, atol=1e-8)


def test_inconsistent():
    with pytest.raises(InconsistentSystem):
        min_norm_solve([[1, 0], [0, 0]], [1, 1])
