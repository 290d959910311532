"""Exact rational linear algebra: pivoted LDL^T, RREF, min-norm solves."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

ZERO = Fraction(0)


def to_fractions(M) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in M]


def is_symmetric(M) -> bool:
    n = len(M)
    return all(len(row) == n for row in M) and all(M[i][j] == M[j][i] for i in range(n) for j in range(i + 1, n))


def quad_form(M, v) -> Fraction:
    n = len(M)
    total = ZERO
    for i in range(n):
        if not v[i]:
            continue
        row = M[i]
        acc = ZERO
        for j in range(n):
            if v[j] and row[j]:
                acc += row[j] * v[j]
        total += v[i] * acc
    return total


def mat_vec(M, v) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, v) if a and b), ZERO) for row in M]


@dataclass
class LDLResult:
    psd: bool
    pivots: list[Fraction] = field(default_factory=list)
    order: list[int] = field(default_factory=list)
    rank: int = 0
    witness: list[Fraction] | None = None
    value: Fraction | None = None

    def to_dict(self) -> dict:
        d = {
            "psd": self.psd,
            "rank": self.rank,
            "pivot_order": self.order,
            "pivots": [str(p) for p in self.pivots],
        }
        if self.witness is not None:
            d["witness"] = [str(x) for x in self.witness]
            d["value"] = str(self.value)
        return d


def ldl_pivoted(M) -> LDLResult:
    """Symmetric LDL^T with greedy diagonal pivoting over the rationals.

    At each step the largest remaining diagonal entry is eliminated (ties
    to the lowest index). PSD iff every pivot is positive and the remaining
    Schur complement is exactly zero. On failure a vector v with
    v^T M v < 0 is returned.
    """
    A = to_fractions(M)
    if not is_symmetric(A):
        raise ValueError("matrix is not symmetric")
    n = len(A)
    remaining = list(range(n))
    order, pivots = [], []
    while remaining:
        p = max(remaining, key=lambda i: (A[i][i], -i))
        d = A[p][p]
        neg = next((i for i in remaining if A[i][i] < 0), None)
        if neg is not None:
            return _fail(M, order, remaining, {neg: Fraction(1)}, pivots)
        if d == 0:
            for a in remaining:
                for b in remaining:
                    if a < b and A[a][b] != 0:
                        sgn = 1 if A[a][b] > 0 else -1
                        u = {a: Fraction(1), b: Fraction(-sgn)}
                        return _fail(M, order, remaining, u, pivots)
            return LDLResult(True, pivots, order, len(order))
        order.append(p)
        pivots.append(d)
        remaining.remove(p)
        col = {i: A[i][p] for i in remaining if A[i][p]}
        for i, ai in col.items():
            f = ai / d
            row_i = A[i]
            for j, aj in col.items():
                row_i[j] -= f * aj
    return LDLResult(True, pivots, order, len(order))


def _simple_witness(M):
    """A negative direction supported on one or two coordinates, if any."""
    n = len(M)
    for i in range(n):
        if M[i][i] < 0:
            v = [ZERO] * n
            v[i] = Fraction(1)
            return v
    for i in range(n):
        for j in range(i + 1, n):
            if M[i][j] and M[i][i] + M[j][j] < 2 * abs(M[i][j]):
                v = [ZERO] * n
                v[i] = Fraction(1)
                v[j] = Fraction(-1 if M[i][j] > 0 else 1)
                return v
    return None


def _fail(M, order, remaining, u, pivots) -> LDLResult:
    """Witness for a failed factorization.

    Prefers a direction on one or two coordinates; otherwise lifts the
    Schur-complement witness u on ``remaining`` to a full vector.
    """
    M = to_fractions(M)
    n = len(M)
    simple = _simple_witness(M)
    if simple is not None:
        return LDLResult(False, pivots, order, len(order), simple, quad_form(M, simple))
    v = [ZERO] * n
    for i, x in u.items():
        v[i] = x
    if order:
        # v_P = -M[P,P]^{-1} M[P,rest] u
        rhs = [-sum((M[p][i] * x for i, x in u.items()), ZERO) for p in order]
        sub = [[M[p][q] for q in order] for p in order]
        sol = solve_square(sub, rhs)
        for p, x in zip(order, sol):
            v[p] = x
    val = quad_form(M, v)
    assert val < 0, "lifted witness is not negative"
    return LDLResult(False, pivots, order, len(order), v, val)


def solve_square(A, b) -> list[Fraction]:
    """Solve a nonsingular square system exactly."""
    n = len(A)
    aug = [list(map(Fraction, A[i])) + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[i][n] for i in range(n)]


def rref(A) -> tuple[list[list[Fraction]], list[int]]:
    R = to_fractions(A)
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def nullspace(A) -> list[list[Fraction]]:
    R, pivots = rref(A)
    cols = len(A[0]) if A else 0
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][f]
        basis.append(v)
    return basis


class InconsistentSystem(ValueError):
    pass


def min_norm_solve(A, b) -> tuple[list[Fraction], int]:
    """Minimum Euclidean-norm solution of a consistent system A x = b.

    Returns the solution and the kernel dimension of A.
    """
    n = len(A)
    cols = len(A[0]) if n else 0
    aug = [list(map(Fraction, A[i])) + [Fraction(b[i])] for i in range(n)]
    R, pivots = rref(aug)
    if cols in pivots:
        raise InconsistentSystem("right-hand side not in the column space")
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        x[pc] = R[r][cols]
    N = nullspace(A)
    if N:
        # x <- x - N (N^T N)^{-1} N^T x
        gram = [[sum((a * b for a, b in zip(u, v)), ZERO) for v in N] for u in N]
        rhs = [sum((a * b for a, b in zip(u, x)), ZERO) for u in N]
        y = solve_square(gram, rhs)
        for coef, u in zip(y, N):
            if coef:
                x = [xi - coef * ui for xi, ui in zip(x, u)]
    return x, len(N)


def min_eigenvalue(M) -> float:
    if len(M) == 0:
        return float("inf")
    F = np.array([[float(x) for x in row] for row in M], dtype=float)
    return float(np.linalg.eigvalsh(F).min())
