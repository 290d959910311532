"""The pseudo-expectation operator, moment matrices and PSD certificates."""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .closure import DEFAULT_RADIUS, compute_closure
from .errors import BudgetExceeded, ParameterError
from .instance import INF, Clause, Instance, NiceParams, girth
from .linalg import LDLResult, is_symmetric, ldl_pivoted, min_eigenvalue, quad_form
from .localdist import TABLE_BUDGET, nu_closed
from .pairwise import PairwiseDist
from .reports import Report

MATRIX_BUDGET = 2000


def key(S) -> tuple[int, ...]:
    return tuple(sorted(set(S)))


def set_order(S) -> tuple:
    """(size, lexicographic) order used for matrix indices."""
    return (len(S), tuple(S))


class PseudoExpectation:
    """E~[chi_S] = E over nu_{cl(S)} of chi_S, memoized."""

    def __init__(self, inst: Instance, mu: PairwiseDist, d: int = 2, s: int | None = None,
                 radius: int = DEFAULT_RADIUS, table_budget: int = TABLE_BUDGET):
        if mu.k != inst.k:
            raise ParameterError(f"mu has arity {mu.k}, instance has {inst.k}")
        self.inst = inst
        self.mu = mu
        self.d = d
        self.s = 2 * d + inst.k if s is None else s
        self.radius = radius
        self.table_budget = table_budget
        self.memo: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
        self._lock = threading.Lock()

    def char(self, S) -> Fraction:
        S = key(S)
        hit = self.memo.get(S)
        if hit is not None:
            return hit
        if len(S) > self.s:
            raise ParameterError(f"|S| = {len(S)} exceeds degree cap {self.s}")
        cl = compute_closure(self.inst, S, self.radius, max_vars=max(self.table_budget, len(S)))
        val = nu_closed(self.inst, self.mu, cl, self.table_budget).expect_char(S)
        with self._lock:
            self.memo.setdefault(S, val)
        return val

    def poly(self, p: dict) -> Fraction:
        return sum((Fraction(c) * self.char(S) for S, c in p.items() if c), Fraction(0))

    def inner(self, p: dict, q: dict) -> Fraction:
        return self.poly(poly_mul(p, q))


def pe_char(pe: PseudoExpectation, S) -> Fraction:
    return pe.char(S)


def pe_poly(pe: PseudoExpectation, p: dict) -> Fraction:
    return pe.poly(p)


def poly_mul(p: dict, q: dict) -> dict:
    """Product of multilinear polynomials under x_j^2 = 1 (monomials multiply by symmetric difference)."""
    out: dict[tuple, Fraction] = {}
    for S, a in p.items():
        if not a:
            continue
        sS = set(S)
        for T, b in q.items():
            if not b:
                continue
            U = key(sS.symmetric_difference(T))
            out[U] = out.get(U, Fraction(0)) + Fraction(a) * Fraction(b)
    return {U: c for U, c in out.items() if c}


def poly_add(*terms) -> dict:
    """Sum of (coefficient, polynomial) pairs."""
    out: dict[tuple, Fraction] = {}
    for c, p in terms:
        for S, a in p.items():
            out[key(S)] = out.get(key(S), Fraction(0)) + Fraction(c) * Fraction(a)
    return {S: a for S, a in out.items() if a}


def clause_indicator(clause: Clause, y: int) -> dict:
    """Multilinear expansion of 1[C(x) = y], y a bitmask over clause positions.

    C(x)_j = sigma_j x_{v_j}, so 1[C(x) = y] = prod_j (1 + sigma_j y_j x_{v_j}) / 2.
    """
    k = clause.k
    out = {}
    for J in range(1 << k):
        coef = Fraction(1, 1 << k)
        S = []
        for j in range(k):
            if (J >> j) & 1:
                yj = -1 if (y >> j) & 1 else 1
                coef *= clause.signs[j] * yj
                S.append(clause.vars[j])
        out[tuple(S)] = coef
    return out


def check_completeness(pe: PseudoExpectation, clause: Clause | int) -> Report:
    """E~[1[C(x) = y]] = mu(y) for every y in {+-1}^k."""
    if isinstance(clause, int):
        clause = pe.inst.clauses[clause]
    bad = None
    values = {}
    for y in range(1 << clause.k):
        val = pe.poly(clause_indicator(clause, y))
        values[y] = val
        if val != pe.mu[y] and bad is None:
            bad = {"y": y, "pseudo": val, "mu": pe.mu[y]}
    return Report(
        "completeness",
        "fail" if bad else "pass",
        inputs={"clause": {"vars": list(clause.vars), "signs": list(clause.signs)}},
        witness=bad,
        details={"values": {str(y): v for y, v in values.items()}},
    )


def check_completeness_all(pe: PseudoExpectation) -> Report:
    viol = []
    for ci in range(pe.inst.m):
        r = check_completeness(pe, ci)
        if not r.ok:
            viol.append({"clause": ci, **r.witness})
    return Report("completeness", "fail" if viol else "pass", inputs={"clauses": pe.inst.m},
                  witness=viol[0] if viol else None, trials=pe.inst.m, violations=viol)


# -- moment matrices ------------------------------------------------------


@dataclass
class MomentMatrix:
    index: list[tuple[int, ...]]
    entries: list[list[Fraction]]

    def __len__(self):
        return len(self.index)

    def position(self) -> dict:
        return {S: i for i, S in enumerate(self.index)}

    def submatrix(self, sets) -> list[list[Fraction]]:
        pos = self.position()
        ids = [pos[key(S)] for S in sets]
        return [[self.entries[i][j] for j in ids] for i in ids]

    def to_dict(self) -> dict:
        return {"index": [list(S) for S in self.index], "entries": [[str(x) for x in row] for row in self.entries]}


def sets_up_to(vars, d: int) -> list[tuple[int, ...]]:
    vars = sorted(set(vars))
    out = []
    for r in range(d + 1):
        out.extend(itertools.combinations(vars, r))
    return sorted(out, key=set_order)


def gram(pe: PseudoExpectation, sets) -> list[list[Fraction]]:
    sets = [key(S) for S in sets]
    n = len(sets)
    M = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        si = set(sets[i])
        for j in range(i, n):
            v = pe.char(si.symmetric_difference(sets[j]))
            M[i][j] = M[j][i] = v
    return M


def build_moment_matrix(pe: PseudoExpectation, d: int, vars=None, budget: int = MATRIX_BUDGET) -> MomentMatrix:
    if 2 * d > pe.s:
        raise ParameterError(f"2d = {2 * d} exceeds degree cap {pe.s}")
    if vars is None:
        vars = range(1, pe.inst.n + 1)
    vars = sorted(set(vars))
    rows = sum(math.comb(len(vars), r) for r in range(d + 1))
    if rows > budget:
        raise BudgetExceeded(f"moment matrix would have {rows} rows (budget {budget})")
    index = sets_up_to(vars, d)
    return MomentMatrix(index, gram(pe, index))


def _entries(M):
    return M.entries if isinstance(M, MomentMatrix) else M


def check_psd_exact(M) -> LDLResult:
    return ldl_pivoted(_entries(M))


@dataclass
class FloatPSD:
    psd: bool
    min_eigenvalue: float
    tol: float
    exact: LDLResult | None = None
    agree: bool | None = None

    def to_dict(self) -> dict:
        d = {"psd": self.psd, "min_eigenvalue": self.min_eigenvalue, "tol": self.tol}
        if self.exact is not None:
            d["exact_psd"] = self.exact.psd
            d["agree"] = self.agree
        return d


def check_psd_float(M, tol: float = 1e-9, cross_check_limit: int = 200) -> FloatPSD:
    E = _entries(M)
    lam = min_eigenvalue(E)
    res = FloatPSD(lam >= -tol or len(E) == 0, lam if len(E) else math.inf, tol)
    if len(E) <= cross_check_limit:
        res.exact = check_psd_exact(E)
        res.agree = res.exact.psd == res.psd
    return res


def check_local_psd(pe: PseudoExpectation, T, trials: int = 100, seed: int = 0) -> Report:
    """Gram matrix of {chi_A : A subset of T} is PSD, and E~[f^2] >= 0 for random f on T."""
    T = key(T)
    if len(T) > pe.s:
        raise ParameterError(f"|T| = {len(T)} exceeds degree cap {pe.s}")
    sets = sets_up_to(T, len(T))
    G = gram(pe, sets)
    ldl = check_psd_exact(G)
    rng = np.random.default_rng(seed)
    viol = []
    for _ in range(trials):
        coeffs = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, len(sets)), rng.integers(1, 10, len(sets)))]
        val = quad_form(G, coeffs)
        if val < 0:
            viol.append({"coeffs": coeffs, "value": val})
    failed = not ldl.psd or bool(viol)
    return Report(
        "local-psd",
        "fail" if failed else "pass",
        inputs={"T": T, "trials": trials, "seed": seed},
        witness=(ldl.to_dict() if not ldl.psd else viol[0]) if failed else None,
        trials=trials,
        violations=viol,
        details={"gram_size": len(sets), "rank": ldl.rank},
    )


def poly_square_value(pe: PseudoExpectation, p: dict) -> Fraction:
    return pe.poly(poly_mul(p, p))


# -- degree presets -------------------------------------------------------


def degree_presets(inst: Instance, params: NiceParams) -> dict:
    """Degree values prescribed by the two asymptotic formulas, for reporting only."""
    n, k = inst.n, inst.k
    g = girth(inst)
    eta_n = params.eta * n
    return {
        "girth_preset": {"girth": "inf" if g == INF else int(g),
                         "d": "inf" if g == INF else math.sqrt(g) / (100 * k)},
        "expansion_preset": {"d": eta_n / (10000 * k), "s": eta_n / 6},
    }


def is_valid_moment_matrix(M: MomentMatrix) -> bool:
    E = M.entries
    return is_symmetric(E) and all(E[i][i] == 1 for i in range(len(E)))

