"""Ordering of low-degree sets, local projections and the orthogonal family chi~."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .closure import DEFAULT_RADIUS, ball_radius, closure_vars, compute_closure
from .errors import BudgetExceeded, PreconditionError
from .instance import INF, Instance, components, distance
from .linalg import ldl_pivoted, min_norm_solve
from .pseudo import PseudoExpectation, gram, key, poly_mul
from .reports import Report

ORDER_BUDGET = 120
CLOSURE_CAP = 10_000


class SetOrdering:
    """The order A_0 < A_1 < ... on sets of size <= d.

    Sets compare by (clause indices of cl(A) sorted descending, |A|, sorted
    elements), lexicographically at each tier.
    """

    def __init__(self, inst: Instance, d: int, sets=None, radius: int = DEFAULT_RADIUS, restricted: bool = False):
        self.inst = inst
        self.d = d
        self.radius = radius
        self.restricted = restricted
        self._keys: dict[tuple, tuple] = {}
        self.sets: list[tuple[int, ...]] = sorted((key(S) for S in sets or ()), key=self.key)
        self.position = {S: i for i, S in enumerate(self.sets)}

    def clause_key(self, A) -> tuple[int, ...]:
        cl = compute_closure(self.inst, A, self.radius, max_vars=CLOSURE_CAP)
        return tuple(sorted(cl.clauses, reverse=True))

    def key(self, A) -> tuple:
        A = key(A)
        k = self._keys.get(A)
        if k is None:
            k = (self.clause_key(A), len(A), A)
            self._keys[A] = k
        return k

    def precedes(self, A, B) -> bool:
        return self.key(A) < self.key(B)

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, i) -> tuple[int, ...]:
        return self.sets[i]

    def to_dict(self) -> dict:
        return {"d": self.d, "restricted": self.restricted,
                "sets": [list(S) for S in self.sets],
                "clause_keys": [list(self.key(S)[0]) for S in self.sets]}


def build_ordering(inst: Instance, d: int, budget: int = ORDER_BUDGET, family=None) -> SetOrdering:
    """Order every set of size <= d, or only ``family`` (restricted mode)."""
    if family is not None:
        fam = {key(S) for S in family}
        if any(len(S) > d for S in fam):
            raise PreconditionError(f"family contains sets larger than d = {d}")
        return SetOrdering(inst, d, fam, restricted=True)
    total = sum(math.comb(inst.n, r) for r in range(d + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} sets of size <= {d} exceed the ordering budget {budget}")
    sets = itertools.chain.from_iterable(itertools.combinations(range(1, inst.n + 1), r) for r in range(d + 1))
    return SetOrdering(inst, d, sets)


def _as_set(ordering: SetOrdering, i) -> tuple[int, ...]:
    return ordering.sets[i] if isinstance(i, int) else key(i)


def local_space(inst: Instance, ordering: SetOrdering, i, R: int | None = None) -> list[tuple[int, ...]]:
    """All B inside cl_R(A_i) with |B| <= d and B < A_i, in order."""
    A = _as_set(ordering, i)
    if R is None:
        R = ball_radius(inst)
    ball = sorted(closure_vars(inst, A, R, max_vars=CLOSURE_CAP))
    kA = ordering.key(A)
    out = []
    for r in range(ordering.d + 1):
        for B in itertools.combinations(ball, r):
            if ordering.key(B) < kA:
                out.append(B)
    return sorted(out, key=ordering.key)


@dataclass
class Projection:
    set: tuple[int, ...]
    space: list[tuple[int, ...]]
    coeffs: dict  # chi-bar in the basis of the local space
    kernel_dim: int


def project(pe: PseudoExpectation, ordering: SetOrdering, i, R: int | None = None, check_gram: bool = False) -> Projection:
    """Minimum-norm solution of the normal equations G c = b on the local space."""
    A = _as_set(ordering, i)
    V = local_space(pe.inst, ordering, A, R)
    if not V:
        return Projection(A, V, {}, 0)
    G = gram(pe, V)
    if check_gram:
        ldl = ldl_pivoted(G)
        if not ldl.psd:
            raise PreconditionError(f"local Gram matrix for {list(A)} is not PSD")
    b = [pe.char(set(A).symmetric_difference(B)) for B in V]
    c, kdim = min_norm_solve(G, b)
    return Projection(A, V, {B: x for B, x in zip(V, c) if x}, kdim)


@dataclass
class OrthoEntry:
    set: tuple[int, ...]
    coeffs: dict  # chi~ = sum coeffs[B] chi_B, with coeffs[set] = 1
    space: list[tuple[int, ...]]
    norm2: Fraction
    kernel_dim: int = 0

    def to_dict(self) -> dict:
        return {
            "set": list(self.set),
            "coeffs": {json.dumps(list(B)): str(c) for B, c in sorted(self.coeffs.items(), key=lambda t: (len(t[0]), t[0]))},
            "norm2": str(self.norm2),
            "support": len(self.coeffs),
            "kernel_dim": self.kernel_dim,
        }


@dataclass
class OrthoBasis:
    entries: list[OrthoEntry]
    d: int
    radius: int
    restricted: bool = False
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {e.set: i for i, e in enumerate(self.entries)}

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> OrthoEntry:
        return self.entries[i]

    @property
    def kernel_flags(self) -> list[tuple[int, ...]]:
        return [e.set for e in self.entries if e.kernel_dim]

    def to_list(self) -> list:
        return [e.to_dict() for e in self.entries]

    def to_dict(self) -> dict:
        return {"d": self.d, "radius": self.radius, "restricted": self.restricted,
                "kernel_nontrivial": [list(S) for S in self.kernel_flags], "basis": self.to_list()}


def orthogonalize_all(pe: PseudoExpectation, ordering: SetOrdering, R: int | None = None, check_gram: bool = False) -> OrthoBasis:
    if R is None:
        R = ball_radius(pe.inst)
    entries = []
    for A in ordering.sets:
        proj = project(pe, ordering, A, R, check_gram)
        coeffs = {B: -c for B, c in proj.coeffs.items()}
        coeffs[A] = Fraction(1)
        entries.append(OrthoEntry(A, coeffs, proj.space, pe.inner(coeffs, coeffs), proj.kernel_dim))
    return OrthoBasis(entries, ordering.d, R, ordering.restricted)


def perturb(basis: OrthoBasis, i: int, B=None, delta=Fraction(1, 7)) -> OrthoBasis:
    """Copy of the basis with one coefficient of chi~_i shifted (negative control)."""
    e = basis.entries[i]
    if B is None:
        B = e.space[-1] if e.space else e.set
    coeffs = dict(e.coeffs)
    coeffs[key(B)] = coeffs.get(key(B), Fraction(0)) + delta
    entries = list(basis.entries)
    entries[i] = replace(e, coeffs=coeffs)
    return OrthoBasis(entries, basis.d, basis.radius, basis.restricted)


def cross(pe: PseudoExpectation, coeffs: dict, S) -> Fraction:
    """E~[p * chi_S] for p given by coefficients over characters."""
    S = set(S)
    return sum((c * pe.char(S.symmetric_difference(B)) for B, c in coeffs.items() if c), Fraction(0))


# -- verification ---------------------------------------------------------


def verify_local_orthogonality(pe: PseudoExpectation, basis: OrthoBasis, i: int) -> Report:
    e = basis.entries[i]
    bad = None
    for B in e.space:
        v = cross(pe, e.coeffs, B)
        if v:
            bad = {"B": B, "value": v}
            break
    return Report("local-orthogonality", "fail" if bad else "pass", inputs={"i": i, "set": e.set, "space": len(e.space)}, witness=bad)


def verify_span(pe: PseudoExpectation, ordering: SetOrdering, basis: OrthoBasis, i: int | None = None) -> Report:
    """Change of basis chi~ -> chi restricted to indices <= i is unit-triangular."""
    if i is None:
        i = len(basis) - 1
    bad = None
    for r in range(i + 1):
        e = basis.entries[r]
        if e.coeffs.get(e.set) != 1:
            bad = {"row": r, "reason": "diagonal", "value": e.coeffs.get(e.set)}
            break
        kA = ordering.key(e.set)
        late = [B for B, c in e.coeffs.items() if c and B != e.set and not ordering.key(B) < kA]
        if late:
            bad = {"row": r, "reason": "support after A_i", "sets": late}
            break
    return Report("equal-spans", "fail" if bad else "pass", inputs={"i": i}, witness=bad,
                  details={"rank": i + 1 if bad is None else None})


def _coefficient_matrix(basis: OrthoBasis) -> np.ndarray:
    n = len(basis)
    C = np.full((n, n), Fraction(0), dtype=object)
    for r, e in enumerate(basis.entries):
        for B, c in e.coeffs.items():
            C[r, basis.index[B]] = c
    return C


def _full_support(basis: OrthoBasis) -> bool:
    return all(B in basis.index for e in basis.entries for B in e.coeffs)


def _cross_matrix(pe: PseudoExpectation, basis: OrthoBasis) -> np.ndarray:
    """X[i, j] = E~[chi~_i chi_{A_j}]."""
    sets = [e.set for e in basis.entries]
    if _full_support(basis):
        C = _coefficient_matrix(basis)
        G = np.array(gram(pe, sets), dtype=object)
        return C.dot(G)
    n = len(sets)
    X = np.full((n, n), Fraction(0), dtype=object)
    for i, e in enumerate(basis.entries):
        for j, S in enumerate(sets):
            X[i, j] = cross(pe, e.coeffs, S)
    return X


def verify_global_orthogonality(pe: PseudoExpectation, ordering: SetOrdering, basis: OrthoBasis, R: int | None = None) -> Report:
    """E~[chi~_i chi_j] = 0 for all j < i; on failure report the boundary decomposition."""
    if R is None:
        R = basis.radius
    X = _cross_matrix(pe, basis)
    viol = []
    for i in range(len(basis)):
        for j in range(i):
            if X[i, j] != 0:
                viol.append((i, j))
    witness = None
    if viol:
        i, j = viol[0]
        A, B = basis.entries[i].set, basis.entries[j].set
        witness = {"i": i, "j": j, "A": A, "B": B, "value": X[i, j],
                   "decomposition": decompose_boundary(pe.inst, ordering, A, B, R).to_dict()}
    return Report("global-orthogonality", "fail" if viol else "pass",
                  inputs={"sets": len(basis), "restricted": basis.restricted, "radius": R},
                  witness=witness, trials=len(basis) * (len(basis) - 1) // 2, violations=viol)


def verify_full_orthogonality(pe: PseudoExpectation, basis: OrthoBasis) -> Report:
    """E~[chi~_i chi~_j] = 0 for i != j, and E~[chi~_i^2] >= 0."""
    n = len(basis)
    if _full_support(basis):
        C = _coefficient_matrix(basis)
        P = _cross_matrix(pe, basis).dot(C.T)
    else:
        P = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            for j in range(i, n):
                P[i, j] = P[j, i] = pe.inner(basis.entries[i].coeffs, basis.entries[j].coeffs)
    viol = [(i, j) for i in range(n) for j in range(i + 1, n) if P[i, j] != 0]
    negative = [i for i in range(n) if P[i, i] < 0]
    mism = [i for i in range(n) if P[i, i] != basis.entries[i].norm2]
    failed = bool(viol or negative or mism)
    witness = None
    if viol:
        witness = {"pair": viol[0], "value": P[viol[0]]}
    elif negative or mism:
        witness = {"negative_norm": negative[:5], "norm_mismatch": mism[:5]}
    return Report("full-orthogonality", "fail" if failed else "pass", inputs={"sets": n},
                  witness=witness, violations=viol,
                  details={"zero_norm": [basis.entries[i].set for i in range(n) if P[i, i] == 0]})


def check_psd_reconstruction(pe: PseudoExpectation, basis: OrthoBasis, trials: int = 20, seed: int = 0) -> Report:
    """E~[p^2] = sum c_i^2 E~[chi~_i^2] >= 0 for random p = sum c_i chi~_i."""
    rng = np.random.default_rng(seed)
    viol = []
    for _ in range(trials):
        c = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-5, 6, len(basis)), rng.integers(1, 6, len(basis)))]
        p: dict = {}
        for ci, e in zip(c, basis.entries):
            if not ci:
                continue
            for B, x in e.coeffs.items():
                p[B] = p.get(B, Fraction(0)) + ci * x
        direct = pe.poly(poly_mul(p, p))
        via = sum((ci * ci * e.norm2 for ci, e in zip(c, basis.entries)), Fraction(0))
        if direct != via or direct < 0:
            viol.append({"direct": direct, "diagonal": via})
    return Report("psd-reconstruction", "fail" if viol else "pass", inputs={"trials": trials, "seed": seed},
                  witness=viol[0] if viol else None, trials=trials, violations=viol)


# -- boundary decomposition -----------------------------------------------


@dataclass
class BoundaryDecomposition:
    A: tuple
    B: tuple
    B_in: frozenset
    B_out: frozenset
    B_bdy: frozenset
    B_rest: frozenset
    boundary_clauses: dict
    size_ok: bool
    ordering_ok: bool | None  # None when the claim does not apply
    ordering_witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.size_ok and self.ordering_ok is not False

    def to_dict(self) -> dict:
        return {
            "A": list(self.A), "B": list(self.B),
            "B_in": sorted(self.B_in), "B_out": sorted(self.B_out),
            "B_bdy": sorted(self.B_bdy), "B_rest": sorted(self.B_rest),
            "boundary_clauses": {str(x): cs for x, cs in sorted(self.boundary_clauses.items())},
            "size_claim": self.size_ok, "ordering_claim": self.ordering_ok,
            "ordering_witness": None if self.ordering_witness is None else list(self.ordering_witness),
        }


def decompose_boundary(inst: Instance, ordering: SetOrdering, A, B, R: int | None = None, subset_cap: int = 12) -> BoundaryDecomposition:
    if R is None:
        R = ball_radius(inst)
    A, B = key(A), key(B)
    clR = closure_vars(inst, A, R, max_vars=CLOSURE_CAP)
    clB = compute_closure(inst, B, ordering.radius, max_vars=CLOSURE_CAP)
    bdy: dict[int, list[int]] = {}
    for ci in clB.clauses:
        meet = inst.clause_sets[ci] & clR
        if len(meet) == 1:
            (x,) = meet
            bdy.setdefault(x, []).append(ci)
    Bs = set(B)
    B_out = Bs - clR
    B_bdy = set(bdy)
    B_in = Bs - B_out - B_bdy
    B_rest = Bs - B_out - B_in
    size_ok = len(B_bdy | B_in) <= len(Bs)
    ordering_ok, wit = None, None
    if B_out and ordering.precedes(B, A):
        pool = sorted(B_bdy | B_in)
        if len(pool) > subset_cap:
            ordering_ok = False
            wit = tuple(pool)
        else:
            ordering_ok = True
            kA = ordering.key(A)
            for r in range(len(pool) + 1):
                for S in itertools.combinations(pool, r):
                    if not ordering.key(S) < kA:
                        ordering_ok, wit = False, S
                        break
                if not ordering_ok:
                    break
    return BoundaryDecomposition(A, B, frozenset(B_in), frozenset(B_out), frozenset(B_bdy), frozenset(B_rest),
                                 bdy, size_ok, ordering_ok, wit)


def check_boundary_claims(inst: Instance, ordering: SetOrdering, trials: int, seed: int = 0, R: int | None = None) -> Report:
    """Claims size and ordering on random pairs (A, B) with B < A."""
    rng = np.random.default_rng(seed)
    d = ordering.d
    viol = []
    applied = 0
    for _ in range(trials):
        pair = []
        for _ in range(2):
            size = int(rng.integers(1, d + 1))
            pair.append(tuple(sorted(rng.choice(np.arange(1, inst.n + 1), size=size, replace=False).tolist())))
        A, B = pair
        if ordering.precedes(A, B):
            A, B = B, A
        dec = decompose_boundary(inst, ordering, A, B, R)
        applied += dec.ordering_ok is not None
        if not dec.ok:
            viol.append(dec.to_dict())
    return Report("boundary-claims", "fail" if viol else "pass", inputs={"trials": trials, "seed": seed},
                  witness=viol[0] if viol else None, trials=trials, violations=viol,
                  details={"ordering_claim_applicable": applied})


def check_long_dist_edges(inst: Instance, component, U, R: int) -> Report:
    """A connected clause set whose vertices U are pairwise > R apart has >= |U| R / 2 clauses."""
    comp = sorted(set(component))
    U = sorted(set(U))
    if len(U) < 2:
        raise PreconditionError("need |U| >= 2")
    sub = inst.subinstance(comp)
    verts = set().union(*(sub.clause_sets)) if comp else set()
    if not set(U) <= verts:
        raise PreconditionError("U must lie on the component")
    if len(components(sub, verts)) != 1:
        raise PreconditionError("clause set is not connected")
    for u, v in itertools.combinations(U, 2):
        dist = distance(sub, u, v)
        if dist != INF and dist <= R:
            raise PreconditionError(f"vertices {u}, {v} are at distance {dist} <= R = {R}")
    ok = len(comp) >= Fraction(len(U) * R, 2)
    return Report("long-distance-edges", "pass" if ok else "fail",
                  inputs={"clauses": len(comp), "U": U, "R": R},
                  witness=None if ok else {"clauses": len(comp), "needed": Fraction(len(U) * R, 2)})
