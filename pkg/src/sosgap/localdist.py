"""Local distributions nu on closed sets and the identities they satisfy.

Tables are dense over {+-1}^vars. Assignment x is a bitmask whose bit p is
set iff the p-th smallest variable of the table equals -1. Probabilities
are stored as ``weights * scale`` with integer weights and a Fraction
scale, so every comparison stays exact.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .closure import DEFAULT_RADIUS, ClosedSet, compute_closure, is_closed, iter_paths, path_vertices
from .errors import BudgetExceeded, NormalizationError, PreconditionError
from .instance import INF, HyperPath, Instance, girth
from .pairwise import PairwiseDist, sign_mask
from .reports import Report

TABLE_BUDGET = 24
_INT64_SAFE = 2**62


def _bits(size: int) -> np.ndarray:
    return np.arange(1 << size, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Table:
    vars: tuple[int, ...]
    weights: np.ndarray
    scale: Fraction

    def __len__(self):
        return len(self.vars)

    @property
    def position(self) -> dict[int, int]:
        return {v: p for p, v in enumerate(self.vars)}

    def prob(self, mask: int) -> Fraction:
        return int(self.weights[mask]) * self.scale

    def prob_of(self, assignment: dict) -> Fraction:
        mask = sum(1 << p for p, v in enumerate(self.vars) if assignment[v] == -1)
        return self.prob(mask)

    def probs(self) -> list[Fraction]:
        return [int(w) * self.scale for w in self.weights.tolist()]

    def total(self) -> Fraction:
        return int(self.weights.sum()) * self.scale

    def marginal(self, T) -> "Table":
        T = tuple(sorted(set(T)))
        pos = self.position
        missing = [v for v in T if v not in pos]
        if missing:
            raise PreconditionError(f"variables {missing} are outside the table domain")
        v = len(self.vars)
        if not v:
            return self
        arr = self.weights.reshape((2,) * v)
        keep_axes = {v - 1 - pos[x] for x in T}
        drop = tuple(a for a in range(v) if a not in keep_axes)
        out = arr.sum(axis=drop) if drop else arr
        return Table(T, np.ascontiguousarray(out).reshape(-1), self.scale)

    def expect_char(self, S) -> Fraction:
        """E[prod_{v in S} x_v]."""
        pos = self.position
        idx = _bits(len(self.vars))
        par = np.zeros_like(idx)
        for v in S:
            if v not in pos:
                raise PreconditionError(f"variable {v} outside the table domain")
            par ^= (idx >> pos[v]) & 1
        w = self.weights
        return (int(w[par == 0].sum()) - int(w[par == 1].sum())) * self.scale

    def first_difference(self, other: "Table"):
        """None if equal as exact distributions, else (mask, p_self, p_other)."""
        if self.vars != other.vars:
            return (None, self.vars, other.vars)
        a = self.scale.numerator * other.scale.denominator
        b = other.scale.numerator * self.scale.denominator
        lhs = self.weights.astype(object) * a
        rhs = other.weights.astype(object) * b
        diff = np.nonzero(lhs != rhs)[0]
        if len(diff) == 0:
            return None
        i = int(diff[0])
        return (i, self.prob(i), other.prob(i))

    def same_as(self, other: "Table") -> bool:
        return self.first_difference(other) is None

    def product(self, other: "Table") -> "Table":
        """Independent product over disjoint variable sets."""
        if set(self.vars) & set(other.vars):
            raise PreconditionError("product of tables with overlapping domains")
        U = tuple(sorted(self.vars + other.vars))
        pu = {v: p for p, v in enumerate(U)}
        idx = _bits(len(U))
        ia = np.zeros_like(idx)
        for p, v in enumerate(self.vars):
            ia |= ((idx >> pu[v]) & 1) << p
        ib = np.zeros_like(idx)
        for p, v in enumerate(other.vars):
            ib |= ((idx >> pu[v]) & 1) << p
        wa = self.weights.astype(object) if self.weights.dtype == object else self.weights
        w = wa[ia] * other.weights[ib]
        return Table(U, w, self.scale * other.scale)

    def to_dict(self) -> dict:
        return {"vars": list(self.vars), "probs": [str(p) for p in self.probs()]}


def table_from_probs(vars, probs) -> Table:
    """Build a Table from exact probabilities (common denominator)."""
    probs = [Fraction(p) for p in probs]
    den = lcm(*[p.denominator for p in probs]) if probs else 1
    w = np.array([int(p * den) for p in probs], dtype=object)
    if all(abs(int(x)) < _INT64_SAFE for x in w):
        w = w.astype(np.int64)
    return Table(tuple(vars), w, Fraction(1, den))


@dataclass(frozen=True, eq=False)
class LocalDistribution(Table):
    clauses: tuple[int, ...] = ()
    k: int = 0

    @property
    def Z(self) -> Fraction:
        return Fraction(2) ** (self.k * len(self.clauses) - len(self.vars))


def mu_weights(mu: PairwiseDist) -> tuple[list[int], int]:
    den = lcm(*[p.denominator for p in mu.probs])
    return [int(p * den) for p in mu.probs], den


def product_table(inst: Instance, mu: PairwiseDist, vars, budget: int = TABLE_BUDGET) -> LocalDistribution:
    """Z_U * prod_{C in C(U)} mu_C(x_C) over U = vars, with Z_U = 2^{k|C(U)| - |U|}.

    No normalization is asserted here; see ``nu_closed``.
    """
    U = tuple(sorted(set(vars)))
    if len(U) > budget:
        raise BudgetExceeded(f"table over {len(U)} variables exceeds budget {budget}")
    clauses = inst.induced_clauses(U)
    w_mu, den = mu_weights(mu)
    pos = {v: p for p, v in enumerate(U)}
    idx = _bits(len(U))
    bound = (1 << len(U)) * max(w_mu) ** len(clauses)
    dtype = np.int64 if bound < _INT64_SAFE else object
    weights = np.ones(1 << len(U), dtype=dtype)
    wtab = np.array(w_mu, dtype=dtype)
    for ci in clauses:
        c = inst.clauses[ci]
        code = np.zeros_like(idx)
        for j, v in enumerate(c.vars):
            code |= ((idx >> pos[v]) & 1) << j
        code ^= sign_mask(c)
        weights = weights * wtab[code]
    Z = Fraction(2) ** (inst.k * len(clauses) - len(U))
    return LocalDistribution(U, weights, Z / Fraction(den) ** len(clauses), clauses, inst.k)


def nu_closed(inst: Instance, mu: PairwiseDist, domain, budget: int = TABLE_BUDGET) -> LocalDistribution:
    """Local distribution on a closed set; raises NormalizationError unless it sums to 1."""
    vars = domain.vars if isinstance(domain, ClosedSet) else domain
    dist = product_table(inst, mu, vars, budget)
    tot = dist.total()
    if tot != 1:
        raise NormalizationError(f"table over {list(dist.vars)} sums to {tot}")
    return dist


def nu_of(inst: Instance, mu: PairwiseDist, S, R: int = DEFAULT_RADIUS, budget: int = TABLE_BUDGET) -> Table:
    """nu_S: marginal of nu_{cl(S)} onto S."""
    cl = compute_closure(inst, S, R, max_vars=max(budget, len(set(S))))
    return nu_closed(inst, mu, cl, budget).marginal(S)


def marginal(dist: Table, T) -> Table:
    return dist.marginal(T)


# -- consistency / independence / union ------------------------------------


def check_consistency(inst: Instance, mu: PairwiseDist, A, B, R: int = DEFAULT_RADIUS, budget: int = TABLE_BUDGET) -> Report:
    """Marginal of nu_B onto A equals nu_A (both built through closures)."""
    A, B = set(A), set(B)
    if not A <= B:
        raise PreconditionError("A must be a subset of B")
    nuB = nu_of(inst, mu, B, R, budget)
    nuA = nu_of(inst, mu, A, R, budget)
    diff = nuB.marginal(A).first_difference(nuA)
    return Report(
        "consistency",
        "pass" if diff is None else "fail",
        inputs={"A": A, "B": B, "radius": R},
        witness=None if diff is None else {"assignment_mask": diff[0], "from_B": diff[1], "nu_A": diff[2]},
    )


def check_disjoint_product(inst: Instance, mu: PairwiseDist, A, B, R: int = DEFAULT_RADIUS, budget: int = TABLE_BUDGET) -> Report:
    """nu_{A u B} = nu_A x nu_B for disjoint closed A, B with A u B closed."""
    A = set(A.vars if isinstance(A, ClosedSet) else A)
    B = set(B.vars if isinstance(B, ClosedSet) else B)
    if A & B:
        raise PreconditionError("A and B must be disjoint")
    for name, X in (("A", A), ("B", B), ("A u B", A | B)):
        ok, path = is_closed(inst, X, R)
        if not ok:
            raise PreconditionError(f"{name} is not {R}-closed (path {path.edges})")
    joint = nu_closed(inst, mu, A | B, budget)
    prod = nu_closed(inst, mu, A, budget).product(nu_closed(inst, mu, B, budget))
    diff = joint.first_difference(prod)
    return Report(
        "disjoint-closure-independence",
        "pass" if diff is None else "fail",
        inputs={"A": A, "B": B},
        witness=None if diff is None else {"assignment_mask": diff[0], "joint": diff[1], "product": diff[2]},
    )


@dataclass
class BridgeStructure:
    bridges: list[HyperPath]
    bridge_closures: list[HyperPath]
    # bridge index each bridge-closure path hangs off
    attached_to: list[list[int]]
    claim_violations: list[dict]

    @property
    def clauses(self) -> set[int]:
        out = set()
        for p in self.bridges + self.bridge_closures:
            out.update(p.edges)
        return out

    def to_dict(self) -> dict:
        return {
            "bridges": [p.to_dict() for p in self.bridges],
            "bridge_closures": [p.to_dict() for p in self.bridge_closures],
            "claim_violations": self.claim_violations,
        }


def enumerate_bridges(inst: Instance, A, B, ball_R: int, R: int = DEFAULT_RADIUS) -> BridgeStructure:
    """Bridge paths and bridge-closure paths (length <= R) for the pair A, B.

    A bridge runs from a in A to b in B and meets A only in a and B only in
    b. A bridge-closure path runs from a vertex w of some bridge (w outside
    A u B) to b in B, meets that bridge only in w, B only in b, and avoids
    A. Also checks the pairwise-intersection claims for these paths.
    """
    A = set(A.vars if isinstance(A, ClosedSet) else A)
    B = set(B.vars if isinstance(B, ClosedSet) else B)
    ok, path = is_closed(inst, A, ball_R)
    if not ok:
        raise PreconditionError(f"A is not {ball_R}-closed (path {path.edges})")
    ok, path = is_closed(inst, B, R)
    if not ok:
        raise PreconditionError(f"B is not {R}-closed (path {path.edges})")

    bridges: dict[tuple, HyperPath] = {}
    for a in sorted(A - B):
        for edges, b in iter_paths(inst, a, R):
            if b not in B or b in A:
                continue
            vs = path_vertices(inst, edges)
            if vs & A == {a} and vs & B == {b}:
                bridges.setdefault(edges, HyperPath(edges, (a, b)))
    blist = sorted(bridges.values(), key=lambda p: p.edges)
    bverts = [path_vertices(inst, p.edges) for p in blist]

    closures: dict[tuple, HyperPath] = {}
    attach: dict[tuple, set[int]] = {}
    for bi, (bp, bv) in enumerate(zip(blist, bverts)):
        for w in sorted(bv - A - B):
            for edges, b in iter_paths(inst, w, R):
                if b not in B or edges in bridges:
                    continue
                vs = path_vertices(inst, edges)
                if vs & bv == {w} and vs & B == {b} and not vs & A:
                    closures.setdefault(edges, HyperPath(edges, (w, b)))
                    attach.setdefault(edges, set()).add(bi)
    clist = sorted(closures.values(), key=lambda p: p.edges)
    cverts = [path_vertices(inst, p.edges) for p in clist]
    attached = [sorted(attach[p.edges]) for p in clist]

    viol = []
    AB = A | B
    for i, j in itertools.combinations(range(len(blist)), 2):
        if not (bverts[i] & bverts[j]) <= AB:
            viol.append({"item": 1, "bridges": [blist[i].edges, blist[j].edges]})
    for i, j in itertools.combinations(range(len(clist)), 2):
        shared = cverts[i] & cverts[j]
        if shared and not any(shared <= (bverts[b] | B) for b in set(attached[i]) | set(attached[j])):
            viol.append({"item": 2, "bridge_closures": [clist[i].edges, clist[j].edges]})
        if not set(attached[i]) & set(attached[j]) and shared - B:
            viol.append({"item": 4, "bridge_closures": [clist[i].edges, clist[j].edges]})
    for i in range(len(clist)):
        for j in range(len(blist)):
            if len(cverts[i] & bverts[j]) > 1:
                viol.append({"item": 3, "bridge_closure": clist[i].edges, "bridge": blist[j].edges})
    return BridgeStructure(blist, clist, attached, viol)


BRIDGE_CLAIM_RADIUS = 100


def check_union_factorization(
    inst: Instance, mu: PairwiseDist, A, B, ball_R: int, R: int = DEFAULT_RADIUS, budget: int = TABLE_BUDGET,
    enforce_bridge_claim: bool | None = None,
) -> Report:
    """nu_{A u B} computed by marginalizing nu_{cl(A u B)} equals Z_{A,B} prod_{C in C(A u B)} mu_C.

    Also checks that every clause of cl(A u B) not inside A u B lies on a
    bridge or bridge-closure path. That cross-check only counts toward the
    status when A is closed at radius >= BRIDGE_CLAIM_RADIUS (or when forced);
    with a small ball radius, short cycles through A can legitimately route
    extra clauses between two bridges.
    """
    if enforce_bridge_claim is None:
        enforce_bridge_claim = ball_R >= BRIDGE_CLAIM_RADIUS
    A = set(A.vars if isinstance(A, ClosedSet) else A)
    B = set(B.vars if isinstance(B, ClosedSet) else B)
    bs = enumerate_bridges(inst, A, B, ball_R, R)
    U = A | B
    D = compute_closure(inst, U, R, max_vars=max(budget, len(U)))
    via_closure = nu_closed(inst, mu, D, budget).marginal(U)
    formula = product_table(inst, mu, U, budget)
    formula = Table(formula.vars, formula.weights, formula.scale)
    diff = via_closure.first_difference(formula)
    extra = set(D.clauses) - set(inst.induced_clauses(U))
    unexplained = sorted(extra - bs.clauses)
    failed = diff is not None or (enforce_bridge_claim and bool(unexplained))
    witness = None
    if diff is not None:
        witness = {"assignment_mask": diff[0], "marginal": diff[1], "formula": diff[2]}
    elif failed:
        witness = {"unexplained_clauses": unexplained}
    return Report(
        "union-factorization",
        "fail" if failed else "pass",
        inputs={"A": A, "B": B, "ball_radius": ball_R},
        witness=witness,
        details={
            "extra_clauses": sorted(extra),
            "bridge_claim": {"enforced": enforce_bridge_claim, "holds": not unexplained, "unexplained": unexplained},
            "bridges": len(bs.bridges),
            "bridge_closures": len(bs.bridge_closures),
            "intersection_claim_violations": bs.claim_violations,
        },
    )


# -- peeling order ---------------------------------------------------------


@dataclass
class PeelOrder:
    order: list[int]
    parts: list[frozenset]
    isolated: frozenset  # vertices of B \ A lying in no clause of C(B) \ C(A)

    def to_dict(self) -> dict:
        return {"order": self.order, "parts": [sorted(p) for p in self.parts], "isolated": sorted(self.isolated)}


def peel_order(inst: Instance, A, B) -> PeelOrder:
    """Order C(B) \\ C(A) so each clause keeps >= k-2 private vertices outside A.

    Greedy: repeatedly take the lowest-indexed remaining clause whose
    vertices outside A and outside every other remaining clause number at
    least k-2; those vertices form its part.
    """
    A = set(A.vars if isinstance(A, ClosedSet) else A)
    B = set(B.vars if isinstance(B, ClosedSet) else B)
    if not A <= B:
        raise PreconditionError("A must be a subset of B")
    remaining = sorted(set(inst.induced_clauses(B)) - set(inst.induced_clauses(A)))
    order, parts = [], []
    while remaining:
        cover: dict[int, int] = {}
        for ci in remaining:
            for v in inst.clauses[ci].vars:
                cover[v] = cover.get(v, 0) + 1
        pick = None
        for ci in remaining:
            private = frozenset(v for v in inst.clauses[ci].vars if cover[v] == 1 and v not in A)
            if len(private) >= inst.k - 2:
                pick = (ci, private)
                break
        if pick is None:
            raise PreconditionError(f"no clause with >= k-2 private vertices among {remaining}")
        order.append(pick[0])
        parts.append(pick[1])
        remaining.remove(pick[0])
    covered = set().union(*parts) if parts else set()
    return PeelOrder(order, parts, frozenset(B - A - covered))


# -- independent oracle: root propagation on forests -------------------------


def propagation_oracle(inst: Instance, mu: PairwiseDist, vars, rng=None) -> Table:
    """Exact distribution from sampling a clause forest top-down.

    For each component: assign a root clause from mu_C, then repeatedly take
    a clause meeting the assigned variables in exactly one vertex and assign
    its remaining variables from the conditional of mu_C given that vertex.
    Isolated variables are uniform. With ``rng``, the root of each component
    and the traversal order are randomized.
    """
    U = tuple(sorted(set(vars)))
    clauses = list(inst.induced_clauses(U))
    if girth(inst.subinstance(clauses)) != INF:
        raise PreconditionError("propagation oracle needs a forest-shaped domain")
    pos = {v: p for p, v in enumerate(U)}
    # partial distributions keyed by frozen tuple of (var, value) pairs
    dist: dict[tuple, Fraction] = {(): Fraction(1)}
    assigned: set[int] = set()
    todo = set(clauses)
    order_rng = rng

    def mu_c(ci, vals: dict) -> Fraction:
        c = inst.clauses[ci]
        x = sum(1 << j for j, v in enumerate(c.vars) if vals[v] == -1)
        return mu[x ^ sign_mask(c)]

    def extend(ci, pivot):
        nonlocal dist
        c = inst.clauses[ci]
        free = [v for v in c.vars if v != pivot]
        new = {}
        for key, p in dist.items():
            vals = dict(key)
            if pivot is None:
                cond_den = Fraction(1)
            else:
                cond_den = Fraction(0)
                for bits in itertools.product((1, -1), repeat=len(free)):
                    cond_den += mu_c(ci, {**vals, **dict(zip(free, bits))})
            for bits in itertools.product((1, -1), repeat=len(free)):
                full = {**vals, **dict(zip(free, bits))}
                q = mu_c(ci, full)
                if q and p:
                    new[tuple(sorted(full.items()))] = p * q / cond_den
        dist = new
        assigned.update(c.vars)
        todo.discard(ci)

    while todo:
        pending = sorted(todo)
        root = pending[int(order_rng.integers(len(pending)))] if order_rng is not None else pending[0]
        extend(root, None)
        queue = deque([root])
        while queue:
            cur = queue.popleft()
            nbrs = sorted({d for v in inst.clauses[cur].vars for d in inst.var_clauses[v] if d in todo})
            if order_rng is not None:
                order_rng.shuffle(nbrs)
            for d in nbrs:
                if d not in todo:
                    continue
                shared = [v for v in inst.clauses[d].vars if v in assigned]
                if len(shared) != 1:
                    raise PreconditionError(f"clause {d} meets assigned variables in {shared}")
                extend(d, shared[0])
                queue.append(d)
    probs = [Fraction(0)] * (1 << len(U))
    iso = [v for v in U if v not in assigned]
    for key, p in dist.items():
        base = sum(1 << pos[v] for v, val in key if val == -1)
        for bits in itertools.product((0, 1), repeat=len(iso)):
            mask = base | sum(b << pos[v] for v, b in zip(iso, bits))
            probs[mask] += p / (1 << len(iso))
    return table_from_probs(U, probs)


def search_union_counterexample(trials: int = 200, n: int = 12, k: int = 3, m: int = 8, seed: int = 0,
                                mu: PairwiseDist | None = None, R: int = DEFAULT_RADIUS) -> Report:
    """Look for 3-closed A, B on small random instances where union factorization fails.

    Instances are pruned to girth > 2R so that only the closedness radius of
    A departs from the large-ball setting. Only the table identity is tested
    (the bridge cross-check is off); any hit is returned as a witness.
    Finding none says nothing either way.
    """
    from .closure import ball_radius, random_local_set
    from .instance import prune_cycles, random_m_clauses
    from .pairwise import parity_distribution

    mu = mu or parity_distribution(k)
    rng = np.random.default_rng(seed)
    hits = []
    tested = 0
    for t in range(trials):
        inst = random_m_clauses(n, k, m, int(rng.integers(2**31)))
        inst = inst.with_signs(rng.choice([1, -1], size=(inst.m, k)).tolist())
        inst, _ = prune_cycles(inst, 2 * R)
        try:
            A = compute_closure(inst, random_local_set(inst, rng, int(rng.integers(1, 4))), R, max_vars=TABLE_BUDGET)
            B = compute_closure(inst, random_local_set(inst, rng, int(rng.integers(1, 4))), R, max_vars=TABLE_BUDGET)
            r = check_union_factorization(inst, mu, A, B, R, R, enforce_bridge_claim=False)
        except (BudgetExceeded, NormalizationError, PreconditionError):
            continue
        tested += 1
        if not r.ok:
            big = is_closed(inst, A.vars, ball_radius(inst))[0]
            hits.append({"instance": inst.to_dict(), "A": A.vars, "B": B.vars, "witness": r.witness,
                         "A_closed_at_ball_radius": big})
    return Report("union-counterexample-search", "fail" if hits else "pass",
                  inputs={"trials": trials, "n": n, "k": k, "m": m, "seed": seed},
                  witness=hits[0] if hits else None, trials=tested, violations=hits)
