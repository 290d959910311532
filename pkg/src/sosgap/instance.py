"""Signed k-uniform hypergraph instances and structural queries.

Variables are 1-based. A clause is stored with its variables sorted
ascending and its signs permuted alongside, so coordinate ``j`` of a
predicate always refers to the ``j``-th smallest variable of the clause.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import BudgetExceeded, ParameterError, SchemaError

INF = math.inf


@dataclass(frozen=True)
class Clause:
    vars: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.vars) != len(self.signs):
            raise SchemaError("vars and signs differ in length")
        if any(s not in (1, -1) for s in self.signs):
            raise SchemaError(f"signs must be +1/-1, got {self.signs}")
        if len(set(self.vars)) != len(self.vars):
            raise SchemaError(f"duplicate variable within clause {self.vars}")
        if any(a >= b for a, b in zip(self.vars, self.vars[1:])):
            raise SchemaError(f"clause vars must be strictly increasing: {self.vars}")

    @classmethod
    def make(cls, vars, signs) -> "Clause":
        """Build a clause from literals in any order, sorting by variable."""
        vars = [int(v) for v in vars]
        signs = [int(s) for s in signs]
        if len(vars) != len(signs):
            raise SchemaError("vars and signs differ in length")
        if len(set(vars)) != len(vars):
            raise SchemaError(f"duplicate variable within clause {vars}")
        pairs = sorted(zip(vars, signs))
        return cls(tuple(v for v, _ in pairs), tuple(s for _, s in pairs))

    @property
    def k(self) -> int:
        return len(self.vars)

    def evaluate(self, x) -> tuple[int, ...]:
        """Clause output ``(sigma_j * x[i_j])_j`` for an assignment indexed by variable."""
        return tuple(s * x[v] for v, s in zip(self.vars, self.signs))


@dataclass(frozen=True)
class Instance:
    n: int
    k: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.n < 0 or self.k < 1:
            raise SchemaError(f"bad sizes n={self.n} k={self.k}")
        for c in self.clauses:
            if c.k != self.k:
                raise SchemaError(f"clause {c.vars} has arity {c.k}, expected {self.k}")
            if c.vars[0] < 1 or c.vars[-1] > self.n:
                raise SchemaError(f"clause {c.vars} has a variable outside [1, {self.n}]")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @cached_property
    def var_clauses(self) -> dict[int, tuple[int, ...]]:
        """Variable -> indices of the clauses containing it (0-based clause indices)."""
        inc: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for i, c in enumerate(self.clauses):
            for v in c.vars:
                inc[v].append(i)
        return {v: tuple(cs) for v, cs in inc.items()}

    @cached_property
    def clause_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(c.vars) for c in self.clauses)

    def induced_clauses(self, vars) -> tuple[int, ...]:
        """Indices of clauses C with V(C) contained in ``vars``."""
        vs = set(vars)
        found = set()
        for v in vs:
            for ci in self.var_clauses[v]:
                if ci not in found and self.clause_sets[ci] <= vs:
                    found.add(ci)
        return tuple(sorted(found))

    def subinstance(self, keep) -> "Instance":
        keep = sorted(set(keep))
        return Instance(self.n, self.k, tuple(self.clauses[i] for i in keep))

    def with_signs(self, signs) -> "Instance":
        return Instance(self.n, self.k, tuple(Clause(c.vars, tuple(s)) for c, s in zip(self.clauses, signs)))

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "clauses": [{"vars": list(c.vars), "signs": list(c.signs)} for c in self.clauses],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("instance document must be a JSON object")
    missing = {"n", "k", "clauses"} - set(doc)
    if missing:
        raise SchemaError(f"missing keys: {sorted(missing)}")
    n, k, raw = doc["n"], doc["k"], doc["clauses"]
    if not isinstance(n, int) or not isinstance(k, int) or isinstance(n, bool) or isinstance(k, bool):
        raise SchemaError("n and k must be integers")
    if not isinstance(raw, list):
        raise SchemaError("clauses must be a list")
    clauses = []
    for entry in raw:
        if not isinstance(entry, dict) or "vars" not in entry or "signs" not in entry:
            raise SchemaError(f"malformed clause entry: {entry!r}")
        vs, ss = entry["vars"], entry["signs"]
        if not isinstance(vs, list) or not isinstance(ss, list):
            raise SchemaError(f"malformed clause entry: {entry!r}")
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in vs + ss):
            raise SchemaError(f"non-integer entry in clause {entry!r}")
        if len(vs) != k:
            raise SchemaError(f"clause {vs} has arity {len(vs)}, expected {k}")
        if any(v < 1 or v > n for v in vs):
            raise SchemaError(f"variable index out of range in clause {vs}")
        clauses.append(Clause.make(vs, ss))
    return Instance(n, k, tuple(clauses))


def load_instance(data) -> Instance:
    """Parse an instance JSON document (bytes or str)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
    return instance_from_dict(doc)


def serialize_instance(inst: Instance) -> str:
    return inst.dumps()


# -- generation -------------------------------------------------------


def edge_probability(n: int, k: int, gamma: float) -> float:
    return 4 * gamma * math.factorial(k) / n ** (k - 1)


def generate_random(n: int, k: int, gamma: float, seed: int) -> Instance:
    """Include each k-subset of [n] independently with probability 4*gamma*k!/n^(k-1).

    Signs are uniform. Clauses come out in lexicographic order of their
    variable sets. Raises ParameterError when the edge probability exceeds 1.
    """
    if k < 2 or n < k:
        raise ParameterError(f"need n >= k >= 2, got n={n} k={k}")
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    p = edge_probability(n, k, gamma)
    if p > 1:
        raise ParameterError(f"edge probability {p:.4g} > 1 for n={n}, k={k}, gamma={gamma}")
    rng = np.random.default_rng(seed)
    total = math.comb(n, k)
    keep = rng.random(total) < p
    signs = rng.integers(0, 2, size=(int(keep.sum()), k))
    clauses = []
    j = 0
    for idx, combo in enumerate(itertools.combinations(range(1, n + 1), k)):
        if keep[idx]:
            clauses.append(Clause(combo, tuple(1 - 2 * int(b) for b in signs[j])))
            j += 1
    return Instance(n, k, tuple(clauses))


def random_m_clauses(n: int, k: int, m: int, seed: int) -> Instance:
    """m clauses, each on a uniformly random k-subset, with uniform signs."""
    if n < k:
        raise ParameterError(f"need n >= k, got n={n} k={k}")
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(m):
        vs = rng.choice(np.arange(1, n + 1), size=k, replace=False)
        ss = 1 - 2 * rng.integers(0, 2, size=k)
        clauses.append(Clause.make(vs.tolist(), ss.tolist()))
    return Instance(n, k, tuple(clauses))


# -- paths, cycles, girth ----------------------------------------------


@dataclass(frozen=True)
class HyperPath:
    """Ordered clause indices; for cycles, ``vertices[i]`` links edges i and i+1 (mod length)."""

    edges: tuple[int, ...]
    endpoints: tuple[int, int] | None = None
    vertices: tuple[int, ...] = ()
    cyclic: bool = False

    def __len__(self):
        return len(self.edges)

    def to_dict(self) -> dict:
        d = {"edges": list(self.edges)}
        if self.endpoints is not None:
            d["endpoints"] = list(self.endpoints)
        if self.vertices:
            d["vertices"] = list(self.vertices)
        return d


def is_hyperpath(inst: Instance, edges) -> bool:
    sets = [inst.clause_sets[e] for e in edges]
    if len(set(edges)) != len(edges):
        return False
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            meet = bool(sets[i] & sets[j])
            if j == i + 1 and not meet:
                return False
            if j > i + 1 and meet:
                return False
    return True


def _canonical_cycle(edges: tuple[int, ...]) -> tuple[int, ...]:
    n = len(edges)
    best = None
    for seq in (edges, tuple(reversed(edges))):
        for r in range(n):
            cand = seq[r:] + seq[:r]
            if best is None or cand < best:
                best = cand
    return best


def find_short_cycles(inst: Instance, max_len: int) -> list[HyperPath]:
    """All hypergraph cycles with at most ``max_len`` edges, one per edge cycle.

    A cycle is a simple cycle of the variable/clause incidence graph: distinct
    clauses C_0..C_{l-1} and distinct linking variables v_i in C_i & C_{i+1}.
    Two clauses sharing two or more variables form a cycle of length 2.
    """
    if max_len < 2:
        raise ParameterError("max_len must be >= 2")
    seen: dict[tuple, HyperPath] = {}
    vc = inst.var_clauses

    def extend(start, path, linkers, used_vars):
        last = path[-1]
        for v in inst.clauses[last].vars:
            if v in used_vars:
                continue
            for nxt in vc[v]:
                if nxt == start:
                    # closing edge: need >= 2 clauses and a linking vertex unused so far
                    if len(path) >= 2:
                        key = _canonical_cycle(tuple(path))
                        if key not in seen:
                            seen[key] = HyperPath(tuple(path), None, tuple(linkers) + (v,), True)
                    continue
                if nxt < start or nxt in path or len(path) >= max_len:
                    continue
                path.append(nxt)
                linkers.append(v)
                used_vars.add(v)
                extend(start, path, linkers, used_vars)
                used_vars.discard(v)
                linkers.pop()
                path.pop()

    for start in range(inst.m):
        extend(start, [start], [], set())
    return sorted(seen.values(), key=lambda c: (len(c), c.edges))


def _shortest_cycle_through(inst: Instance, ci: int, limit: float, alive=None) -> float:
    """Length (in clauses) of the shortest cycle through clause ``ci``, or INF.

    BFS over the incidence graph with branch labels; search stops once the
    depth exceeds what a cycle of length ``limit`` would need.
    """
    # node encoding: clause c -> ("c", c), variable v -> ("v", v)
    vc = inst.var_clauses
    max_inc = 2 * limit if limit != INF else INF
    src = ("c", ci)
    dist = {src: 0}
    branch = {src: None}
    parent = {src: None}
    q = deque([src])
    best = INF
    while q:
        u = q.popleft()
        du = dist[u]
        # any cycle closed from here has incidence length >= 2 * du
        if 2 * du >= best or 2 * du > max_inc:
            break
        if u[0] == "c":
            nbrs = (("v", v) for v in inst.clauses[u[1]].vars)
        else:
            nbrs = (("c", c) for c in vc[u[1]] if alive is None or alive[c])
        for w in nbrs:
            if w == parent[u]:
                continue
            if w not in dist:
                dist[w] = du + 1
                parent[w] = u
                branch[w] = w if u == src else branch[u]
                q.append(w)
            elif branch[w] != branch[u] and w != src and u != src:
                best = min(best, du + dist[w] + 1)
    if best == INF or best > max_inc:
        return INF
    return best // 2


def girth(inst: Instance):
    """Shortest cycle length in clauses, or ``math.inf`` for a forest."""
    best = INF
    for ci in range(inst.m):
        best = min(best, _shortest_cycle_through(inst, ci, best))
        if best == 2:
            break
    return best


def prune_cycles(inst: Instance, girth_bound: int, seed: int | None = None) -> tuple[Instance, list[int]]:
    """Drop clauses so that no cycle of length <= girth_bound remains.

    Clauses are scanned and kept greedily: a clause is removed iff it closes a
    cycle of length <= girth_bound with the clauses kept before it. The scan
    follows clause index, or a seeded random order when ``seed`` is given
    (index order favors low-numbered variables on lexicographic instances).
    The result is a maximal short-cycle-free subinstance. Returns the pruned
    instance and the sorted removed clause indices (input numbering).
    """
    alive = [False] * inst.m
    removed = []
    scan = range(inst.m) if seed is None else np.random.default_rng(seed).permutation(inst.m).tolist()
    for ci in scan:
        alive[ci] = True
        if _shortest_cycle_through(inst, ci, girth_bound, alive) <= girth_bound:
            alive[ci] = False
            removed.append(ci)
    return inst.subinstance(i for i in range(inst.m) if alive[i]), sorted(removed)


def distance(inst: Instance, u: int, v: int):
    """Minimum number of clauses on a path joining u and v (0 if u == v)."""
    if u == v:
        return 0
    vc = inst.var_clauses
    seen_v = {u}
    seen_c = set()
    frontier = [u]
    hops = 0
    while frontier:
        hops += 1
        nxt = []
        for x in frontier:
            for c in vc[x]:
                if c in seen_c:
                    continue
                seen_c.add(c)
                for y in inst.clauses[c].vars:
                    if y == v:
                        return hops
                    if y not in seen_v:
                        seen_v.add(y)
                        nxt.append(y)
        frontier = nxt
    return INF


def ball(inst: Instance, sources, radius: int) -> set[int]:
    """Variables within ``radius`` clause hops of any source."""
    vc = inst.var_clauses
    seen = set(sources)
    frontier = list(seen)
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for c in vc[x]:
                for y in inst.clauses[c].vars:
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
        frontier = nxt
    return seen


def components(inst: Instance, vars) -> list[set[int]]:
    """Connected components of the sub-hypergraph induced on ``vars``."""
    vs = set(vars)
    adj: dict[int, set[int]] = {v: set() for v in vs}
    for ci in inst.induced_clauses(vs):
        cv = inst.clauses[ci].vars
        for a in cv:
            adj[a].update(cv)
    out, seen = [], set()
    for v in sorted(vs):
        if v in seen:
            continue
        comp, stack = set(), [v]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        out.append(comp)
    return out


# -- expansion ---------------------------------------------------------


@dataclass
class ExpansionReport:
    status: str  # "pass" | "fail" | "partial" | "vacuous"
    r: int
    beta: Fraction
    checked: int
    sampled: int = 0
    beta_measured: Fraction = Fraction(0)
    witness: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "r": self.r,
            "beta": str(self.beta),
            "checked": self.checked,
            "sampled": self.sampled,
            "beta_measured": str(self.beta_measured),
            "witness": list(self.witness) if self.witness is not None else None,
        }


def _clause_adjacency(inst: Instance) -> list[set[int]]:
    adj = [set() for _ in range(inst.m)]
    for cs in inst.var_clauses.values():
        for a in cs:
            adj[a].update(cs)
    for i in range(inst.m):
        adj[i].discard(i)
    return adj


def connected_collections(inst: Instance, r: int):
    """Yield every connected clause collection of size 1..r exactly once (as sorted tuples)."""
    adj = _clause_adjacency(inst)

    def grow(sub, ext, root, closed_nbhd):
        yield tuple(sorted(sub))
        if len(sub) == r:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new_ext = set(ext)
            new_ext.update(u for u in adj[w] if u > root and u not in closed_nbhd)
            yield from grow(sub | {w}, new_ext, root, closed_nbhd | adj[w])

    for root in range(inst.m):
        nb = {u for u in adj[root] if u > root}
        yield from grow({root}, nb, root, adj[root] | {root})


def _covered(inst: Instance, coll) -> int:
    vs = set()
    for ci in coll:
        vs.update(inst.clauses[ci].vars)
    return len(vs)


def check_expansion(inst: Instance, r: int, beta, budget: int = 10**6, samples: int = 10**4, seed: int = 0) -> ExpansionReport:
    """Check that every collection of <= r clauses covers >= (k-1-beta)|collection| variables.

    Connected collections suffice (the bound is additive over components).
    Enumeration is exhaustive up to ``budget`` collections; past that, random
    connected collections are sampled and the status is "partial".
    """
    if r < 1:
        raise ParameterError("r must be >= 1")
    beta = Fraction(beta)
    k = inst.k
    worst = Fraction(0)
    checked = 0
    exhausted = True
    for coll in connected_collections(inst, r):
        if checked >= budget:
            exhausted = False
            break
        checked += 1
        size = len(coll)
        cov = _covered(inst, coll)
        worst = max(worst, Fraction((k - 1) * size - cov, size))
        if cov < (k - 1 - beta) * size:
            return ExpansionReport("fail", r, beta, checked, 0, worst, coll)
    if exhausted:
        return ExpansionReport("pass", r, beta, checked, 0, worst)
    rng = np.random.default_rng(seed)
    adj = _clause_adjacency(inst)
    for s in range(samples):
        coll = {int(rng.integers(inst.m))}
        target = int(rng.integers(1, r + 1))
        while len(coll) < target:
            frontier = sorted(set().union(*(adj[c] for c in coll)) - coll)
            if not frontier:
                break
            coll.add(frontier[int(rng.integers(len(frontier)))])
        size = len(coll)
        cov = _covered(inst, coll)
        worst = max(worst, Fraction((k - 1) * size - cov, size))
        if cov < (k - 1 - beta) * size:
            return ExpansionReport("fail", r, beta, checked, s + 1, worst, tuple(sorted(coll)))
    return ExpansionReport("partial", r, beta, checked, samples, worst)


# -- niceness ----------------------------------------------------------


@dataclass(frozen=True)
class NiceParams:
    """Niceness parameters. ``girth_bound(n)`` is what pruning must exceed.

    The asymptotic expansion radius eta*n and girth tau*log2(n) are vacuous
    at desk scale, so the girth bound is floored at twice the closure radius
    (closure properties need R < girth/2) and the expansion radius can be
    overridden.
    """

    k: int
    gamma: float
    epsilon: float = 0.1
    delta: float = 1 / 200
    closure_radius: int = 3
    expansion_radius: int | None = None
    expansion_budget: int = 10**6

    @property
    def eta(self) -> float:
        return (1 / self.gamma**2) ** (2 / self.delta)

    @property
    def tau(self) -> float:
        return 1 / (4 * math.log2(self.gamma * self.k**2))

    def asymptotic_girth(self, n: int) -> float:
        return self.tau * math.log2(n)

    def girth_bound(self, n: int) -> int:
        return max(math.ceil(self.asymptotic_girth(n)) - 1, 2 * self.closure_radius)

    def radius(self, n: int) -> int:
        if self.expansion_radius is not None:
            return self.expansion_radius
        return math.floor(self.eta * n)

    def to_dict(self, n: int | None = None) -> dict:
        d = {
            "k": self.k,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "eta": self.eta,
            "tau": self.tau,
            "closure_radius": self.closure_radius,
        }
        if n is not None:
            d.update(asymptotic_girth=self.asymptotic_girth(n), girth_bound=self.girth_bound(n), expansion_radius=self.radius(n))
        return d


@dataclass
class NicenessReport:
    girth: float
    girth_bound: int
    girth_ok: bool
    short_cycle: HyperPath | None
    expansion: ExpansionReport | None
    params: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        exp_ok = self.expansion is None or self.expansion.status in ("pass", "vacuous")
        return self.girth_ok and exp_ok

    def to_dict(self) -> dict:
        return {
            "girth": "inf" if self.girth == INF else int(self.girth),
            "girth_bound": self.girth_bound,
            "girth_ok": self.girth_ok,
            "short_cycle": self.short_cycle.to_dict() if self.short_cycle else None,
            "expansion": self.expansion.to_dict() if self.expansion else None,
            "params": self.params,
            "notes": self.notes,
            "ok": self.ok,
        }


def check_nice(inst: Instance, params: NiceParams) -> NicenessReport:
    bound = params.girth_bound(inst.n)
    g = girth(inst)
    cyc = None
    if g <= bound:
        cyc = find_short_cycles(inst, int(g))[0]
    r = params.radius(inst.n)
    if r >= 1 and inst.m:
        exp = check_expansion(inst, r, params.delta, budget=params.expansion_budget)
    else:
        exp = ExpansionReport("vacuous", r, Fraction(params.delta), 0)
    notes = ["two clauses sharing >= 2 variables count as a cycle of length 2"]
    if r < 1:
        notes.append("expansion radius floor(eta*n) < 1: expansion requirement is vacuous at this n")
    return NicenessReport(g, bound, g > bound, cyc, exp, params.to_dict(inst.n), notes)
