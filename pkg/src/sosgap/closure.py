"""R-closed variable sets and the iterative closure procedure."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, ClosureOverflow
from .instance import INF, HyperPath, Instance, ball, components, girth
from .reports import Report

DEFAULT_RADIUS = 3
PATH_BUDGET = 2_000_000


@dataclass(frozen=True)
class ClosedSet:
    vars: tuple[int, ...]
    clauses: tuple[int, ...]
    radius: int
    # one entry per round: the violating paths added in that round
    trace: tuple[tuple[HyperPath, ...], ...] = field(default=(), compare=False, repr=False)

    @property
    def varset(self) -> frozenset:
        return frozenset(self.vars)

    def __len__(self):
        return len(self.vars)

    def to_dict(self) -> dict:
        return {"vars": list(self.vars), "clauses": list(self.clauses), "radius": self.radius}


def iter_paths(inst: Instance, start: int, max_len: int, budget: int = PATH_BUDGET):
    """Yield ``(edges, end)`` for every hypergraph path of <= max_len clauses from ``start``.

    ``start`` lies only in the first clause and ``end`` only in the last one,
    consecutive clauses meet and non-consecutive clauses are disjoint.
    """
    vc = inst.var_clauses
    sets = inst.clause_sets
    count = 0

    def rec(path, before):
        # before: union of V(C_1..C_{j-1}); C_j = path[-1]
        nonlocal count
        last = sets[path[-1]]
        for w in last:
            if w != start and w not in before:
                count += 1
                if count > budget:
                    raise BudgetExceeded(f"more than {budget} paths enumerated from {start}")
                yield tuple(path), w
        if len(path) == max_len:
            return
        prev = sets[path[-2]] if len(path) >= 2 else frozenset((start,))
        cand = set()
        for w in last - prev:
            if w in before:
                continue
            cand.update(vc[w])
        nb = before | last
        for c in sorted(cand):
            if c in path:
                continue
            cs = sets[c]
            if start in cs or cs & before:
                continue
            path.append(c)
            yield from rec(path, nb)
            path.pop()

    for c in vc[start]:
        yield from rec([c], frozenset())


def path_vertices(inst: Instance, edges) -> set[int]:
    out = set()
    for e in edges:
        out |= inst.clause_sets[e]
    return out


def violating_paths(inst: Instance, members, R: int, budget: int = PATH_BUDGET):
    """Paths of length <= R between two distinct members that leave ``members``."""
    ms = set(members)
    out = []
    for v in sorted(ms):
        for edges, w in iter_paths(inst, v, R, budget):
            if w in ms and w > v:
                if not path_vertices(inst, edges) <= ms:
                    out.append(HyperPath(edges, (v, w)))
    return out


def is_closed(inst: Instance, A, R: int) -> tuple[bool, HyperPath | None]:
    """True iff every path of length <= R between two members of A stays in A."""
    ms = set(A)
    for v in sorted(ms):
        for edges, w in iter_paths(inst, v, R):
            if w in ms and w != v and not path_vertices(inst, edges) <= ms:
                return False, HyperPath(edges, (v, w))
    return True, None


def default_budget(size: int, R: int, k: int) -> int:
    return max(2 * R * k * size, size) + 2 * k


def compute_closure(inst: Instance, S, R: int = DEFAULT_RADIUS, max_vars: int | None = None) -> ClosedSet:
    """Smallest R-closed superset of S.

    Repeatedly adds every clause of every path of length <= R between two
    current members that leaves the current set, until none remain. Each
    round's batch of paths is kept in ``trace``.
    """
    S = set(S)
    if max_vars is None:
        max_vars = default_budget(len(S), R, inst.k)
    cur = set(S)
    rounds = []
    while True:
        found = violating_paths(inst, cur, R)
        if not found:
            break
        rounds.append(tuple(found))
        for p in found:
            cur |= path_vertices(inst, p.edges)
        if len(cur) > max_vars:
            raise ClosureOverflow(f"closure of {sorted(S)} exceeds {max_vars} variables (R={R})")
    vs = tuple(sorted(cur))
    return ClosedSet(vs, inst.induced_clauses(vs), R, tuple(rounds))


def closure_vars(inst: Instance, S, R: int = DEFAULT_RADIUS, max_vars: int | None = None) -> frozenset:
    return compute_closure(inst, S, R, max_vars).varset


def replay_trace(inst: Instance, S, closed: ClosedSet) -> bool:
    """Check that the recorded rounds are forced and rebuild exactly the closure."""
    cur = set(S)
    for batch in closed.trace:
        for p in batch:
            a, b = p.endpoints
            if a not in cur or b not in cur or len(p.edges) > closed.radius:
                return False
        for p in batch:
            cur |= path_vertices(inst, p.edges)
    return tuple(sorted(cur)) == closed.vars and is_closed(inst, cur, closed.radius)[0]


def ball_radius(inst: Instance, cap: int = 100) -> int:
    """min(cap, floor((girth-1)/2)); the cap applies to forests."""
    g = girth(inst)
    if g == INF:
        return cap
    return max(1, min(cap, (int(g) - 1) // 2))


# -- randomized property checks ------------------------------------------


def random_local_set(inst: Instance, rng, size: int, spread: int = 2) -> set[int]:
    """A random variable set of the given size, biased toward nearby variables."""
    v = int(rng.integers(1, inst.n + 1))
    near = sorted(ball(inst, [v], spread))
    size = min(size, inst.n)
    pick = set(rng.choice(near, size=min(size, len(near)), replace=False).tolist())
    while len(pick) < size:
        pick.add(int(rng.integers(1, inst.n + 1)))
    return pick


def check_closure_properties(inst: Instance, trials: int, R: int = DEFAULT_RADIUS, seed: int = 0, max_size: int = 4) -> Report:
    """Randomized check of the four simple closure properties.

    (1) intersections of R-closed sets are R-closed (hypothesis R < girth/2),
    (2) monotonicity, (3) every component of size >= 2 of cl(A) meets A at
    least twice, (4) cl(A) = cl(union of cl(A_i)) over random partitions.
    """
    rng = np.random.default_rng(seed)
    g = girth(inst)
    hyp = R < g / 2
    viol = []
    counts = {"intersection": 0, "monotone": 0, "components": 0, "partition": 0}
    for t in range(trials):
        a_size = int(rng.integers(1, max_size + 1))
        A = random_local_set(inst, rng, a_size)
        clA = closure_vars(inst, A, R)
        extra = random_local_set(inst, rng, int(rng.integers(1, max_size + 1)))
        B = A | extra
        clB = closure_vars(inst, B, R)
        if not clA <= clB:
            viol.append({"property": "monotone", "A": sorted(A), "B": sorted(B)})
        counts["monotone"] += 1

        C = random_local_set(inst, rng, int(rng.integers(1, max_size + 1)))
        clC = closure_vars(inst, C, R)
        inter = clA & clC
        ok, path = is_closed(inst, inter, R)
        if hyp and not ok:
            viol.append({"property": "intersection", "A": sorted(A), "C": sorted(C), "path": path.to_dict()})
        counts["intersection"] += 1

        for comp in components(inst, clA):
            if len(comp) >= 2 and len(comp & A) < 2:
                viol.append({"property": "components", "A": sorted(A), "component": sorted(comp)})
        counts["components"] += 1

        parts = rng.integers(0, 3, size=len(A))
        pieces = [{v for v, p in zip(sorted(A), parts) if p == j} for j in range(3)]
        union = set()
        for piece in pieces:
            if piece:
                union |= closure_vars(inst, piece, R)
        if closure_vars(inst, union, R, max_vars=10**6) != clA:
            viol.append({"property": "partition", "A": sorted(A), "parts": [sorted(p) for p in pieces]})
        counts["partition"] += 1
    return Report(
        "closure-properties",
        "fail" if viol else "pass",
        inputs={"trials": trials, "radius": R, "seed": seed, "max_size": max_size},
        witness=viol[0] if viol else None,
        trials=trials,
        violations=viol,
        details={"girth": "inf" if g == INF else int(g), "intersection_hypothesis": hyp, "counts": counts},
    )


def check_size_bound(inst: Instance, trials: int, R: int = DEFAULT_RADIUS, seed: int = 0, max_size: int | None = None, eta: float | None = None) -> Report:
    """Check |C(cl_R(S))| <= 2R|S| and |cl_R(S)| <= 2Rk|S| on random S.

    Sampled sizes respect |S| <= eta*n/(10R) when ``eta`` is given
    (at least 1); ``max_size`` overrides.
    """
    rng = np.random.default_rng(seed)
    if max_size is None:
        max_size = max(1, int((eta if eta is not None else 1.0) * inst.n / (10 * R)))
    viol = []
    largest = largest_vars = 0
    for _ in range(trials):
        S = random_local_set(inst, rng, int(rng.integers(1, max_size + 1)))
        cl = compute_closure(inst, S, R, max_vars=10**6)
        largest = max(largest, len(cl.clauses))
        largest_vars = max(largest_vars, len(cl.vars))
        if len(cl.clauses) > 2 * R * len(S) or len(cl.vars) > 2 * R * inst.k * len(S):
            viol.append({"S": sorted(S), "clauses": len(cl.clauses), "vars": len(cl.vars)})
    return Report(
        "closure-size",
        "fail" if viol else "pass",
        inputs={"trials": trials, "radius": R, "seed": seed, "max_size": max_size},
        witness=viol[0] if viol else None,
        trials=trials,
        violations=viol,
        details={"largest_clause_count": largest, "largest_var_count": largest_vars},
    )
