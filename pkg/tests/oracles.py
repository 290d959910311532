"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's algorithms; only the plain Instance
container is shared.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def clause_vars(inst):
    return [set(c.vars) for c in inst.clauses]


def is_path(sets, seq, start=None, end=None):
    """Consecutive clauses meet, non-consecutive ones are disjoint, endpoints private."""
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            meet = sets[seq[i]] & sets[seq[j]]
            if j == i + 1 and not meet:
                return False
            if j > i + 1 and meet:
                return False
    if start is not None:
        if start not in sets[seq[0]] or any(start in sets[c] for c in seq[1:]):
            return False
    if end is not None:
        if end not in sets[seq[-1]] or any(end in sets[c] for c in seq[:-1]):
            return False
    return True


def all_paths(inst, max_len):
    """Every (seq, start, end) hyperpath with start != end and |seq| <= max_len."""
    sets = clause_vars(inst)
    out = []
    for L in range(1, max_len + 1):
        for seq in itertools.permutations(range(inst.m), L):
            if not is_path(sets, seq):
                continue
            for s in sets[seq[0]]:
                for e in sets[seq[-1]]:
                    if s != e and is_path(sets, seq, s, e):
                        out.append((seq, s, e))
    return out


def brute_is_closed(inst, A, R, paths=None):
    A = set(A)
    sets = clause_vars(inst)
    for seq, s, e in paths if paths is not None else all_paths(inst, R):
        if len(seq) <= R and s in A and e in A:
            verts = set().union(*(sets[c] for c in seq))
            if not verts <= A:
                return False
    return True


def brute_closure(inst, S, R):
    """Smallest R-closed superset of S among S plus unions of clause vertex sets."""
    sets = clause_vars(inst)
    paths = all_paths(inst, R)
    best = None
    for r in range(inst.m + 1):
        for sub in itertools.combinations(range(inst.m), r):
            cand = set(S).union(*(sets[c] for c in sub)) if sub else set(S)
            if best is not None and len(cand) >= len(best):
                continue
            if brute_is_closed(inst, cand, R, paths):
                best = cand
    return best


def brute_cycles(inst, max_len):
    """Canonical clause sequences of hypergraph cycles with distinct linking vertices."""
    sets = clause_vars(inst)
    found = set()
    for L in range(2, max_len + 1):
        for seq in itertools.permutations(range(inst.m), L):
            links = [sets[seq[i]] & sets[seq[(i + 1) % L]] for i in range(L)]
            if not all(links):
                continue
            ok = any(len(set(ch)) == L for ch in itertools.product(*[sorted(x) for x in links]))
            if ok:
                rots = [seq[i:] + seq[:i] for i in range(L)]
                rots += [tuple(reversed(r)) for r in rots]
                found.add(min(rots))
    return found


def brute_girth(inst, max_len=8):
    cyc = brute_cycles(inst, max_len)
    return min((len(c) for c in cyc), default=float("inf"))


def brute_nu(inst, mu_probs, domain):
    """Z * prod mu_C over all assignments of the domain, as a dict from +-1 tuples to Fractions."""
    dom = sorted(domain)
    clauses = [c for c in inst.clauses if set(c.vars) <= set(dom)]
    k = inst.k
    Z = Fraction(2) ** (k * len(clauses) - len(dom))
    out = {}
    for x in itertools.product((1, -1), repeat=len(dom)):
        val = dict(zip(dom, x))
        p = Z
        for c in clauses:
            y = tuple(s * val[v] for v, s in zip(c.vars, c.signs))
            p *= mu_probs[y]
        out[x] = p
    return dom, out


def brute_marginal(dom, table, T):
    T = sorted(T)
    idx = [dom.index(v) for v in T]
    out = {}
    for x, p in table.items():
        key = tuple(x[i] for i in idx)
        out[key] = out.get(key, Fraction(0)) + p
    return out


def mu_as_tuples(mu):
    """PairwiseDist -> dict keyed by +-1 tuples (bit j set <-> y_j = -1)."""
    return {tuple(-1 if (y >> j) & 1 else 1 for j in range(mu.k)): p for y, p in enumerate(mu.probs)}


def brute_affine_planes(support, k):
    """Enumerate every 2-dim affine subspace {a, a^u, a^w, a^u^w} and test containment."""
    S = set(support)
    for a in S:
        for u in range(1, 1 << k):
            for w in range(u + 1, 1 << k):
                if (a ^ u) in S and (a ^ w) in S and (a ^ u ^ w) in S:
                    return True
    return False


def brute_tv(counts, k):
    m = sum(counts)
    return sum(abs(Fraction(c, m) - Fraction(1, 2**k)) for c in counts) / 2


def brute_expansion_ok(inst, r, beta):
    sets = clause_vars(inst)
    for size in range(1, r + 1):
        for coll in itertools.combinations(range(inst.m), size):
            if len(set().union(*(sets[c] for c in coll))) < (inst.k - 1 - beta) * size:
                return False
    return True
