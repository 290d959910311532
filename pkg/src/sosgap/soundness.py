"""How far the clause-output distribution of an assignment is from uniform."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instance import Clause, Instance
from .pairwise import mask_to_signs

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class OutputDistribution:
    """Histogram of C(x) over the clauses; counts indexed by bitmask (bit j <-> output j is -1)."""

    k: int
    counts: tuple[int, ...]

    @property
    def m(self) -> int:
        return sum(self.counts)

    def prob(self, y: int) -> Fraction:
        return Fraction(self.counts[y], self.m)

    def probs(self) -> list[Fraction]:
        return [self.prob(y) for y in range(1 << self.k)]

    def to_dict(self) -> dict:
        return {"k": self.k, "m": self.m, "counts": {mask_to_signs(y, self.k): c for y, c in enumerate(self.counts) if c}}


def assignment_distribution(inst: Instance, x) -> OutputDistribution:
    """x is a sequence of +-1 of length n (x[0] is variable 1)."""
    if len(x) != inst.n:
        raise ValueError(f"assignment has length {len(x)}, expected {inst.n}")
    xv = {i + 1: v for i, v in enumerate(x)}
    counts = [0] * (1 << inst.k)
    for c in inst.clauses:
        y = c.evaluate(xv)
        counts[sum(1 << j for j, v in enumerate(y) if v == -1)] += 1
    return OutputDistribution(inst.k, tuple(counts))


def stat_distance(d1, d2=None) -> Fraction:
    """Total variation distance; ``d2=None`` means uniform. Accepts OutputDistributions or probability lists."""
    p = d1.probs() if isinstance(d1, OutputDistribution) else [Fraction(v) for v in d1]
    if d2 is None:
        q = [Fraction(1, len(p))] * len(p)
    else:
        q = d2.probs() if isinstance(d2, OutputDistribution) else [Fraction(v) for v in d2]
    if len(p) != len(q):
        raise ValueError("distributions over different domains")
    return sum((abs(a - b) for a, b in zip(p, q)), Fraction(0)) / 2


def _code_matrix(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """For each clause, the variable index per position and the sign bits."""
    V = np.array([[v - 1 for v in c.vars] for c in inst.clauses], dtype=np.int64).reshape(inst.m, inst.k)
    S = np.array([sum(1 << j for j, s in enumerate(c.signs) if s == -1) for c in inst.clauses], dtype=np.int64)
    return V, S


def _distances(inst: Instance, masks: np.ndarray, V, S) -> tuple[np.ndarray, np.ndarray]:
    """Numerators sum_y |2^k c_y - m| for a batch of assignment masks (bit i <-> x_{i+1} = -1)."""
    k, m = inst.k, inst.m
    codes = np.zeros((len(masks), m), dtype=np.int64)
    for j in range(k):
        codes |= ((masks[:, None] >> V[None, :, j]) & 1) << j
    codes ^= S[None, :]
    flat = (np.arange(len(masks), dtype=np.int64)[:, None] << k) | codes
    counts = np.bincount(flat.reshape(-1), minlength=len(masks) << k).reshape(len(masks), 1 << k)
    return np.abs((counts << k) - m).sum(axis=1), counts


def _mask_to_x(mask: int, n: int) -> list[int]:
    return [-1 if (mask >> i) & 1 else 1 for i in range(n)]


def _bitstring(mask: int, n: int) -> str:
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


@dataclass
class DeviationResult:
    mode: str
    n: int
    m: int
    k: int
    max_distance: Fraction
    argmax: int
    evaluated: int
    epsilon: float | None = None

    @property
    def x(self) -> list[int]:
        return _mask_to_x(self.argmax, self.n)

    @property
    def passed(self) -> bool | None:
        return None if self.epsilon is None else self.max_distance <= Fraction(self.epsilon)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "n": self.n, "m": self.m, "k": self.k,
            "max_distance": str(self.max_distance),
            "max_distance_float": float(self.max_distance),
            "argmax_x": _bitstring(self.argmax, self.n),
            "evaluated": self.evaluated,
            "epsilon_target": self.epsilon,
            "pass": self.passed,
        }


def max_deviation(inst: Instance, mode: str = "exhaustive", budget: int = 10_000, seed: int = 0,
                  epsilon: float | None = None, chunk: int = 1 << 14) -> DeviationResult:
    """Worst assignment for the statistical distance to uniform.

    ``exhaustive`` scans all 2^n assignments (n <= 20). ``sampled`` takes
    ``budget`` uniform assignments, then climbs by single flips from the
    worst one while it improves.
    """
    if inst.m == 0:
        raise ValueError("instance has no clauses")
    V, S = _code_matrix(inst)
    n, k, m = inst.n, inst.k, inst.m
    den = m << (k + 1)
    best_num, best_mask, evaluated = -1, 0, 0
    if mode == "exhaustive":
        if n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive mode needs n <= {EXHAUSTIVE_LIMIT}")
        total = 1 << n
        for lo in range(0, total, chunk):
            masks = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
            nums, _ = _distances(inst, masks, V, S)
            i = int(np.argmax(nums))
            if nums[i] > best_num:
                best_num, best_mask = int(nums[i]), int(masks[i])
            evaluated += len(masks)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(budget, n), dtype=np.int64)
        masks = (bits << np.arange(n, dtype=np.int64)).sum(axis=1)
        nums, _ = _distances(inst, masks, V, S)
        i = int(np.argmax(nums))
        best_num, best_mask = int(nums[i]), int(masks[i])
        evaluated = budget
        while True:
            flips = best_mask ^ (np.int64(1) << np.arange(n, dtype=np.int64))
            fn, _ = _distances(inst, flips, V, S)
            evaluated += n
            j = int(np.argmax(fn))
            if fn[j] <= best_num:
                break
            best_num, best_mask = int(fn[j]), int(flips[j])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return DeviationResult(mode, n, m, k, Fraction(best_num, den), best_mask, evaluated, epsilon)


def randomize_signs(inst: Instance, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([1, -1]), size=(inst.m, inst.k))
    return Instance(inst.n, inst.k, tuple(Clause(c.vars, tuple(int(s) for s in row)) for c, row in zip(inst.clauses, signs)))


def asymptotic_clause_requirement(n: int, k: int, epsilon: float) -> dict:
    """Shape of the asymptotic requirement m = Omega(2^{O(k)} eps^-2 n), constants unspecified."""
    return {"form": "m = Omega(2^{O(k)} * eps^-2 * n)", "n_over_eps2": n / epsilon**2, "k": k}
