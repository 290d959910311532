"""Exact distributions over {+-1}^k and pairwise-independence checks.

Encoding: an assignment y in {+-1}^k is the bitmask with bit j set iff
y_j = -1 (so +1 <-> 0 and -1 <-> 1 over F2). Sign strings use '+'/'-'
with character j describing y_j.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError, SchemaError
from .instance import Clause


def sign_of(mask: int, j: int) -> int:
    return -1 if (mask >> j) & 1 else 1


def mask_to_signs(mask: int, k: int) -> str:
    return "".join("-" if (mask >> j) & 1 else "+" for j in range(k))


def signs_to_mask(s: str) -> int:
    mask = 0
    for j, ch in enumerate(s):
        if ch == "-":
            mask |= 1 << j
        elif ch != "+":
            raise SchemaError(f"bad sign string {s!r}")
    return mask


class NotPairwiseIndependent(ValueError):
    pass


@dataclass(frozen=True)
class PairwiseDist:
    """Probability table over {+-1}^k indexed by bitmask."""

    k: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.probs) != 1 << self.k:
            raise SchemaError(f"table has {len(self.probs)} entries, expected {1 << self.k}")

    def __getitem__(self, mask: int) -> Fraction:
        return self.probs[mask]

    @property
    def support(self) -> list[int]:
        return [y for y, p in enumerate(self.probs) if p]

    def moment(self, coords) -> Fraction:
        """E[prod_{j in coords} y_j]."""
        cm = sum(1 << j for j in coords)
        return sum((p if bin(y & cm).count("1") % 2 == 0 else -p) for y, p in enumerate(self.probs))

    def to_dict(self) -> dict:
        return {"k": self.k, "probs": {mask_to_signs(y, self.k): str(p) for y, p in enumerate(self.probs)}}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def dist_from_dict(doc) -> PairwiseDist:
    try:
        k = doc["k"]
        raw = doc["probs"]
    except (KeyError, TypeError) as e:
        raise SchemaError(f"distribution document needs 'k' and 'probs': {e}") from e
    if not isinstance(k, int) or not isinstance(raw, dict):
        raise SchemaError("bad distribution document")
    probs = [Fraction(0)] * (1 << k)
    for key, val in raw.items():
        if len(key) != k:
            raise SchemaError(f"sign string {key!r} has wrong length")
        try:
            probs[signs_to_mask(key)] = Fraction(val)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"bad probability {val!r}") from e
    return PairwiseDist(k, tuple(probs))


def load_dist(data) -> PairwiseDist:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return dist_from_dict(json.loads(data))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e


@dataclass
class MomentCheck:
    ok: bool
    coords: tuple[int, ...] | None = None
    value: Fraction | None = None

    def to_dict(self) -> dict:
        if self.ok:
            return {"ok": True}
        return {"ok": False, "moment": list(self.coords), "value": str(self.value)}


def validate_table(dist: PairwiseDist) -> None:
    if any(p < 0 for p in dist.probs):
        raise SchemaError("negative probability")
    if sum(dist.probs) != 1:
        raise SchemaError(f"probabilities sum to {sum(dist.probs)}, not 1")


def verify_pairwise_independent(dist: PairwiseDist) -> MomentCheck:
    """Exact check that all first and second moments vanish."""
    validate_table(dist)
    for j in range(dist.k):
        m = dist.moment((j,))
        if m:
            return MomentCheck(False, (j,), m)
    for i, j in itertools.combinations(range(dist.k), 2):
        m = dist.moment((i, j))
        if m:
            return MomentCheck(False, (i, j), m)
    return MomentCheck(True)


def uniform_distribution(k: int) -> PairwiseDist:
    return PairwiseDist(k, tuple(Fraction(1, 1 << k) for _ in range(1 << k)))


def parity_distribution(k: int, target: int = 1) -> PairwiseDist:
    """Uniform over {y : prod y_i = target}."""
    if k < 3:
        raise ParameterError("parity is not pairwise independent for k < 3")
    if target not in (1, -1):
        raise ParameterError("target must be +1 or -1")
    want = 0 if target == 1 else 1
    p = Fraction(1, 1 << (k - 1))
    return PairwiseDist(k, tuple(p if bin(y).count("1") % 2 == want else Fraction(0) for y in range(1 << k)))


def from_generator_matrix(rows, k: int | None = None, shift: int = 0) -> PairwiseDist:
    """Uniform distribution over the F2 code {z : <r, z> = 0 for every row} (+ shift).

    Each row is a parity check; a single all-ones row gives the even-parity
    code. Raises NotPairwiseIndependent when the result fails the moment check.
    """
    rows = [tuple(int(b) & 1 for b in r) for r in rows]
    if k is None:
        if not rows:
            raise ParameterError("k is required when no rows are given")
        k = len(rows[0])
    if any(len(r) != k for r in rows):
        raise ParameterError("all rows must have length k")
    masks = [sum(b << j for j, b in enumerate(r)) for r in rows]
    code = [z for z in range(1 << k) if all(bin(z & r).count("1") % 2 == 0 for r in masks)]
    p = Fraction(1, len(code))
    probs = [Fraction(0)] * (1 << k)
    for z in code:
        probs[z ^ shift] = p
    dist = PairwiseDist(k, tuple(probs))
    chk = verify_pairwise_independent(dist)
    if not chk.ok:
        raise NotPairwiseIndependent(f"moment {chk.coords} = {chk.value}")
    return dist


def builtin_mu(name: str, k: int) -> PairwiseDist:
    """Resolve 'uniform', 'parity+', 'parity-' or 'file:<path>'."""
    if name == "uniform":
        return uniform_distribution(k)
    if name == "parity+":
        return parity_distribution(k, 1)
    if name == "parity-":
        return parity_distribution(k, -1)
    if name.startswith("file:"):
        with open(name[5:], "rb") as fh:
            d = load_dist(fh.read())
        if d.k != k:
            raise ParameterError(f"distribution arity {d.k} != instance arity {k}")
        return d
    raise ParameterError(f"unknown mu {name!r}")


# -- affine planes -------------------------------------------------------


def contains_affine_plane(support, k: int | None = None) -> tuple[bool, tuple[int, int, int, int] | None]:
    """Whether the support contains a 2-dimensional affine subspace of F2^k.

    Scans triples a < b < c of support points and tests whether the fourth
    point a^b^c of their affine span is present.
    """
    pts = sorted(set(support))
    if k is not None and k > 20:
        raise ParameterError("k <= 20 required")
    present = set(pts)
    for ia in range(len(pts)):
        a = pts[ia]
        for ib in range(ia + 1, len(pts)):
            b = pts[ib]
            for ic in range(ib + 1, len(pts)):
                c = pts[ic]
                d = a ^ b ^ c
                if d in present:
                    return True, tuple(sorted((a, b, c, d)))
    return False, None


# -- clause-level distributions -----------------------------------------


@dataclass(frozen=True)
class ClauseDist:
    """mu_C: table over assignments to V(C) (bit j <-> j-th smallest variable)."""

    clause: Clause
    table: tuple[Fraction, ...]

    def marginal(self, positions) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for x, p in enumerate(self.table):
            key = sum(((x >> j) & 1) << t for t, j in enumerate(positions))
            out[key] = out.get(key, Fraction(0)) + p
        return out


def sign_mask(clause: Clause) -> int:
    return sum(1 << j for j, s in enumerate(clause.signs) if s == -1)


def clause_distribution(mu: PairwiseDist, clause: Clause) -> ClauseDist:
    """Table x_{V(C)} -> mu(sigma o x); negating a literal flips its bit."""
    if mu.k != clause.k:
        raise ParameterError(f"mu has arity {mu.k}, clause has {clause.k}")
    s = sign_mask(clause)
    return ClauseDist(clause, tuple(mu[x ^ s] for x in range(1 << mu.k)))
