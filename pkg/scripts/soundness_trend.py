"""Seed-averaged worst-case output distance as the clause count grows.

    python scripts/soundness_trend.py --n 16 --seeds 20 --mults 2 4 8 16
"""
import argparse
import json
from fractions import Fraction

from sosgap.instance import random_m_clauses
from sosgap.soundness import max_deviation, randomize_signs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--mults", type=int, nargs="+", default=[2, 4, 8, 16])
    a = ap.parse_args()
    trivial = 1 - Fraction(1, 2**a.k)
    rows = []
    for mult in a.mults:
        m = mult * a.n
        d = [max_deviation(randomize_signs(random_m_clauses(a.n, a.k, m, s), s)).max_distance for s in range(a.seeds)]
        avg = sum(d) / len(d)
        rows.append({"m": m, "mean": str(avg), "max": str(max(d)), "min": str(min(d)), "below_trivial": max(d) < trivial})
        print(f"m={m:5d}  mean={float(avg):.4f}  max={float(max(d)):.4f}  min={float(min(d)):.4f}")
    means = [Fraction(r["mean"]) for r in rows]
    mono = all(x > y for x, y in zip(means, means[1:]))
    print(f"trivial bound {trivial}; strictly decreasing mean: {mono}")
    print(json.dumps({"n": a.n, "k": a.k, "seeds": a.seeds, "rows": rows, "monotone": mono}))


if __name__ == "__main__":
    main()
