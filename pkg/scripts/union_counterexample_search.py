"""Search small pruned random instances for union-factorization failures.

    python scripts/union_counterexample_search.py --trials 500 --n 12 --m 8
"""
import argparse
import json

from sosgap.localdist import search_union_counterexample


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--radius", type=int, default=3)
    a = ap.parse_args()
    rep = search_union_counterexample(a.trials, a.n, a.k, a.m, a.seed, R=a.radius)
    print(f"tested {rep.trials} pairs, hits {len(rep.violations)}")
    print(json.dumps(rep.to_dict(), default=str))
    return 0 if rep.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
