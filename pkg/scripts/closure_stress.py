"""Closure sizes for seed sets larger than the size hypothesis allows.

Informational: reports the largest |C(cl_R(S))| / |S| seen per |S| on a
pruned random instance, next to the 2R bound.

    python scripts/closure_stress.py --n 60 --sizes 1 2 4 6 8 --trials 200
"""
import argparse
import json

from sosgap.closure import check_size_bound
from sosgap.instance import NiceParams, generate_random, prune_cycles


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--radius", type=int, default=3)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 4, 6, 8])
    a = ap.parse_args()
    raw = generate_random(a.n, 3, a.gamma, a.seed)
    inst, _ = prune_cycles(raw, NiceParams(3, a.gamma).girth_bound(a.n), seed=a.seed)
    rows = []
    for size in a.sizes:
        rep = check_size_bound(inst, a.trials, a.radius, seed=size, max_size=size)
        rows.append({"max_size": size, "violations": len(rep.violations), **rep.details})
        print(f"|S|<={size:2d}  largest clauses={rep.details['largest_clause_count']:3d}  "
              f"largest vars={rep.details['largest_var_count']:3d}  violations={len(rep.violations)}")
    print(json.dumps({"n": a.n, "m": inst.m, "radius": a.radius, "rows": rows}))


if __name__ == "__main__":
    main()
