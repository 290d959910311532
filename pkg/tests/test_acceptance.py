"""Acceptance suite. Each test prints one `ACCEPTANCE n: PASS|FAIL ...` line.

Run standalone with `python tests/test_acceptance.py` or through pytest
with `-s` to see the lines.
"""
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import make, pruned  # noqa: E402
from oracles import brute_affine_planes  # noqa: E402
from sosgap.cli import main  # noqa: E402
from sosgap.closure import ball_radius, check_size_bound, is_closed  # noqa: E402
from sosgap.instance import random_m_clauses  # noqa: E402
from sosgap.localdist import check_consistency, check_disjoint_product, check_union_factorization, nu_closed, propagation_oracle  # noqa: E402
from sosgap.ortho import build_ordering, orthogonalize_all, perturb, verify_full_orthogonality, verify_global_orthogonality  # noqa: E402
from sosgap.pairwise import PairwiseDist, contains_affine_plane, parity_distribution  # noqa: E402
from sosgap.pseudo import PseudoExpectation, build_moment_matrix, check_completeness, check_psd_exact, check_psd_float  # noqa: E402
from sosgap.soundness import max_deviation, randomize_signs  # noqa: E402
from sosgap.suites import closed_neighborhood, random_closed_pairs, random_disjoint_pairs, random_nested_pairs, tree_domains  # noqa: E402

FLOAT_TOL = 1e-9
N_NESTED = 500
N_SIZE = 1000
N_UNION = 100
ORACLE_ROOTS = 5
SOUND_N, SOUND_SEEDS = 16, 20
K4_SUPPORTS = 10_000

PARITY = parity_distribution(3)
_cache = {}


def inst60():
    if "60" not in _cache:
        _cache["60"] = pruned(60, 1)
    return _cache["60"]


def fixture():
    return make(7, [(1, 2, 3), (3, 4, 5), (5, 6, 7)])


def verdict(n, ok, msg):
    print(f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} {msg}")
    assert ok, msg


def test_1_completeness():
    inst = inst60()
    pe = PseudoExpectation(inst, PARITY)
    bad = [ci for ci in range(inst.m) if not check_completeness(pe, ci).ok]
    verdict(1, not bad, f"n=60 m={inst.m} clauses x 8 indicators exact, failures={bad[:5]}")


def test_2_consistency():
    inst = inst60()
    bad, count = [], 0
    for A, B in random_nested_pairs(inst, N_NESTED, seed=2, max_closure=20):
        count += 1
        if not check_consistency(inst, PARITY, A, B).ok:
            bad.append((sorted(A), sorted(B)))
    verdict(2, count == N_NESTED and not bad, f"{count} nested pairs |cl(B)|<=20, failures={bad[:3]}")


def test_3_moment_psd():
    inst = inst60()
    vars = closed_neighborhood(inst, 12, seed=3)
    closed = len(vars) == 12 and is_closed(inst, vars, 3)[0]
    M = build_moment_matrix(PseudoExpectation(inst, PARITY, d=2), 2, vars)
    ex = check_psd_exact(M)
    fl = check_psd_float(M, FLOAT_TOL)
    ok = closed and ex.psd and all(p >= 0 for p in ex.pivots) and fl.min_eigenvalue >= -FLOAT_TOL and fl.agree
    verdict(3, ok, f"vars={len(vars)} closed={closed} size={len(M)} exact={ex.psd} "
                   f"lambda_min={fl.min_eigenvalue:.3e} tol={FLOAT_TOL} agree={fl.agree}")


def _ortho_ok(inst):
    pe = PseudoExpectation(inst, PARITY, d=2)
    o = build_ordering(inst, 2)
    basis = orthogonalize_all(pe, o)
    full = verify_full_orthogonality(pe, basis).ok
    nonneg = all(e.norm2 >= 0 for e in basis.entries)
    tri = all(e.coeffs.get(e.set) == 1 and all(o.position[B] <= o.position[e.set] for B in e.coeffs)
              for e in basis.entries)
    return full and nonneg and tri, len(basis)


def test_4_orthogonalization():
    res = {name: _ortho_ok(inst) for name, inst in (("path", fixture()), ("pruned12", pruned(12, 1)))}
    ok = all(r[0] for r in res.values())
    verdict(4, ok, " ".join(f"{k}:sets={v[1]},ok={v[0]}" for k, v in res.items()) + " d=2 exact")


def test_5_closure_size():
    rep = check_size_bound(inst60(), N_SIZE, R=3, seed=5, eta=1)
    verdict(5, rep.ok and rep.trials == N_SIZE,
            f"{rep.trials} samples |S|<={rep.inputs['max_size']} violations={len(rep.violations)} "
            f"largest_clauses={rep.details['largest_clause_count']}")


def test_6_union_and_disjoint():
    inst = inst60()
    R_ball = ball_radius(inst)
    union = [check_union_factorization(inst, PARITY, A, B, R_ball).ok
             for A, B in random_closed_pairs(inst, N_UNION, seed=6, ball_R=R_ball)]
    disj = [check_disjoint_product(inst, PARITY, A, B).ok
            for A, B in random_disjoint_pairs(inst, N_UNION, seed=7)]
    ok = len(union) == N_UNION and len(disj) == N_UNION and all(union) and all(disj)
    verdict(6, ok, f"union {sum(union)}/{len(union)} disjoint {sum(disj)}/{len(disj)} ball_R={R_ball}")


def test_7_oracle():
    doms, bad = 0, []
    for inst in (fixture(), pruned(12, 1), pruned(40, 2), inst60()):
        for dom in tree_domains(inst, max_vars=16):
            doms += 1
            table = nu_closed(inst, PARITY, dom)
            for r in range(1, ORACLE_ROOTS + 1):
                if propagation_oracle(inst, PARITY, dom, np.random.default_rng(r)).first_difference(table) is not None:
                    bad.append((inst.n, dom, r))
    verdict(7, doms > 0 and not bad, f"{doms} tree domains x {ORACLE_ROOTS} root orders, mismatches={bad[:3]}")


def test_8_soundness():
    n, trivial = SOUND_N, 1 - Fraction(1, 8)
    avgs, maxes = [], []
    for mult in (2, 4, 8, 16):
        d = [max_deviation(randomize_signs(random_m_clauses(n, 3, mult * n, s), s)).max_distance
             for s in range(SOUND_SEEDS)]
        avgs.append(sum(d) / SOUND_SEEDS)
        maxes.append(max(d))
    below = maxes[2] < trivial
    mono = all(a > b for a, b in zip(avgs, avgs[1:]))
    verdict(8, below and mono, f"m=8n max={float(maxes[2]):.4f} < 7/8; seed-avg "
                               + " > ".join(f"{float(a):.4f}" for a in avgs))


def test_9_affine_planes():
    mism = [s for r in range(9) for s in itertools.combinations(range(8), r)
            if contains_affine_plane(s, 3)[0] != brute_affine_planes(s, 3)]
    rng = np.random.default_rng(9)
    for _ in range(K4_SUPPORTS):
        s = np.flatnonzero(rng.integers(0, 2, 16)).tolist()
        if contains_affine_plane(s, 4)[0] != brute_affine_planes(s, 4):
            mism.append(s)
    verdict(9, not mism, f"k=3 all 256 supports, k=4 {K4_SUPPORTS} random, mismatches={mism[:3]}")


def test_10_negative_controls(tmp_path=None):
    import tempfile
    tmp = Path(tmp_path or tempfile.mkdtemp())
    inst_path, mu_path = tmp / "inst.json", tmp / "mu.json"
    inst_path.write_text(fixture().dumps())
    probs = [Fraction(0)] * 8
    probs[0] = probs[7] = Fraction(1, 2)
    mu_path.write_text(PairwiseDist(3, tuple(probs)).dumps())
    out = tmp / "out.json"
    code = main(["verify", "--instance", str(inst_path), "--mu", f"file:{mu_path}", "--trials", "10", "--out", str(out)])
    doc = json.loads(out.read_text())
    failed = doc["result"]["failed"]
    has_witness = all(doc["result"]["suites"][s].get("witness") for s in failed)
    cli_ok = code != 0 and bool(failed) and has_witness

    pe = PseudoExpectation(fixture(), PARITY, d=2)
    o = build_ordering(pe.inst, 2)
    basis = orthogonalize_all(pe, o)
    i = next(i for i, e in enumerate(basis.entries) if e.space)
    rep = verify_global_orthogonality(pe, o, perturb(basis, i))
    pert_ok = not rep.ok and rep.witness is not None and "j" in rep.witness
    verdict(10, cli_ok and pert_ok, f"cli exit={code} failed={failed}; perturbed basis caught pair "
                                    f"{(rep.witness or {}).get('i')},{(rep.witness or {}).get('j')}")


if __name__ == "__main__":
    fails = 0
    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_") and callable(fn)]
    for name, fn in sorted(tests, key=lambda t: int(t[0].split("_")[1])):
        try:
            fn()
        except AssertionError:
            fails += 1
    sys.exit(1 if fails else 0)
