"""Randomized verification drivers shared by the CLI, tests and scripts."""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .closure import DEFAULT_RADIUS, ball_radius, check_closure_properties, check_size_bound, compute_closure, is_closed, random_local_set
from .errors import BudgetExceeded, NormalizationError, PreconditionError
from .instance import INF, Instance, ball, girth
from .localdist import (
    TABLE_BUDGET, check_consistency, check_disjoint_product, check_union_factorization, nu_closed, propagation_oracle,
)
from .ortho import (
    build_ordering, check_boundary_claims, check_psd_reconstruction, orthogonalize_all, verify_full_orthogonality,
    verify_global_orthogonality, verify_local_orthogonality, verify_span,
)
from .pairwise import PairwiseDist, verify_pairwise_independent
from .pseudo import PseudoExpectation, build_moment_matrix, check_completeness_all, check_local_psd, check_psd_exact, check_psd_float
from .reports import Report
from .soundness import max_deviation

SUITES = ("pairwise", "closure", "consistency", "union", "oracle", "completeness", "local-psd", "psd", "orthogonality", "soundness")


@dataclass
class SuiteConfig:
    d: int = 2
    s: int | None = None
    closure_radius: int = DEFAULT_RADIUS
    ball_radius: int | None = None
    table_budget: int = TABLE_BUDGET
    trials: int = 100
    seed: int = 0
    max_set: int = 4
    max_closure: int = 20
    psd_vars: int = 12
    psd_tol: float = 1e-9
    order_budget: int = 120
    family: list | None = None
    soundness_mode: str = "exhaustive"
    soundness_budget: int = 10_000
    epsilon: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _fold(name: str, reports: list[Report], **details) -> Report:
    failed = [r for r in reports if not r.ok]
    return Report(
        name,
        "fail" if failed else "pass",
        witness=failed[0].to_dict() if failed else None,
        trials=sum(r.trials or 1 for r in reports),
        violations=[r.to_dict() for r in failed],
        details=details,
    )


def _error_report(name: str, err: Exception) -> Report:
    return Report(name, "fail", witness={"error": type(err).__name__, "message": str(err)})


def suite_pairwise(mu: PairwiseDist) -> Report:
    chk = verify_pairwise_independent(mu)
    return Report("pairwise-independence", "pass" if chk.ok else "fail", inputs={"k": mu.k},
                  witness=None if chk.ok else chk.to_dict())


def suite_closure(inst: Instance, cfg: SuiteConfig) -> Report:
    R = cfg.closure_radius
    return _fold("closure", [
        check_closure_properties(inst, cfg.trials, R, cfg.seed, cfg.max_set),
        check_size_bound(inst, cfg.trials, R, cfg.seed, cfg.max_set),
    ])


def random_nested_pairs(inst: Instance, count: int, seed: int, max_set: int = 4, max_closure: int = 20,
                        R: int = DEFAULT_RADIUS, tries: int = 50):
    """Yield (A, B) with A a nonempty subset of B and |cl(B)| <= max_closure."""
    rng = np.random.default_rng(seed)
    made = 0
    attempts = 0
    while made < count:
        attempts += 1
        if attempts > count * tries:
            raise BudgetExceeded(f"only {made} nested pairs with |cl(B)| <= {max_closure} found")
        B = random_local_set(inst, rng, int(rng.integers(1, max_set + 1)))
        try:
            cl = compute_closure(inst, B, R, max_vars=max_closure)
        except BudgetExceeded:
            continue
        if len(cl) > max_closure:
            continue
        Bs = sorted(B)
        keep = rng.integers(0, 2, size=len(Bs))
        A = {v for v, t in zip(Bs, keep) if t} or {Bs[int(rng.integers(len(Bs)))]}
        made += 1
        yield A, set(B)


def suite_consistency(inst: Instance, mu: PairwiseDist, cfg: SuiteConfig) -> Report:
    reports = []
    try:
        for A, B in random_nested_pairs(inst, cfg.trials, cfg.seed, cfg.max_set, cfg.max_closure, cfg.closure_radius):
            reports.append(check_consistency(inst, mu, A, B, cfg.closure_radius, cfg.table_budget))
    except NormalizationError as e:
        return _error_report("consistency", e)
    return _fold("consistency", reports)


def random_closed_pairs(inst: Instance, count: int, seed: int, ball_R: int, max_set: int = 3,
                        R: int = DEFAULT_RADIUS, budget: int = 18, tries: int = 100):
    """Yield up to ``count`` pairs A = cl_{ball_R}(S1), B = cl_R(S2), S2 near S1, |cl(A u B)| <= budget."""
    rng = np.random.default_rng(seed)
    made = attempts = 0
    while made < count:
        attempts += 1
        if attempts > count * tries:
            return
        S1 = random_local_set(inst, rng, int(rng.integers(1, max_set + 1)), spread=1)
        v = sorted(S1)[0]
        near = sorted(ball(inst, [v], int(rng.integers(1, 6))))
        S2 = set(rng.choice(near, size=min(len(near), int(rng.integers(1, max_set + 1))), replace=False).tolist())
        try:
            A = compute_closure(inst, S1, ball_R, max_vars=budget)
            B = compute_closure(inst, S2, R, max_vars=budget)
            U = compute_closure(inst, A.varset | B.varset, R, max_vars=budget)
        except BudgetExceeded:
            continue
        if len(U) > budget:
            continue
        made += 1
        yield A, B


def random_disjoint_pairs(inst: Instance, count: int, seed: int, max_set: int = 3, R: int = DEFAULT_RADIUS,
                          budget: int = 18, tries: int = 50):
    """Yield up to ``count`` disjoint closed (A, B) whose union is closed, |A u B| <= budget."""
    rng = np.random.default_rng(seed)
    made = attempts = 0
    while made < count:
        attempts += 1
        if attempts > count * tries:
            return
        try:
            A = compute_closure(inst, random_local_set(inst, rng, int(rng.integers(1, max_set + 1)), spread=1), R, max_vars=budget)
            B = compute_closure(inst, random_local_set(inst, rng, int(rng.integers(1, max_set + 1)), spread=1), R, max_vars=budget)
        except BudgetExceeded:
            continue
        U = A.varset | B.varset
        if A.varset & B.varset or len(U) > budget or not is_closed(inst, U, R)[0]:
            continue
        made += 1
        yield A, B


def suite_union(inst: Instance, mu: PairwiseDist, cfg: SuiteConfig) -> Report:
    """Union factorization on random closed pairs plus disjoint products on far-apart pairs."""
    R = cfg.closure_radius
    ball_R = cfg.ball_radius if cfg.ball_radius is not None else ball_radius(inst)
    budget = min(cfg.table_budget, 18)
    union, disjoint = [], []
    try:
        for A, B in random_closed_pairs(inst, cfg.trials, cfg.seed, ball_R, cfg.max_set, R, budget):
            union.append(check_union_factorization(inst, mu, A, B, ball_R, R, cfg.table_budget))
        for A, B in random_disjoint_pairs(inst, cfg.trials, cfg.seed + 1, cfg.max_set, R, budget):
            disjoint.append(check_disjoint_product(inst, mu, A, B, R, cfg.table_budget))
    except NormalizationError as e:
        return _error_report("union", e)
    claim_misses = sum(1 for r in union if not r.details["bridge_claim"]["holds"])
    return _fold("union", union + disjoint, union_pairs=len(union), disjoint_pairs=len(disjoint), ball_radius=ball_R,
                 bridge_claim_misses=claim_misses)


def tree_domains(inst: Instance, max_vars: int = 16, R: int = DEFAULT_RADIUS) -> list[tuple[int, ...]]:
    """Closed forest-shaped domains: closures of single clauses and of clause pairs, plus V if small."""
    seen = set()
    out = []

    def add(vars):
        try:
            cl = compute_closure(inst, vars, R, max_vars=max_vars)
        except BudgetExceeded:
            return
        if len(cl) > max_vars or cl.vars in seen or not cl.clauses:
            return
        seen.add(cl.vars)
        if girth(inst.subinstance(cl.clauses)) == INF:
            out.append(cl.vars)

    if inst.n <= max_vars:
        add(range(1, inst.n + 1))
    for c in range(inst.m):
        add(inst.clauses[c].vars)
    for a, b in itertools.combinations(range(inst.m), 2):
        if inst.clause_sets[a] & inst.clause_sets[b] or len(out) < 50:
            add(inst.clause_sets[a] | inst.clause_sets[b])
    return out


def suite_oracle(inst: Instance, mu: PairwiseDist, cfg: SuiteConfig, roots: int = 5, max_vars: int = 16) -> Report:
    """Product-form table vs the root-propagation oracle on tree-shaped closed domains."""
    viol = []
    domains = tree_domains(inst, max_vars, cfg.closure_radius)
    try:
        for dom in domains:
            table = nu_closed(inst, mu, dom, cfg.table_budget)
            for r in range(roots + 1):
                rng = None if r == 0 else np.random.default_rng(cfg.seed * 1000 + r)
                diff = propagation_oracle(inst, mu, dom, rng).first_difference(table)
                if diff is not None:
                    viol.append({"domain": dom, "order": r, "mask": diff[0], "oracle": diff[1], "table": diff[2]})
    except NormalizationError as e:
        return _error_report("oracle", e)
    return Report("oracle-equivalence", "fail" if viol else "pass", inputs={"roots": roots, "max_vars": max_vars},
                  witness=viol[0] if viol else None, trials=len(domains), violations=viol)


def make_pe(inst: Instance, mu: PairwiseDist, cfg: SuiteConfig) -> PseudoExpectation:
    return PseudoExpectation(inst, mu, cfg.d, cfg.s, cfg.closure_radius, cfg.table_budget)


def suite_completeness(pe: PseudoExpectation) -> Report:
    try:
        return check_completeness_all(pe)
    except NormalizationError as e:
        return _error_report("completeness", e)


def suite_local_psd(pe: PseudoExpectation, cfg: SuiteConfig) -> Report:
    rng = np.random.default_rng(cfg.seed)
    reports = []
    try:
        for ci in range(pe.inst.m):
            reports.append(check_local_psd(pe, pe.inst.clauses[ci].vars, trials=10, seed=cfg.seed + ci))
        for t in range(min(cfg.trials, 20)):
            T = random_local_set(pe.inst, rng, int(rng.integers(1, min(pe.s, 5) + 1)))
            reports.append(check_local_psd(pe, T, trials=10, seed=cfg.seed + t))
    except NormalizationError as e:
        return _error_report("local-psd", e)
    return _fold("local-psd", reports)


def closed_neighborhood(inst: Instance, size: int, seed: int, R: int = DEFAULT_RADIUS, tries: int = 200) -> tuple[int, ...]:
    """A closed set of exactly ``size`` variables grown around a random vertex (closest size if none)."""
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(tries):
        v = int(rng.integers(1, inst.n + 1))
        order = [v]
        seen = {v}
        # nearest vertices first; farther layers let a forest (odd-sized
        # connected closures) reach an even target via a distant vertex
        radius = 0
        while True:
            radius += 1
            layer = sorted(ball(inst, [v], radius) - seen)
            if not layer:
                break
            rng.shuffle(layer)
            order.extend(layer)
            seen.update(layer)
        rest = sorted(set(range(1, inst.n + 1)) - seen)
        rng.shuffle(rest)
        order.extend(rest)
        cur: set[int] = set()
        for u in order:
            try:
                cl = compute_closure(inst, cur | {u}, R, max_vars=4 * size)
            except BudgetExceeded:
                continue
            if len(cl) > size:
                continue
            cur = set(cl.vars)
            if len(cur) == size:
                return tuple(sorted(cur))
        if best is None or abs(len(cur) - size) < abs(len(best) - size):
            best = tuple(sorted(cur))
    return best


def suite_psd(pe: PseudoExpectation, cfg: SuiteConfig) -> Report:
    vars = closed_neighborhood(pe.inst, min(cfg.psd_vars, pe.inst.n), cfg.seed, cfg.closure_radius)
    try:
        M = build_moment_matrix(pe, cfg.d, vars)
    except NormalizationError as e:
        return _error_report("moment-psd", e)
    ex = check_psd_exact(M)
    fl = check_psd_float(M, cfg.psd_tol)
    failed = not ex.psd or not fl.psd or fl.agree is False
    return Report("moment-psd", "fail" if failed else "pass",
                  inputs={"vars": vars, "d": cfg.d, "closed": is_closed(pe.inst, vars, cfg.closure_radius)[0]},
                  witness=ex.to_dict() if not ex.psd else None,
                  details={"size": len(M), "exact": ex.to_dict(), "float": fl.to_dict()})


def suite_orthogonality(pe: PseudoExpectation, cfg: SuiteConfig) -> tuple[Report, object]:
    ordering = build_ordering(pe.inst, cfg.d, cfg.order_budget, cfg.family)
    R = cfg.ball_radius if cfg.ball_radius is not None else ball_radius(pe.inst)
    try:
        basis = orthogonalize_all(pe, ordering, R, check_gram=True)
    except NormalizationError as e:
        return _error_report("orthogonality", e), None
    reports = [
        verify_span(pe, ordering, basis),
        verify_global_orthogonality(pe, ordering, basis, R),
        verify_full_orthogonality(pe, basis),
        check_psd_reconstruction(pe, basis, trials=10, seed=cfg.seed),
    ]
    loc = [verify_local_orthogonality(pe, basis, i) for i in range(len(basis))]
    reports.append(_fold("local-orthogonality", loc))
    reports.append(check_boundary_claims(pe.inst, ordering, min(cfg.trials, 50), cfg.seed, R))
    return _fold("orthogonality", reports, sets=len(basis), restricted=ordering.restricted, ball_radius=R,
                 kernel_nontrivial=len(basis.kernel_flags), boundary=reports[-1].to_dict()), basis


def suite_soundness(inst: Instance, cfg: SuiteConfig) -> Report:
    mode = cfg.soundness_mode
    if mode == "exhaustive" and inst.n > 20:
        mode = "sampled"
    res = max_deviation(inst, mode, cfg.soundness_budget, cfg.seed, cfg.epsilon)
    k = inst.k
    trivial = 1 - 1 / 2**k
    ok = res.max_distance < trivial if res.passed is None else res.passed
    return Report("soundness", "pass" if ok else "fail", inputs={"mode": mode}, details=res.to_dict())


def run_suites(inst: Instance, mu: PairwiseDist, names, cfg: SuiteConfig) -> dict[str, Report]:
    names = list(SUITES) if "all" in names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {', '.join(SUITES)} or all")
    pe = make_pe(inst, mu, cfg)
    out = {}
    for name in names:
        try:
            if name == "pairwise":
                out[name] = suite_pairwise(mu)
            elif name == "closure":
                out[name] = suite_closure(inst, cfg)
            elif name == "consistency":
                out[name] = suite_consistency(inst, mu, cfg)
            elif name == "union":
                out[name] = suite_union(inst, mu, cfg)
            elif name == "oracle":
                out[name] = suite_oracle(inst, mu, cfg)
            elif name == "completeness":
                out[name] = suite_completeness(pe)
            elif name == "local-psd":
                out[name] = suite_local_psd(pe, cfg)
            elif name == "psd":
                out[name] = suite_psd(pe, cfg)
            elif name == "orthogonality":
                out[name] = suite_orthogonality(pe, cfg)[0]
            elif name == "soundness":
                out[name] = suite_soundness(inst, cfg)
        except (NormalizationError, PreconditionError) as e:
            out[name] = _error_report(name, e)
        except BudgetExceeded as e:
            out[name] = Report(name, "skipped", witness={"reason": str(e)})
    return out
