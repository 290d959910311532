"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input or
configuration. Machine output is JSON (stdout or --out); a one-line human
summary goes to stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .closure import DEFAULT_RADIUS, compute_closure, replay_trace
from .errors import BudgetExceeded, NormalizationError, ParameterError, PreconditionError, SchemaError
from .instance import NiceParams, check_nice, generate_random, load_instance, prune_cycles, random_m_clauses, serialize_instance
from .localdist import TABLE_BUDGET
from .pairwise import builtin_mu
from .pseudo import PseudoExpectation, build_moment_matrix, check_psd_exact, check_psd_float, degree_presets
from .reports import jsonable
from .soundness import max_deviation, asymptotic_clause_requirement, randomize_signs
from .suites import SUITES, SuiteConfig, run_suites, suite_orthogonality

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    args: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, **{k: v for k, v in sorted(self.args.items()) if k not in ("func", "out")}}


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e


def _load_instance(path: str, hashes: dict):
    data = _read(path)
    hashes["instance"] = sha256_bytes(data)
    return load_instance(data)


def _mu(name: str, k: int, hashes: dict):
    if name.startswith("file:"):
        hashes["mu"] = sha256_bytes(_read(name[5:]))
    return builtin_mu(name, k)


def _envelope(cfg: RunConfig, hashes: dict, status: str, result) -> dict:
    return {
        "tool": "sosgap",
        "version": __version__,
        "config": cfg.to_dict(),
        "input_hashes": hashes,
        "status": status,
        "result": jsonable(result),
    }


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _suite_config(a) -> SuiteConfig:
    return SuiteConfig(
        d=a.d, s=a.s, closure_radius=a.radius, ball_radius=a.ball_radius, table_budget=a.table_budget,
        trials=a.trials, seed=a.seed, soundness_mode=getattr(a, "mode", "exhaustive"),
        soundness_budget=getattr(a, "budget", 10_000), epsilon=getattr(a, "epsilon", None),
        order_budget=getattr(a, "order_budget", 120),
    )


def _read_family(path: str) -> list:
    try:
        fam = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON in {path}: {e}") from e
    if not isinstance(fam, list) or not all(isinstance(S, list) and all(isinstance(v, int) for v in S) for S in fam):
        raise SchemaError("restriction file must be a JSON list of variable lists")
    return fam


# -- commands -------------------------------------------------------------


def cmd_gen(a, cfg, hashes):
    params = NiceParams(a.k, a.gamma, delta=a.delta, closure_radius=a.radius, expansion_radius=a.expansion_radius)
    raw = generate_random(a.n, a.k, a.gamma, a.seed)
    inst, removed = prune_cycles(raw, params.girth_bound(a.n), seed=a.seed)
    nice = check_nice(inst, params)
    text = serialize_instance(inst)
    if a.instance_out:
        Path(a.instance_out).write_text(text, encoding="utf-8")
    hashes["generated_instance"] = sha256_bytes(text.encode())
    result = {"raw_clauses": raw.m, "removed": len(removed), "clauses": inst.m, "niceness": nice.to_dict()}
    if not a.instance_out:
        result["instance"] = inst.to_dict()
    return ("pass" if nice.ok else "fail"), result


def cmd_check_nice(a, cfg, hashes):
    inst = _load_instance(a.instance, hashes)
    params = NiceParams(inst.k, a.gamma, delta=a.delta, closure_radius=a.radius, expansion_radius=a.expansion_radius)
    nice = check_nice(inst, params)
    return ("pass" if nice.ok else "fail"), nice.to_dict()


def cmd_closure(a, cfg, hashes):
    inst = _load_instance(a.instance, hashes)
    S = [int(v) for v in a.set.split(",") if v]
    if any(not 1 <= v <= inst.n for v in S):
        raise ParameterError(f"set {S} has variables outside 1..{inst.n}")
    cl = compute_closure(inst, S, a.radius, max_vars=a.max_vars)
    result = {**cl.to_dict(), "trace": [[p.to_dict() for p in batch] for batch in cl.trace],
              "replay_ok": replay_trace(inst, S, cl)}
    return ("pass" if result["replay_ok"] else "fail"), result


def cmd_verify(a, cfg, hashes):
    inst = _load_instance(a.instance, hashes)
    mu = _mu(a.mu, inst.k, hashes)
    names = a.suite or ["all"]
    if "all" in names:
        # soundness is a statement about many clauses, run only on request
        names = [s for s in SUITES if s != "soundness" or s in names]
    reports = run_suites(inst, mu, names, _suite_config(a))
    failed = [n for n, r in reports.items() if r.status == "fail"]
    skipped = [n for n, r in reports.items() if r.status == "skipped"]
    result = {"suites": {n: r.to_dict() for n, r in reports.items()}, "failed": failed, "skipped": skipped}
    return ("fail" if failed else "pass"), result


def cmd_moments(a, cfg, hashes):
    inst = _load_instance(a.instance, hashes)
    mu = _mu(a.mu, inst.k, hashes)
    pe = PseudoExpectation(inst, mu, a.d, a.s, a.radius, a.table_budget)
    vars = [int(v) for v in a.vars.split(",")] if a.vars else None
    try:
        M = build_moment_matrix(pe, a.d, vars)
    except NormalizationError as e:
        return "fail", {"error": "NormalizationError", "message": str(e)}
    result = {"matrix": M.to_dict(), "presets": degree_presets(inst, NiceParams(inst.k, a.gamma))}
    ok = True
    if a.arith in ("exact", "both"):
        ex = check_psd_exact(M)
        result["exact"] = ex.to_dict()
        ok &= ex.psd
    if a.arith in ("float", "both"):
        fl = check_psd_float(M, a.tol)
        result["float"] = fl.to_dict()
        ok &= fl.psd and fl.agree is not False
    return ("pass" if ok else "fail"), result


def cmd_orthogonalize(a, cfg, hashes):
    inst = _load_instance(a.instance, hashes)
    mu = _mu(a.mu, inst.k, hashes)
    sc = _suite_config(a)
    if a.restrict:
        hashes["restrict"] = sha256_bytes(_read(a.restrict))
        sc.family = _read_family(a.restrict)
    pe = PseudoExpectation(inst, mu, a.d, a.s, a.radius, a.table_budget)
    try:
        report, basis = suite_orthogonality(pe, sc)
    except BudgetExceeded as e:
        raise BudgetExceeded(f"{e}; use --restrict with a JSON list of sets to orthogonalize a sub-family") from e
    result = {"verification": report.to_dict(), "basis": None if basis is None else basis.to_dict()}
    if a.basis_out and basis is not None:
        Path(a.basis_out).write_text(json.dumps(basis.to_list(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
        result["basis"] = {"written_to": a.basis_out, "size": len(basis)}
    return ("pass" if report.ok else "fail"), result


def cmd_soundness(a, cfg, hashes):
    if a.instance:
        inst = _load_instance(a.instance, hashes)
    else:
        inst = random_m_clauses(a.n, a.k, a.m, a.seed)
    if a.randomize_signs:
        inst = randomize_signs(inst, a.seed)
    mode = a.mode
    if mode == "exhaustive" and inst.n > 20:
        raise ParameterError("exhaustive mode needs n <= 20; use --mode sampled")
    res = max_deviation(inst, mode, a.budget, a.seed, a.epsilon)
    result = {**res.to_dict(), "trivial_bound": f"1 - 1/2^{inst.k}"}
    if a.epsilon:
        result["asymptotic_requirement"] = asymptotic_clause_requirement(inst.n, inst.k, a.epsilon)
    if res.passed is None:
        ok = res.max_distance < 1 - Fraction(1, 2**inst.k)
    else:
        ok = res.passed
    return ("pass" if ok else "fail"), result


# -- parser ---------------------------------------------------------------


def _common(p, instance=True, mu=False, degree=False):
    if instance:
        p.add_argument("--instance", required=True, help="instance JSON file")
    if mu:
        p.add_argument("--mu", default="parity+", help="uniform | parity+ | parity- | file:<path>")
    if degree:
        p.add_argument("--d", type=int, default=2, help="degree")
        p.add_argument("--s", type=int, default=None, help="degree cap (default 2d + k)")
        p.add_argument("--table-budget", type=int, default=TABLE_BUDGET)
        p.add_argument("--ball-radius", type=int, default=None)
    p.add_argument("--radius", type=int, default=DEFAULT_RADIUS, help="closure radius R_cl")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="accepted for config compatibility; runs are sequential")
    p.add_argument("--out", default=None, help="report path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sosgap", description="Build and verify SOS gap-instance objects at desk scale.")
    ap.add_argument("--version", action="version", version=f"sosgap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate, prune and check a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1 / 200)
    p.add_argument("--expansion-radius", type=int, default=None)
    p.add_argument("--instance-out", default=None, help="write the pruned instance here")
    _common(p, instance=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check-nice", help="girth and expansion report")
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1 / 200)
    p.add_argument("--expansion-radius", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_check_nice)

    p = sub.add_parser("closure", help="R-closure of a variable set")
    p.add_argument("--set", required=True, help="comma-separated variables")
    p.add_argument("--max-vars", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", action="append", choices=list(SUITES) + ["all"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--order-budget", type=int, default=120, help="max number of sets to orthogonalize")
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--epsilon", type=float, default=None)
    _common(p, mu=True, degree=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("moments", help="moment matrix and PSD certificate")
    p.add_argument("--vars", default=None, help="comma-separated variables (default all)")
    p.add_argument("--arith", choices=["exact", "float", "both"], default="both")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--gamma", type=float, default=2.0, help="only for the reported degree presets")
    _common(p, mu=True, degree=True)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("orthogonalize", help="build and verify the orthogonal basis")
    p.add_argument("--restrict", default=None, help="JSON list of sets to orthogonalize instead of all")
    p.add_argument("--basis-out", default=None)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--order-budget", type=int, default=120, help="max number of sets to orthogonalize")
    _common(p, mu=True, degree=True)
    p.set_defaults(func=cmd_orthogonalize)

    p = sub.add_parser("soundness", help="max statistical distance of clause outputs from uniform")
    p.add_argument("--instance", default=None)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--randomize-signs", action="store_true")
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--epsilon", type=float, default=None)
    _common(p, instance=False)
    p.set_defaults(func=cmd_soundness)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    cfg = RunConfig(a.command, vars(a))
    hashes: dict = {}
    try:
        status, result = a.func(a, cfg, hashes)
    except (SchemaError, ParameterError, PreconditionError, BudgetExceeded, InputError) as e:
        doc = _envelope(cfg, hashes, "error", {"error": type(e).__name__, "message": str(e)})
        _emit(doc, a.out)
        print(f"sosgap {a.command}: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    _emit(_envelope(cfg, hashes, status, result), a.out)
    print(f"sosgap {a.command}: {status}", file=sys.stderr)
    return EXIT_OK if status == "pass" else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
