"""Generate a pruned instance and run every verify suite on it via the CLI.

    python scripts/full_verification.py --n 12 --seed 1 --out-dir runs/
"""
import argparse
from pathlib import Path

from sosgap.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--mu", default="parity+")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--out-dir", default="runs")
    ap.add_argument("--soundness", action="store_true", help="also run the soundness suite (needs m >> n)")
    a = ap.parse_args()
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inst = out / f"instance_n{a.n}_s{a.seed}.json"
    code = cli(["gen", "--n", str(a.n), "--gamma", str(a.gamma), "--seed", str(a.seed),
                "--instance-out", str(inst), "--out", str(out / "gen.json")])
    if code == 2:
        return code
    suites = ["--suite", "all"] + (["--suite", "soundness"] if a.soundness else [])
    code = cli(["verify", "--instance", str(inst), "--mu", a.mu, *suites,
                "--trials", str(a.trials), "--seed", str(a.seed), "--out", str(out / "verify.json")])
    print(f"reports in {out}/")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
