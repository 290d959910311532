import json
import subprocess
import sys
from fractions import Fraction

import pytest

from sosgap.cli import main
from sosgap.pairwise import PairwiseDist
from sosgap.suites import SUITES


@pytest.fixture
def files(tmp_path, path_fixture):
    inst = tmp_path / "inst.json"
    inst.write_text(path_fixture.dumps())
    return tmp_path, inst


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, json.loads(out.out) if out.out.strip() else None, out.err


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, doc, err = run(["gen", "--n", 30, "--seed", 4, "--instance-out", a], capsys)
    assert code == 0 and doc["status"] == "pass"
    run(["gen", "--n", 30, "--seed", 4, "--instance-out", b], capsys)
    assert a.read_text() == b.read_text()
    assert doc["result"]["niceness"]["girth_ok"]
    assert set(doc) == {"tool", "version", "config", "input_hashes", "status", "result"}
    assert "sosgap gen: pass" in err


def test_gen_bad_params(capsys):
    code, doc, _ = run(["gen", "--n", 3, "--gamma", 100], capsys)
    assert code == 2 and doc["status"] == "error"


def test_check_nice(files, capsys, cycle_fixture):
    tmp, inst = files
    code, doc, _ = run(["check-nice", "--instance", inst], capsys)
    assert code == 0
    cyc = tmp / "cyc.json"
    cyc.write_text(cycle_fixture.dumps())
    code, doc, _ = run(["check-nice", "--instance", cyc], capsys)
    assert code == 1 and doc["result"]["short_cycle"]["edges"]


def test_closure(files, capsys):
    _, inst = files
    code, doc, _ = run(["closure", "--instance", inst, "--set", "1,7"], capsys)
    assert code == 0
    assert doc["result"]["vars"] == list(range(1, 8)) and doc["result"]["replay_ok"]
    code, _, _ = run(["closure", "--instance", inst, "--set", "1,99"], capsys)
    assert code == 2


def test_verify_all_on_fixture(files, capsys):
    _, inst = files
    code, doc, _ = run(["verify", "--instance", inst, "--suite", "all", "--trials", 20], capsys)
    assert code == 0, doc["result"]["failed"]
    assert "soundness" not in doc["result"]["suites"]
    assert len(doc["input_hashes"]["instance"]) == 64


def test_verify_all_plus_soundness(files, capsys):
    _, inst = files
    code, doc, _ = run(["verify", "--instance", inst, "--suite", "all", "--suite", "soundness", "--trials", 5], capsys)
    assert set(doc["result"]["suites"]) == set(SUITES)
    # three clauses on seven variables: one assignment puts every clause on the same output
    assert doc["result"]["failed"] == ["soundness"] and code == 1


def test_verify_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, doc, _ = run(["verify", "--instance", bad], capsys)
    assert code == 2
    code, _, _ = run(["verify", "--instance", tmp_path / "missing.json"], capsys)
    assert code == 2
    over = tmp_path / "over.json"
    over.write_text(json.dumps({"k": 3, "probs": {"+++": "3/2"}}))
    good = tmp_path / "inst.json"
    good.write_text(json.dumps({"n": 3, "k": 3, "clauses": [{"vars": [1, 2, 3], "signs": [1, 1, 1]}]}))
    code, doc, _ = run(["verify", "--instance", good, "--mu", f"file:{over}", "--suite", "pairwise"], capsys)
    assert code == 2


def correlated_mu(tmp_path):
    probs = [Fraction(0)] * 8
    probs[0] = probs[7] = Fraction(1, 2)
    p = tmp_path / "mu.json"
    p.write_text(PairwiseDist(3, tuple(probs)).dumps())
    return p


def test_non_pairwise_mu_detected(files, capsys):
    tmp, inst = files
    mu = correlated_mu(tmp)
    code, doc, err = run(["verify", "--instance", inst, "--mu", f"file:{mu}", "--trials", 10], capsys)
    assert code == 1
    assert "pairwise" in doc["result"]["failed"]
    assert doc["result"]["suites"]["pairwise"]["witness"]
    assert "mu" in doc["input_hashes"]


def test_moments(files, capsys):
    _, inst = files
    code, doc, _ = run(["moments", "--instance", inst, "--d", 2], capsys)
    assert code == 0
    assert doc["result"]["exact"]["psd"] and doc["result"]["float"]["agree"]
    assert len(doc["result"]["matrix"]["index"]) == 29


def test_orthogonalize(files, capsys):
    tmp, inst = files
    out = tmp / "basis.json"
    code, doc, _ = run(["orthogonalize", "--instance", inst, "--basis-out", out], capsys)
    assert code == 0
    basis = json.loads(out.read_text())
    assert len(basis) == 29 and basis[0]["set"] == []
    fam = tmp / "fam.json"
    fam.write_text(json.dumps([[], [1], [2], [1, 2], [3]]))
    code, doc, _ = run(["orthogonalize", "--instance", inst, "--restrict", fam], capsys)
    assert code == 0 and doc["result"]["basis"]["restricted"]


def test_orthogonalize_over_budget(tmp_path, capsys):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"n": 40, "k": 3, "clauses": []}))
    code, doc, _ = run(["orthogonalize", "--instance", big, "--mu", "uniform"], capsys)
    assert code == 2 and "--restrict" in doc["result"]["message"]


def test_soundness(capsys):
    code, doc, _ = run(["soundness", "--n", 12, "--m", 96, "--randomize-signs", "--seed", 1], capsys)
    assert code == 0
    assert doc["result"]["mode"] == "exhaustive"
    assert Fraction(doc["result"]["max_distance"]) < Fraction(7, 8)
    code, _, _ = run(["soundness", "--n", 30, "--m", 60], capsys)
    assert code == 2
    code, doc, _ = run(["soundness", "--n", 30, "--m", 60, "--mode", "sampled", "--budget", 200], capsys)
    assert doc["result"]["mode"] == "sampled"


def test_entry_point(files):
    _, inst = files
    r = subprocess.run([sys.executable, "-m", "sosgap", "closure", "--instance", str(inst), "--set", "1,5", "--radius", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["vars"] == [1, 2, 3, 4, 5]
