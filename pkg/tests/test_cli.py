import json
import subprocess
import sys
from pathlib import Path

import pytest

from pfspec.cli import main

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


@pytest.fixture(autouse=True)
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PFSPEC_CACHE_DIR", str(tmp_path / "cache"))


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_sat_involution(capsys, schema):
    code, out, _ = run(capsys, "sat", CORPUS / "involution.mso")
    v = json.loads(out)
    schema("verdict.json", v)
    assert code == 0 and v["status"] == "SAT" and v["size"] == 2


def test_sat_exit_codes(capsys):
    code, out, _ = run(capsys, "sat", CORPUS / "contradiction.mso")
    assert code == 1 and json.loads(out)["status"] == "UNSAT"
    code, out, _ = run(capsys, "sat", CORPUS / "contradiction.mso", "--max-size", 2)
    assert code == 3 and json.loads(out)["status"] == "RESOURCE_LIMIT"
    code, _, err = run(capsys, "sat", CORPUS / "missing.mso")
    assert code == 2 and "cannot read" in err
    assert run(capsys, "frobnicate")[0] == 2


def test_eq(capsys):
    code, out, _ = run(capsys, "eq", "--a", CORPUS / "c2.json", "--b", CORPUS / "c3.json", "--d", 0)
    assert code == 0 and out.strip() == "equal"
    code, out, _ = run(capsys, "eq", "--a", CORPUS / "c2.json", "--b", CORPUS / "c3.json", "--d", 1,
                       "--oracle", "ef")
    assert code == 1 and out.strip() == "different"


def test_spectrum_and_certificate(capsys, tmp_path, schema):
    code, out, _ = run(capsys, "spectrum", CORPUS / "identity.mso", "--N", 6)
    data = json.loads(out)
    schema("spectrum.json", data)
    assert code == 0 and data["prefix"][1:] == [True] * 6
    cert = tmp_path / "cert.json"
    run(capsys, "spectrum", CORPUS / "fixed_point.mso", "--N", 12, "--cert", cert)
    c = json.loads(cert.read_text())
    schema("certificate.json", c)
    assert c["p"] == 60 and c["flags"] == ["period_from_closure"]
    code, out, _ = run(capsys, "--format", "csv", "spectrum", CORPUS / "involution.mso", "--N", 4)
    assert out.splitlines() == ["n,member", "0,0", "1,0", "2,1", "3,0", "4,1"]


def test_theory_digest_is_deterministic(capsys):
    a = run(capsys, "theory", "--graph", CORPUS / "c2.json", "--d", 1)[1]
    b = run(capsys, "theory", "--graph", CORPUS / "c2.json", "--d", 1)[1]
    assert a == b and len(a.strip()) == 64


def test_translate_and_check(capsys):
    code, out, _ = run(capsys, "--format", "text", "translate", CORPUS / "identity.mso")
    assert out.strip() == "(forall x. E(x,x)) & OrphanEmpty"
    assert run(capsys, "check", "--graph", CORPUS / "c2.json", "--formula", CORPUS / "involution.mso")[0] == 0
    assert run(capsys, "check", "--graph", CORPUS / "c3.json", "--formula", CORPUS / "involution.mso")[0] == 1


def test_closure_cache_and_out(capsys, tmp_path, schema):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert run(capsys, "closure", "--d", 0, "--out", out1)[0] == 0
    assert run(capsys, "closure", "--d", 0, "--out", out2)[0] == 0  # from cache
    assert out1.read_bytes() == out2.read_bytes()
    schema("table.json", json.loads(out1.read_text()))
    assert list((tmp_path / "cache").glob("closure-*.json"))
    code, out, _ = run(capsys, "closure", "--d", 0, "--no-cache", "--eager")
    assert json.loads(out)["ops"]


def test_pump(capsys, schema):
    code, out, _ = run(capsys, "pump", "--graph", CORPUS / "loops3.json", "--d", 0,
                       "--thresholds", "case1=2,case3=2,case4=2")
    data = json.loads(out)
    schema("pump.json", data)
    assert code == 0 and data["case"] == 1 and data["size"] == 9
    code, out, _ = run(capsys, "pump", "--graph", CORPUS / "c2.json", "--d", 0)
    assert code == 1 and json.loads(out)["case"] is None


def test_enum(capsys, schema):
    code, out, _ = run(capsys, "enum", "--class", "fn", "--n", 3)
    lines = [json.loads(line) for line in out.splitlines()]
    assert lines[-1] == {"count": 7} and len(lines) == 8
    for g in lines[:-1]:
        schema("graph.json", g)
    lines = run(capsys, "enum", "--class", "tree", "--n", 4, "--palette", "r,g")[1].splitlines()
    assert json.loads(lines[-1])["count"] == len(lines) - 1


def test_epset(capsys, schema):
    a, b = CORPUS / "zero_then_odds.json", CORPUS / "four_mod_three.json"
    code, out, _ = run(capsys, "epset", "sumset", a, b)
    schema("epset.json", json.loads(out))
    assert json.loads(out) == {"sporadic": [4, 7], "progressions": [[9, 1]]}
    assert json.loads(run(capsys, "epset", "strict_threshold", a, "--p", 2)[1])["strict_threshold"] == 3
    assert json.loads(run(capsys, "epset", "least_period", a)[1]) == {"least_period": 2}
    assert run(capsys, "epset", "least_period", a, b)[0] == 2
    assert run(capsys, "epset", "strict_threshold", a, "--p", 3)[0] == 2


def test_verify_is_reproducible(capsys):
    a = run(capsys, "--seed", 5, "verify", "--n", 2, "--samples", 10)
    b = run(capsys, "--seed", 5, "verify", "--n", 2, "--samples", 10)
    assert a[0] == 0 and a[1] == b[1]
    assert "seed 5" in a[2]


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "pfspec.cli", "enum", "--n", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[-1] == '{"count": 3}'
