import csv
import json
import subprocess
import sys

import pytest

from hopcirc.cli import main
from hopcirc.cot import YES, constant_params, dump_params
from hopcirc.fp import FpMatrix, format_fixture, from_float
from hopcirc.problems import ELEMENTS, perm_token


def run(*argv):
    return main([str(a) for a in argv])


def test_compile_attn_report(tmp_path, capsys):
    rep = tmp_path / "attn.json"
    assert run("compile", "--construct", "attn", "--n", 2, "--d", 2, "--p", 4,
               "--out", tmp_path / "attn.net", "--report", rep) == 0
    data = json.loads(rep.read_text())
    assert data["verdict"] == "PASS"
    assert data["measured_depth"] == data["formula_depth"] == "4d_std + 3d_⊕ + d_exp"
    for key in ("version", "config_hash", "seed", "tolerances", "backend"):
        assert key in data
    assert "PASS" in capsys.readouterr().out


def test_compile_khop_and_kattn(tmp_path, capsys):
    assert run("compile", "--construct", "khop", "--n", 2, "--d", 2, "--p", 4) == 0
    assert "10d_std + 8d_⊕ + d_exp" in capsys.readouterr().out
    rep = tmp_path / "k.json"
    assert run("compile", "--construct", "kattn", "--report", rep) == 0
    data = json.loads(rep.read_text())
    assert data["alternate_formula"] == "3d_std + 2d_⊕ + d_exp" and data["note"]


def test_unknown_construct_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        run("compile", "--construct", "conv")
    assert exc.value.code == 2


def test_config_hash_is_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("compile", "--construct", "matmul", "--report", a)
    run("compile", "--construct", "matmul", "--report", b)
    assert json.loads(a.read_text())["config_hash"] == json.loads(b.read_text())["config_hash"]


def test_verify_fresh_and_corrupted(tmp_path):
    net = tmp_path / "fnn.net"
    assert run("compile", "--construct", "fnn", "--p", 4, "--out", net) == 0
    rep = tmp_path / "v.json"
    assert run("verify", "--netlist", net, "--random", 50, "--report", rep) == 0
    data = json.loads(rep.read_text())
    assert data["agreed"] == data["cases"] == 50

    # flip one concrete gate inside the first multiplication
    lines = net.read_text().splitlines()
    body = [i for i, ln in enumerate(lines) if not ln.startswith("#") and " and " in f" {ln} "
            and "@" in ln]
    bad = tmp_path / "bad.net"
    rep = tmp_path / "bad.json"
    # not every single-gate fault is visible on random inputs; take the first that is
    for k in body[len(body) // 3::max(1, len(body) // 40)]:
        mutated = lines[:k] + [lines[k].replace(" and ", " or ", 1)] + lines[k + 1:]
        bad.write_text("\n".join(mutated) + "\n")
        if run("verify", "--netlist", bad, "--random", 20, "--report", rep) == 1:
            break
    else:
        pytest.fail("no injected fault was observable")
    div = json.loads(rep.read_text())["divergence"]
    assert div["gate"] >= 0


def test_verify_fixture_shape_mismatch(tmp_path):
    net = tmp_path / "mm.net"
    run("compile", "--construct", "matmul", "--n", 2, "--d", 2, "--p", 4, "--out", net)
    f = tmp_path / "a.txt"
    f.write_text(format_fixture(FpMatrix.identity(3, 4)))
    assert run("verify", "--netlist", net, "--inputs", f, f) == 2


def test_verify_with_fixtures(tmp_path):
    net = tmp_path / "mm.net"
    run("compile", "--construct", "matmul", "--n", 2, "--d", 2, "--p", 4, "--out", net)
    f = tmp_path / "i.txt"
    f.write_text(format_fixture(FpMatrix.identity(2, 4)))
    assert run("verify", "--netlist", net, "--inputs", f, f) == 0


def test_depth_command(tmp_path, capsys):
    assert run("depth", "--construct", "mhn", "--m", 2, "--p", 4) == 0
    assert "3d_f" in capsys.readouterr().out
    assert run("depth", "--construct", "mhn", "--m", 2, "--p", 4, "--expand-groups") == 0
    assert "INFO" in capsys.readouterr().out
    assert run("depth") == 2


def test_gen(tmp_path):
    out = tmp_path / "c.jsonl"
    assert run("gen", "--kind", "connectivity", "--count", 6, "--size", 12, "--out", out) == 0
    rows = [json.loads(x) for x in out.read_text().splitlines()]
    assert [r["label"] for r in rows] == [True, False] * 3
    assert run("gen", "--kind", "tree_iso", "--size", 1, "--label", "false") == 2
    out2 = tmp_path / "c2.jsonl"
    run("gen", "--kind", "connectivity", "--count", 6, "--size", 12, "--out", out2)
    assert out.read_text() == out2.read_text()


def test_retrieve(tmp_path, capsys):
    p = 24
    xi = FpMatrix.identity(4, p)
    (tmp_path / "xi.txt").write_text(format_fixture(xi))
    q = FpMatrix.column([from_float(v, p) for v in (0.95, 0.05, 0.0, 0.02)])
    (tmp_path / "q.txt").write_text(format_fixture(q))
    assert run("retrieve", "--patterns", tmp_path / "xi.txt", "--query", tmp_path / "q.txt",
               "--beta", "32", "--steps", 2, "--energy") == 0
    out = capsys.readouterr().out
    assert "energy:" in out
    assert run("retrieve", "--patterns", tmp_path / "xi.txt", "--query", tmp_path / "q.txt",
               "--beta", "32", "--kernel-w", tmp_path / "xi.txt") == 0
    assert run("retrieve", "--patterns", tmp_path / "nope.txt", "--query", tmp_path / "q.txt",
               "--beta", "1") == 2


def test_cot_run(tmp_path, capsys):
    vocab = [perm_token(e) for e in ELEMENTS] + [YES, "no"]
    dump_params(constant_params(vocab, YES, 4, 8, 8), tmp_path / "params.json")
    inst = tmp_path / "w.jsonl"
    run("gen", "--kind", "s5_word", "--count", 3, "--size", 4, "--out", inst)
    rep = tmp_path / "cot.json"
    assert run("cot-run", "--params", tmp_path / "params.json", "--instance", inst,
               "--report", rep) == 0
    assert all(r["answer"] is True for r in json.loads(rep.read_text())["results"])
    assert run("cot-run", "--params", tmp_path / "params.json", "--instance", inst,
               "--steps", 4) == 2


def test_experiment_and_report(tmp_path):
    out = tmp_path / "res"
    assert run("experiment", "oracle_crosscheck", "--out", out, "--param", "count=50",
               "--param", "max_tree_nodes=5") == 0
    data = json.loads((out / "oracle_crosscheck.json").read_text())
    assert data["verdict"] == "PASS" and data["summary"]["all_pass"]
    with open(out / "oracle_crosscheck.csv") as fh:
        assert next(csv.reader(fh)) == ["family", "checked", "mismatches"]
    assert run("experiment", "energy_trace", "--out", out, "--param", "steps=3") == 0
    assert run("experiment", "bogus", "--out", out) == 2
    assert run("report", out) == 0
    bad = dict(data, verdict="FAIL")
    (out / "z.json").write_text(json.dumps(bad))
    assert run("report", out) == 1


def test_concrete_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("HOPCIRC_MAX_CONCRETE_P", "3")
    # above the cap scalar ops become macro gates; depth bookkeeping is unchanged
    assert run("compile", "--construct", "fnn", "--p", 4) == 0


def test_entry_point_module():
    out = subprocess.run([sys.executable, "-m", "hopcirc.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "hopcirc" in out.stdout
