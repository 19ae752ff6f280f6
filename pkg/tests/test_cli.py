import io
import json

import pytest

from hrcsd.cli import main
from hrcsd.csd import CsdDescriptor, descriptor_to_graph
from hrcsd.sgraph import from_json, iso_check

EXAMPLE = "a < < a' a' > > b < b' > b c < c' > d d"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_csd_gen(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, out, _ = run(capsys, "csd", "gen", "n=1", "m=2", "ka=2", "kb=1,0", "kc=1", "kd=0,0", "--json", str(path))
    assert code == 0 and out.strip() == EXAMPLE
    assert json.loads(path.read_text())["descriptor"] == "n=1 m=2 ka=2 kb=1,0 kc=1 kd=0,0"


def test_csd_parse(capsys):
    code, out, _ = run(capsys, "csd", "parse", "a b c d")
    assert code == 0 and out.strip() == "n=1 m=1 ka=0 kb=0 kc=0 kd=0"
    code, out, _ = run(capsys, "csd", "parse", "a < a' a' > b c d")
    assert code == 1 and out.startswith("REJECT bar-count")


def test_csd_usage(capsys):
    assert run(capsys, "csd", "gen")[0] == 2
    assert run(capsys, "csd", "gen", "n=1")[0] == 2


def test_csd_gen_parse_round_trip(capsys, monkeypatch):
    code, out, _ = run(capsys, "csd", "gen", "--random", "500", "--seed", "5")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 500
    monkeypatch.setattr("sys.stdin", io.StringIO(out))
    code, parsed, _ = run(capsys, "csd", "parse")
    assert code == 0
    for line, desc in zip(lines, parsed.splitlines()):
        code, again, _ = run(capsys, "csd", "gen", *desc.split())
        assert again.strip() == line


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "-k", "2", "-e", "edge(rt,a,s)")
    assert code == 0 and len(json.loads(out)["nodes"]) == 2


def test_eval_fig3(capsys):
    code, out, _ = run(capsys, "eval", "-k", "2", "-f", "fixtures/fig3.term")
    assert code == 0
    G1 = descriptor_to_graph(CsdDescriptor.from_tuples((0,), (0, 0), (0,), (0, 0))).graph
    assert iso_check(from_json(out), G1)


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "-k", "2", "-e", "ren(rt,s,edge(rt,a,s))")
    assert code == 1 and "rename collision at path ε" in err
    assert run(capsys, "eval", "-k", "1", "-e", "edge(rt,a,s)")[0] == 1
    assert run(capsys, "eval", "-k", "2")[0] == 2
    assert run(capsys, "eval", "-f", "no/such.term")[0] == 2


def test_eval_is_deterministic(capsys):
    outs = {run(capsys, "eval", "-k", "2", "-f", "fixtures/fig3.term")[1] for _ in range(3)}
    assert len(outs) == 1


def test_derive_and_rel(capsys, tmp_path):
    code, out, _ = run(capsys, "derive", "--by", "yield", "--limit", "6")
    assert code == 0
    assert sorted(l.split("\t")[0] for l in out.splitlines()) == ["a a b c c d", "a b b c d d", "a b c d"]
    path = tmp_path / "rel.json"
    code, out, _ = run(capsys, "rel", "--by", "yield", "--limit", "6", "--json", str(path))
    assert code == 0 and len(json.loads(path.read_text())) == 3
    code, out, _ = run(capsys, "derive", "--grammar", "builtin:csdtag", "--limit", "3")
    assert code == 0 and out


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "boundary", "--cases", "1000", "--seed", "7")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "verify", "lemma5", "--k", "1", "--l", "1", "--cases", "1000")
    assert code == 0 and out.startswith("PASS lemma5")


def test_verify_alignment(capsys):
    code, out, _ = run(capsys, "verify", "alignment", "--grammar", "builtin:csd0")
    assert out.splitlines()[0] == "NOT ALIGNED"
    assert "constant b:" in out
    assert code == 1


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as e:
        main(["verify", "nope"])
    assert e.value.code == 2


def test_pump(capsys):
    code, out, _ = run(capsys, "pump", "--grammar", "builtin:csd0", "--limit", "12", "-i", "0..3", "--audit",
                       "--case-classify")
    assert code == 0
    lines = out.splitlines()
    sizes = [int(l.split()[1].split("=")[1]) for l in lines if l.startswith("i=")]
    assert len(sizes) == 4 and len({b - a for a, b in zip(sizes, sizes[1:])}) == 1
    assert any(l.startswith("PASS lemma10") for l in lines)
    assert any("CORE(a,c) configuration" in l for l in lines)


def test_pump_too_short(capsys):
    assert run(capsys, "pump", "--grammar", "builtin:csd0", "--limit", "2")[0] == 1


def test_export(capsys, tmp_path):
    code, out, _ = run(capsys, "export", "--descriptor", "n=1", "m=1", "ka=0", "kb=0", "kc=0", "kd=0")
    assert code == 0 and out.startswith("digraph")
    dot = tmp_path / "g.dot"
    code, _, _ = run(capsys, "export", "--tree", "fixtures/fig3.tree", "--dot", str(dot))
    assert code == 0 and dot.read_text().count("->") == 6
    assert run(capsys, "export")[0] == 2
