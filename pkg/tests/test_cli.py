import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mvlattice.cli import main

FIX = Path(__file__).resolve().parents[1] / "src" / "mvlattice" / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

DOC = """
lattice D { elems 0 x y 1; covers 0<x<1 0<y<1; mult meet }
lattice C { elems 0 lo hi 1; covers 0<lo<1 0<hi<1; mult meet }
term t(a, b) = or(a, and(b, y));
mvset A over D C { (x, lo) }
mvset B over D C { (y, hi), (1, lo) }
set S over D { x }
set T over D { y }
"""


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def doc(tmp_path):
    p = tmp_path / "doc.txt"
    p.write_text(DOC)
    return p


def test_lattice_check_on_fixture():
    code, out, _ = call("lattice", "check", FIX / "L.lat")
    assert code == 0
    for key in ("distributive", "atomic", "residuated", "integrally closed"):
        assert f"{key}: yes" in out
    assert out.startswith("lattice L: 32 elements")


def test_lattice_check_reports_failures(tmp_path):
    p = tmp_path / "n5.lat"
    p.write_text("lattice N5 { elems 0 a b c 1; covers 0<a<b<1 0<c<1 }")
    code, out, _ = call("lattice", "check", p)
    assert code == 0
    assert "distributive: no" in out and "residuated: no" in out


def test_lattice_check_json():
    code, out, _ = call("lattice", "check", FIX / "L2.lat", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["atoms"] == ["ba0", "b", "bn0"] and data["distributive"] is True


def test_lattice_show():
    code, out, _ = call("lattice", "show", FIX / "L1.lat")
    assert code == 0
    assert "covers: 0<c 0<d c<h d<h" in out
    code, out, _ = call("lattice", "show", FIX / "hybrid.map", "--name", "M", "--format", "json")
    assert json.loads(out)["unit"] == "sure"


def test_lattice_choice_is_required_when_ambiguous(doc):
    code, _, err = call("lattice", "check", doc)
    assert code == 1 and err.startswith("UnresolvedReference:")
    assert call("lattice", "check", doc, "--name", "C")[0] == 0


def test_invalid_lattice_is_a_domain_error(tmp_path):
    p = tmp_path / "bad.lat"
    p.write_text("lattice bad { elems 0 a b; covers 0<a 0<b }")
    code, out, err = call("lattice", "check", p)
    assert code == 1 and out == ""
    assert err.startswith("NotALattice: ") and "'a'" in err and "'b'" in err


def test_syntax_error_is_a_domain_error(tmp_path):
    p = tmp_path / "bad.lat"
    p.write_text("lattice bad {\n  elems 0 a;\n  covers 0 a\n}")
    code, _, err = call("lattice", "check", p)
    assert code == 1 and err.strip() == "DSLSyntaxError: line 3, col 12: expected '<', found 'a'"


def test_map_run_single():
    code, out, err = call("map", "run", "--weights", "single:1", "--combine", "join", FIX / "hybrid.map")
    assert code == 0 and err == ""
    assert out == (GOLDEN / "hybrid_single1_join.tsv").read_text()


def test_map_run_zero_budget():
    code, out, err = call("map", "run", "--max-iter", "0", FIX / "hybrid.map")
    assert code == 1
    assert err.startswith("NotConverged:")
    assert out.count("\n") == 6


def test_map_run_markdown_to_file(tmp_path):
    target = tmp_path / "trace.md"
    code, out, err = call("map", "run", "--combine", "sum", "--weights", "enumerate",
                          "--format", "markdown", "--output", target, FIX / "hybrid.map")
    assert code == 0 and out == ""
    assert "cycle persisted" in err
    assert target.read_text() == (GOLDEN / "hybrid_enumerate_sum.md").read_text()


def test_map_run_is_deterministic():
    a = call("map", "run", "--weights", "enumerate", "--branch-depth", "2", FIX / "hybrid.map")
    b = call("map", "run", "--weights", "enumerate", "--branch-depth", "2", FIX / "hybrid.map")
    assert a == b and a[0] == 0


@pytest.mark.parametrize("argv", [
    ["map", "run", "--weights", "single:x", "f"],
    ["map", "run", "--weights", "median", "f"],
    ["map", "run", "--combine", "max", "f"],
    ["map", "run", "--max-iter", "-1", "f"],
    ["map", "run", "--branch-depth", "0", "f"],
    ["mean", "f", "--kind", "average", "S", "T"],
    ["lattice"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == ""
    assert err.startswith("usage:")


def test_missing_file_is_usage_error():
    code, _, err = call("lattice", "check", "/nonexistent/x.lat")
    assert code == 2 and "cannot read" in err


def test_unknown_matrix_is_domain_error():
    code, _, err = call("map", "run", "--weights", "single:3", FIX / "hybrid.map")
    assert code == 1 and err.startswith("MapSpecError:")


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_eval(doc):
    code, out, _ = call("eval", doc, "--lattice", "D", "--term", "t", "--at", "a=x", "b=1")
    assert (code, out) == (0, "1\n")
    code, out, _ = call("eval", doc, "--lattice", "D", "--term", "and(p, q)", "--at", "p=x", "q=1")
    assert (code, out) == (0, "x\n")
    code, _, err = call("eval", doc, "--lattice", "D", "--term", "t", "--at", "a=x")
    assert code == 1 and err.startswith("MissingVariable:")
    code, _, err = call("eval", doc, "--lattice", "D", "--term", "t", "--at", "a=q", "b=x")
    assert code == 1 and err.startswith("ForeignElement:") and "'q'" in err
    assert call("eval", doc, "--lattice", "D", "--term", "t", "--at", "ax")[0] == 2


def test_eval_repeated_at_flags():
    code, out, _ = call("eval", FIX / "L1.lat", "--term", "imp(x, y)", "--at", "x=c", "--at", "y=d")
    assert (code, out) == (0, "d\n")


def test_literals_default_to_the_main_lattice():
    assert call("mean", FIX / "L1.lat", "--kind", "optimistic", "{c}", "{d, 0}")[1] == "{c, h}\n"
    assert call("diff", FIX / "L2.lat", "{bora, b}", "{b}")[1] == "{0, ba0}\n"
    code, _, err = call("extend", FIX / "hybrid.map", "--scale", "M", "--term", "or(x, y)", "{(0c, lo)}")
    assert code == 1 and "--lattice" in err
    code, out, _ = call("extend", FIX / "hybrid.map", "--lattice", "L", "--scale", "M",
                        "--term", "or(x, y)", "{(0c, lo)}", "{(0d, mid)}")
    assert (code, out) == (0, "{(0h, lomid)}\n")


def test_extend(doc):
    code, out, _ = call("extend", doc, "--term", "or(p, q)", "A", "B")
    assert code == 0 and out == "{(1, 1)}\n"
    code, out, _ = call("extend", doc, "--term", "or(p, q)", "--classical", "A", "B")
    assert code == 0 and out == "{(1, lo)}\n"
    code, out, _ = call("extend", doc, "--lattice", "D", "--scale", "C", "--term", "or(p, q)",
                        "{(x, lo)}", "{(0, 1)}")
    assert out == "{(x, 1)}\n"  # lo v 1 in the scale
    code, _, err = call("extend", doc, "--term", "t", "A", "B")
    assert code == 1 and err.startswith("UnknownConstant:")
    assert call("extend", doc, "--term", "or(p, q)", "{(x, lo)}", "B")[0] == 2


def test_mean_and_diff(doc):
    assert call("mean", doc, "--kind", "optimistic", "S", "T") == (0, "{1}\n", "")
    assert call("mean", doc, "--kind", "pessimistic", "S", "T") == (0, "{0}\n", "")
    assert call("mean", doc, "--kind", "pessimistic", "--lattice", "D", "{x, y}", "{x}")[1] == "{0, x}\n"
    code, out, _ = call("mean", doc, "--kind", "optimistic", "A", "B")
    assert code == 0 and out == "{(1, 1)}\n"
    assert call("diff", doc, "S", "T") == (0, "{x, y}\n", "")
    assert call("diff", doc, "--lattice", "D", "{x}", "{x}")[1] == "{0}\n"
    code, _, err = call("mean", doc, "--kind", "optimistic", "S")
    assert code == 1 and err.startswith("FewerThanTwoSets:")
    code, _, err = call("diff", doc, "S", "Q")
    assert code == 1 and err.startswith("UnresolvedReference:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mvlattice", "lattice", "check", str(FIX / "L1.lat")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "distributive: yes" in proc.stdout


def test_env_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("MVCM_MAX_LATTICE", "16")
    code, _, err = call("lattice", "check", FIX / "L.lat")
    assert code == 1 and err.startswith("LatticeTooLarge:")
