import io

import pytest

from ptyterm.cli import main
from ptyterm.derivation import check_derivation, deserialize
from ptyterm.types import NULL

from conftest import DATA


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_eval_identity_repeats():
    code, text = run("eval", "I", "--steps", "3")
    assert code == 0
    assert text.splitlines() == [r"<1 \x. x>"] * 4


def test_eval_with_limit():
    assert run("eval", "omega", "--steps", "1", "--limit", "1")[0] == 0
    code, text = run("eval", "DD", "--steps", "4", "--limit", "1")
    assert code == 1


def test_approx():
    assert run("approx", "omega", "--steps", "9")[1].strip() == "P^9=0 eT^9=9"
    assert run("approx", "I", "--steps", "0")[1].strip() == "P^0=1 eT^0=0"
    code, text = run("approx", "DD", "--steps", "6", "--decimal", "3")
    assert text.startswith("P^6=7/8 eT^6=7/2") and "0.875" in text


def test_term_from_file(tmp_path):
    f = tmp_path / "t.lam"
    f.write_text(r"(\x. x) (+) (\x. x x) (\x. x x)")
    code, text = run("approx", str(f), "--steps", "3", "--mode", "cbn")
    assert code == 0 and text.startswith("P^3=1/2")


def test_check():
    code, text = run("check", str(DATA / "phi3.deriv"))
    assert code == 0 and text.strip() == "weight=7/2 type=<1/8 [], 1/4 [], 1/2 []> tight=true norm=7/8"
    code, text = run("check", str(DATA / "omega_zero.deriv"))
    assert text.strip() == "weight=0 type=<> tight=true norm=0"
    code, text = run("check", str(DATA / "sigma1.deriv"))
    assert "norm=n/a" in text


def test_check_corrupted(tmp_path, capsys):
    f = tmp_path / "bad.deriv"
    f.write_text((DATA / "phi3.deriv").read_text().replace("7/2", "5", 1))
    code, _ = run("check", str(f))
    assert code == 1
    assert "weight mismatch" in capsys.readouterr().err


def test_check_from_stdin(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO((DATA / "theta2.deriv").read_text()))
    code, text = run("check", "-")
    assert code == 0 and text.startswith("weight=3/2")


def test_synthesize_round_trips():
    code, text = run("synthesize", "DD", "--steps", "6")
    assert code == 0 and text.startswith("; weight=7/2")
    assert check_derivation(deserialize(text)).weight == 7 / 2
    code, text = run("synthesize", "omega", "--steps", "4", "--null", "--mode", "cbn")
    assert check_derivation(deserialize(text, "cbn"), "cbn").rhs == NULL


def test_reduce_deriv():
    code, text = run("reduce-deriv", str(DATA / "phi3.deriv"))
    assert code == 0 and "5/2" in text


def test_stdlib_commands():
    code, text = run("stdlib", "list")
    assert code == 0 and "DD" in text
    code, text = run("stdlib", "show", "D")
    assert r"\x. x x (+) (\y. y)" in text
    assert run("stdlib", "show", "nope")[0] == 1


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["eval"], ["eval", "I", "--mode", "cbz"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        run(*argv)
    assert info.value.code == 2


def test_domain_errors(tmp_path, capsys):
    assert run("eval", "x", "--steps", "1")[0] == 1
    f = tmp_path / "let.lam"
    f.write_text(r"let x = \y. y in x")
    assert run("eval", str(f), "--steps", "1", "--mode", "cbn")[0] == 1
    assert run("synthesize", "C", "--steps", "1", "--mode", "cbn")[0] == 1
    assert run("check", "/nonexistent/file")[0] == 1
