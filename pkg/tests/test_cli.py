from __future__ import annotations

from pathlib import Path

import pytest

import efftop
from efftop.cli import field_from_q, main
from efftop.errors import ParseError

CONFIGS = Path(efftop.__file__).parent / "configs"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name,code", [("ift_square.cfg", 0), ("surj_square.cfg", 1),
                                       ("low_prec.cfg", 2), ("suite.cfg", 0)])
def test_bundled_config_exit_codes(name, code, capsys, tmp_path):
    got, out, _ = run(["run", CONFIGS / name, "--out", tmp_path], capsys)
    assert got == code
    assert out.splitlines()[0] == "experiment\top\tq\tstatus\tdetail"
    assert (tmp_path / "summary.txt").read_text() == out


def test_witness_is_rechecked(capsys):
    code, out, _ = run(["run", CONFIGS / "surj_square.cfg", "--check-witness"], capsys)
    assert code == 1
    assert "kind = no-preimage" in out and "y = (2 (mod t^1))" in out
    assert "witness squares-onto q=3: confirmed" in out


def test_subcommands(capsys):
    code, out, _ = run(["ball-volume", "--variety", "A1", "--m", 2, "--q", 3], capsys)
    assert code == 0 and "9" in out
    code, out, _ = run(["continuity", "--map", "cube", "--m", 2, "--q", 3], capsys)
    assert code == 0 and "m_prime = 6" in out
    code, out, _ = run(["newton", "--map", "square", "--x", "1", "--y", "1 + t^7", "--m", 1,
                        "--prec", 10, "--q", 3], capsys)
    assert code == 0 and "certified = true" in out
    code, out, _ = run(["mono", "--coeffs", "t, 2 + 2*t", "--a", "1", "--m", 0, "--q", 3],
                       capsys)
    assert code == 0 and "result = Unique" in out
    code, out, _ = run(["surjectivity", "--map", "projection", "--m", "0,1", "--prec", 2],
                       capsys)
    assert code == 0


def test_violation_and_inconclusive_exits(capsys):
    code, out, _ = run(["surjectivity", "--map", "unit-square", "--m", "0", "--prec", 1,
                        "--cap", 2, "--q", 3], capsys)
    assert code == 1 and "witness:" in out
    code, _, _ = run(["ift", "--map", "square", "--x", "1", "--m", 1, "--prec", 12, "--q", 3,
                      "--budget", 10], capsys)
    assert code == 2


def test_parse_errors_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[field]\nell = 3\n[map f]\nsource = A1\ntarget = A1\n"
                   "components = x0 + * 2\n")
    code, _, err = run(["run", bad], capsys)
    assert code == 2 and "line 6, column 19" in err
    code, _, err = run(["ball-volume", "--variety", "A1", "--m", 1, "--q", 6], capsys)
    assert code == 2 and "prime power" in err


def test_field_from_q():
    assert field_from_q(9, None).k == 2
    assert field_from_q(None, None).q == 2
    with pytest.raises(ParseError):
        field_from_q(8, 2)


def test_reports_identical_across_workers(capsys, tmp_path):
    a, b = tmp_path / "w1", tmp_path / "w4"
    run(["run", CONFIGS / "suite.cfg", "--out", a, "--workers", 1], capsys)
    run(["run", CONFIGS / "suite.cfg", "--out", b, "--workers", 4], capsys)
    code, out, _ = run(["report-diff", a, b], capsys)
    assert code == 0 and out == ""
    (b / "summary.txt").write_text("changed\n")
    code, out, _ = run(["report-diff", a, b], capsys)
    assert code == 1 and "+changed" in out
