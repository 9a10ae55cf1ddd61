from __future__ import annotations

from pathlib import Path

import pytest

import efftop
from efftop.config import EXPERIMENT_OPS, load_config, parse_config
from efftop.errors import ParseError

CONFIGS = Path(efftop.__file__).parent / "configs"

BASE = """\
[field]
ell = 3
k = 1, 2

[map sq]
source = A1
target = A1
components = x0^2

[experiment a]
op = ift
map = sq
x = 1
m = 1
prec = 10
"""


def test_parse_basic():
    cfg = parse_config(BASE)
    assert (cfg.ell, cfg.ks) == (3, [1, 2])
    assert list(cfg.maps) == ["sq"]
    exp = cfg.experiments[0]
    assert exp.name == "a" and exp.values["prec"].as_int() == 10
    assert exp.values["map"].line == 12 and exp.values["map"].column == 7


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.name)
def test_bundled_configs_parse(path):
    cfg = load_config(str(path))
    assert cfg.experiments
    for sec in cfg.experiments:
        assert sec.values["op"].text in EXPERIMENT_OPS


def error_of(text):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    return exc.value


def test_unknown_key_position():
    err = error_of(BASE + "  colour = red\n")
    assert (err.line, err.column) == (16, 3)


def test_unknown_op_position():
    err = error_of("[field]\nell = 2\n[experiment x]\nop = frobnicate\n")
    assert (err.line, err.column) == (4, 6)


def test_missing_required_key():
    err = error_of("[field]\nell = 2\n[experiment x]\nop = ift\nmap = sq\n")
    assert err.line == 3


def test_duplicate_key_and_section():
    assert error_of("[field]\nell = 2\nell = 3\n").line == 3
    assert error_of("[field]\nell = 2\n[field]\nell = 3\n").line == 3


def test_bad_values_and_headers():
    assert error_of("[field]\nell = two\n").column == 7
    assert error_of("[field]\nell = 2\nk = 0\n").line == 3
    assert error_of("[field\nell = 2\n").line == 1
    assert error_of("[widget]\n").column == 2
    assert error_of("ell = 2\n").line == 1
    assert error_of("[variety V]\ndim = 1\n").line == 1  # no [field] section
    err = error_of("[field]\nell = 2\n[experiment x]\nop = ift\nmap = sq\nx = 1\nm = 1\n"
                   "prec = 4\nbudget = -5\n")
    assert err.line == 9


def test_comments_and_blank_lines_are_ignored():
    cfg = parse_config("# header\n\n[field]  # the field\nell = 5 # five\n")
    assert cfg.ell == 5


def test_non_prime_characteristic():
    err = error_of("[field]\nell = 4\n")
    assert (err.line, err.column) == (2, 7)
