"""Experiment configuration files.

A config is a sequence of sections::

    # comment
    [field]
    ell = 3
    k = 1, 2

    [map sq]
    source = A1
    target = A1
    components = x0^2

    [experiment newton-suite]
    op = ift
    map = sq
    x = 1
    m = 1
    prec = 10

Keys are validated per section kind; unknown keys, missing required keys and
malformed values raise ParseError carrying the line and column of the
offending text.  Polynomials use the library's grammar in x0, x1, ...;
lists are comma separated, polynomial lists are separated by ';'.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from .arith.field import is_prime
from .errors import ParseError

FIELD_KEYS = {"ell": "int", "k": "ints"}
VARIETY_KEYS = {"dim": "int", "invert": "poly", "extra": "polys"}
MAP_KEYS = {"source": "name", "target": "name", "components": "polys",
            "denominator": "poly", "power": "int"}
OUTPUT_KEYS = {"dir": "str"}

# op -> (required keys, optional keys)
EXPERIMENT_OPS = {
    "ball-volume": ({"variety", "m"}, {"prec", "expect"}),
    "continuity": ({"map", "m"}, {"prec", "expect", "modulus"}),
    "newton": ({"map", "x", "y", "m", "prec"}, {"m_prime", "free", "force"}),
    "ift": ({"map", "x", "m", "prec"}, {"m_prime", "free", "scan_prec"}),
    "mono": ({"coeffs", "a", "m"}, {"prec", "m_prime"}),
    "ball-member": ({"variety", "center", "point", "r"}, {"prec"}),
    "pushforward": ({"map", "m", "prec"}, {"expect_total"}),
    "verify-bounds": ({"map", "m", "prec"}, {"bound", "cap"}),
    "smoothness": ({"map", "m", "prec"}, {"expect_radius"}),
    "surjectivity": ({"map", "m", "prec"}, {"cap", "newton_free", "expect"}),
    "section": ({"map", "section"}, {"denominator", "power", "nonvanishing", "samples",
                                     "prec"}),
    "glue": ({"glue", "m", "prec"}, set()),
}
EXPERIMENT_COMMON = {"op", "k", "budget"}

_HEADER_RE = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z0-9_.\-]+))?\s*\]\s*$")
_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_.\-]*$")


@dataclass(frozen=True)
class Value:
    text: str
    line: int
    column: int
    key_column: int = 1

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.line, self.column)

    def as_int(self) -> int:
        try:
            return int(self.text)
        except ValueError:
            raise self.error(f"expected an integer, got {self.text!r}") from None

    def as_ints(self) -> list[int]:
        out = []
        for part in self.text.split(","):
            part = part.strip()
            try:
                out.append(int(part))
            except ValueError:
                raise self.error(f"expected a list of integers, got {self.text!r}") from None
        return out

    def as_list(self, sep: str = ",") -> list[str]:
        return [p.strip() for p in self.text.split(sep) if p.strip()]

    def as_bool(self) -> bool:
        low = self.text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise self.error(f"expected true or false, got {self.text!r}")


@dataclass
class Section:
    kind: str
    name: str | None
    line: int
    values: dict[str, Value] = dc_field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str) -> Value:
        if key not in self.values:
            raise ParseError(f"section [{self.kind}{' ' + self.name if self.name else ''}] "
                             f"is missing key {key!r}", self.line, 1)
        return self.values[key]


@dataclass
class ExperimentConfig:
    ell: int
    ks: list[int]
    varieties: dict[str, Section]
    maps: dict[str, Section]
    experiments: list[Section]
    output_dir: str | None = None
    path: str | None = None


def _allowed(sec: Section) -> set[str]:
    if sec.kind == "field":
        return set(FIELD_KEYS)
    if sec.kind == "variety":
        return set(VARIETY_KEYS)
    if sec.kind == "map":
        return set(MAP_KEYS)
    if sec.kind == "output":
        return set(OUTPUT_KEYS)
    op = sec.values.get("op")
    if op is None:
        raise ParseError(f"experiment {sec.name!r} has no op", sec.line, 1)
    if op.text not in EXPERIMENT_OPS:
        raise op.error(f"unknown op {op.text!r}")
    req, opt = EXPERIMENT_OPS[op.text]
    for key in sorted(req):
        sec.require(key)
    return req | opt | EXPERIMENT_COMMON


def parse_sections(text: str) -> list[Section]:
    sections: list[Section] = []
    cur: Section | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            m = _HEADER_RE.match(stripped)
            if m is None:
                raise ParseError(f"malformed section header {stripped!r}", lineno,
                                 raw.index("[") + 1)
            kind, name = m.group(1), m.group(2)
            if kind not in ("field", "variety", "map", "experiment", "output"):
                raise ParseError(f"unknown section kind {kind!r}", lineno, raw.index(kind) + 1)
            if kind in ("variety", "map", "experiment") and name is None:
                raise ParseError(f"[{kind}] sections need a name", lineno, raw.index("[") + 1)
            cur = Section(kind, name, lineno)
            sections.append(cur)
            continue
        if "=" not in line:
            raise ParseError("expected key = value", lineno, len(raw) - len(raw.lstrip()) + 1)
        if cur is None:
            raise ParseError("key outside any section", lineno, 1)
        key, _, val = line.partition("=")
        kcol = len(raw) - len(raw.lstrip()) + 1
        key = key.strip()
        if not _NAME_RE.match(key):
            raise ParseError(f"malformed key {key!r}", lineno, kcol)
        if key in cur.values:
            raise ParseError(f"duplicate key {key!r}", lineno, kcol)
        vcol = line.index("=") + 2 + (len(val) - len(val.lstrip()))
        cur.values[key] = Value(val.strip(), lineno, vcol, kcol)
    return sections


def parse_config(text: str, path: str | None = None) -> ExperimentConfig:
    sections = parse_sections(text)
    cfg = ExperimentConfig(0, [1], {}, {}, [], path=path)
    seen_field = False
    for sec in sections:
        allowed = _allowed(sec)
        for key, val in sec.values.items():
            if key not in allowed:
                raise ParseError(f"unknown key {key!r} in [{sec.kind}]", val.line,
                                 val.key_column)
        if sec.kind == "field":
            if seen_field:
                raise ParseError("more than one [field] section", sec.line, 1)
            seen_field = True
            cfg.ell = sec.require("ell").as_int()
            if not is_prime(cfg.ell):
                raise sec.values["ell"].error(f"ell = {cfg.ell} is not prime")
            if "k" in sec.values:
                cfg.ks = sec.values["k"].as_ints()
                if not cfg.ks or any(k < 1 for k in cfg.ks):
                    raise sec.values["k"].error("k values must be positive")
        elif sec.kind == "variety":
            _unique(cfg.varieties, sec)
            sec.require("dim").as_int()
        elif sec.kind == "map":
            _unique(cfg.maps, sec)
            for key in ("source", "target", "components"):
                sec.require(key)
        elif sec.kind == "output":
            cfg.output_dir = sec.require("dir").text
        else:
            if any(e.name == sec.name for e in cfg.experiments):
                raise ParseError(f"duplicate experiment {sec.name!r}", sec.line, 1)
            if "budget" in sec.values and sec.values["budget"].as_int() <= 0:
                raise sec.values["budget"].error("budgets must be positive")
            cfg.experiments.append(sec)
    if not seen_field:
        raise ParseError("config has no [field] section", 1, 1)
    return cfg


def _unique(table: dict, sec: Section) -> None:
    if sec.name in table:
        raise ParseError(f"duplicate definition of {sec.name!r}", sec.line, 1)
    table[sec.name] = sec


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
