"""Global state as a multiset of typed facts, plus its canonical text codec."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .fragseg import DefragState, FragSenderState
from .frames import AckMsg, MacHeader, Mpdu, Msdu, PsPoll, SecHeader, header_serialize
from .psmseg import ApPsmState, StaPsmState
from .secseg import SecurityAssoc
from .terms import TERM_TYPES, _Reader, read_term, render_term

# fact name -> (owning segment, arity, may occur more than once)
FACT_SCHEMAS = {
    "Fresh": ("core", 1, False),
    "Budget": ("core", 2, False),
    "StaSA": ("secseg", 2, False),
    "ApSA": ("secseg", 2, True),
    "Chan": ("channel", 1, True),
    "Knows": ("adversary", 1, False),
    "AttackerHolds": ("adversary", 1, True),
    # MAC the attacker has disconnected; required before spoofing it
    "Evicted": ("adversary", 1, True),
    "FragSender": ("fragseg", 1, False),
    "SenderQueue": ("fragseg", 1, False),
    "Defrag": ("fragseg", 1, False),
    "StaPsm": ("psmseg", 1, False),
    "ApPsm": ("psmseg", 1, False),
    "PsmTraffic": ("psmseg", 2, False),
}

RECORD_TYPES = {
    cls.__name__: cls
    for cls in (SecHeader, Msdu, Mpdu, AckMsg, PsPoll, SecurityAssoc, FragSenderState,
                DefragState, StaPsmState, ApPsmState)
}


class StateError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Fact:
    name: str
    args: tuple
    _text: Optional[str] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        return hash(render_fact(self))

    def __str__(self) -> str:
        return render_fact(self)


# ---------------------------------------------------------------- rendering


def render_value(v) -> str:
    if isinstance(v, TERM_TYPES):
        return "$" + render_term(v)
    if isinstance(v, bool):
        raise StateError("booleans are not fact values")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return f"'{v}'"
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return "[" + ";".join(render_value(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "set[" + ";".join(sorted(render_value(x) for x in v)) + "]"
    if isinstance(v, MacHeader):
        return header_serialize(v)
    name = type(v).__name__
    if name in RECORD_TYPES:
        inner = ",".join(f"{f.name}={render_value(getattr(v, f.name))}" for f in dataclasses.fields(v))
        return f"{name}{{{inner}}}"
    raise StateError(f"cannot render {v!r}")


def render_fact(f: Fact) -> str:
    if f._text is None:
        object.__setattr__(f, "_text", f"{f.name}(" + ",".join(render_value(a) for a in f.args) + ")")
    return f._text


# ---------------------------------------------------------------- parsing

_HEADER_KEYS = ("src", "dst", "seq", "frag", "mf", "retry", "pm", "md")


class _Parser:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def error(self, msg: str):
        raise StateError(f"{msg} at {self.i}: {self.s[self.i:self.i + 30]!r}")

    def expect(self, lit: str):
        if not self.s.startswith(lit, self.i):
            self.error(f"expected {lit!r}")
        self.i += len(lit)

    def ident(self) -> str:
        m = re.compile(r"[A-Za-z_][A-Za-z0-9_]*").match(self.s, self.i)
        if not m:
            self.error("expected identifier")
        self.i = m.end()
        return m.group(0)

    def seq(self, close: str) -> list:
        items = []
        if self.s.startswith(close, self.i):
            self.i += len(close)
            return items
        while True:
            items.append(self.value())
            if self.s.startswith(";", self.i):
                self.i += 1
                continue
            self.expect(close)
            return items

    def value(self):
        s, i = self.s, self.i
        c = s[i] if i < len(s) else ""
        if c == "$":
            r = _Reader(s, i + 1)
            t = read_term(r)
            self.i = r.pos
            return t
        if c == "'":
            j = s.index("'", i + 1)
            self.i = j + 1
            return s[i + 1:j]
        if c.isdigit() or c == "-":
            m = re.compile(r"-?\d+").match(s, i)
            self.i = m.end()
            return int(m.group(0))
        if c == "[":
            self.i += 1
            return tuple(self.seq("]"))
        if s.startswith("set[", i):
            self.i += 4
            return frozenset(self.seq("]"))
        if s.startswith("none", i) and not s[i + 4:i + 5].isalnum():
            self.i += 4
            return None
        if s.startswith("mac{", i):
            self.i += 4
            vals = {}
            for n, key in enumerate(_HEADER_KEYS):
                if n:
                    self.expect(",")
                self.expect(key + "=")
                if key in ("src", "dst"):
                    vals[key] = self.ident()
                else:
                    m = re.compile(r"\d+").match(s, self.i)
                    self.i = m.end()
                    vals[key] = int(m.group(0))
            self.expect("}")
            return MacHeader(vals["src"], vals["dst"], vals["seq"], vals["frag"], vals["mf"],
                             vals["retry"], vals["pm"], vals["md"])
        name = self.ident()
        if name not in RECORD_TYPES:
            self.error(f"unknown record {name}")
        self.expect("{")
        cls = RECORD_TYPES[name]
        kwargs = {}
        for n, f in enumerate(dataclasses.fields(cls)):
            if n:
                self.expect(",")
            self.expect(f.name + "=")
            kwargs[f.name] = self.value()
        self.expect("}")
        return cls(**kwargs)

    def fact(self) -> Fact:
        name = self.ident()
        self.expect("(")
        args = []
        if not self.s.startswith(")", self.i):
            while True:
                args.append(self.value())
                if self.s.startswith(",", self.i):
                    self.i += 1
                    continue
                break
        self.expect(")")
        return Fact(name, tuple(args))


def parse_value(text: str):
    p = _Parser(text)
    v = p.value()
    if p.i != len(text):
        p.error("trailing input")
    return v


def parse_fact(text: str) -> Fact:
    p = _Parser(text)
    f = p.fact()
    if p.i != len(text):
        p.error("trailing input")
    return f


# ---------------------------------------------------------------- state


@dataclass(frozen=True)
class GlobalState:
    facts: tuple
    depth: int = 0

    def __post_init__(self):
        seen = set()
        for f in self.facts:
            schema = FACT_SCHEMAS.get(f.name)
            if schema is None:
                raise StateError(f"unknown fact {f.name!r}")
            _, arity, multi = schema
            if len(f.args) != arity:
                raise StateError(f"{f.name} takes {arity} arguments, got {len(f.args)}")
            key = f.name if not multi or f.name == "Chan" else (f.name, f.args[0])
            if f.name != "Chan" and key in seen:
                raise StateError(f"duplicate fact {key}")
            seen.add(key)
        ordered = tuple(sorted(self.facts, key=lambda f: (f.name, render_fact(f))))
        object.__setattr__(self, "facts", ordered)

    @classmethod
    def of(cls, facts, depth: int = 0) -> "GlobalState":
        return cls(tuple(facts), depth)

    def all(self, name: str) -> list:
        return [f.args for f in self.facts if f.name == name]

    def get(self, name: str, default=None):
        for f in self.facts:
            if f.name == name:
                return f.args[0] if len(f.args) == 1 else f.args
        return default

    def keyed(self, name: str, key):
        for f in self.facts:
            if f.name == name and f.args[0] == key:
                return f.args[1] if len(f.args) == 2 else f.args[1:]
        return None

    def update(self, remove=(), add=(), depth: int | None = None) -> "GlobalState":
        """Consume the facts in ``remove`` (one occurrence each) and add ``add``."""
        facts = list(self.facts)
        for r in remove:
            try:
                facts.remove(r)
            except ValueError:
                raise StateError(f"fact {r} not present") from None
        facts.extend(add)
        return GlobalState(tuple(facts), self.depth + 1 if depth is None else depth)

    def render(self) -> str:
        return "\n".join(render_fact(f) for f in self.facts)


_FRESH = re.compile(r"~n(\d+)")


@lru_cache(maxsize=1 << 18)
def _split_fresh(line: str) -> tuple:
    """(masked line, literal parts, fresh ids in order of occurrence)."""
    parts = _FRESH.split(line)
    return "~n?".join(parts[0::2]), tuple(parts[0::2]), tuple(parts[1::2])


def canonicalize(g: GlobalState, extra: tuple = ()) -> bytes:
    """Canonical bytes: equal iff states agree up to renaming of fresh names.

    The fresh-name counter is excluded; it carries no observable state.
    ``extra`` lines (e.g. a rendered event history) are renamed jointly with
    the facts and appended after them.
    """
    groups = ([render_fact(f) for f in g.facts if f.name != "Fresh"], list(extra))
    mapping: dict = {}
    out = []
    for n, group in enumerate(groups):
        split = sorted(_split_fresh(line) + (line,) for line in group)
        for _, _, ids, _ in split:
            for i in ids:
                if i not in mapping:
                    mapping[i] = str(len(mapping))
        renamed = []
        for masked, lits, ids, _ in split:
            if not ids:
                renamed.append(masked)
                continue
            buf = [lits[0]]
            for i, lit in zip(ids, lits[1:]):
                buf.append("~n" + mapping[i])
                buf.append(lit)
            renamed.append("".join(buf))
        if n and renamed:
            out.append("--")
        out += sorted(renamed)
    return "\n".join(out).encode()


def parse_state(data: bytes | str) -> GlobalState:
    text = data.decode() if isinstance(data, bytes) else data
    facts = [parse_fact(line) for line in text.splitlines() if line]
    if not any(f.name == "Fresh" for f in facts):
        ids = [int(m) for m in _FRESH.findall(text)]
        facts.append(Fact("Fresh", (max(ids, default=-1) + 1,)))
    return GlobalState(tuple(facts))


def max_fresh(g: GlobalState) -> int:
    return max((int(m) for m in _FRESH.findall(g.render())), default=-1)

