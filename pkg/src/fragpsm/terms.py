"""Symbolic message terms with perfect cryptography and Dolev-Yao deduction."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Union


@dataclass(frozen=True, slots=True)
class PublicConst:
    name: str
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("PublicConst", self.name)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (PublicConst, (self.name,))

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True, slots=True)
class FreshName:
    id: int
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("FreshName", self.id)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (FreshName, (self.id,))

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True, slots=True)
class Pair:
    left: "Term"
    right: "Term"
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("Pair", self.left, self.right)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (Pair, (self.left, self.right,))

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True, slots=True)
class SEnc:
    body: "Term"
    key: "Term"
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("SEnc", self.body, self.key)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (SEnc, (self.body, self.key,))

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True, slots=True)
class Mic:
    body: "Term"
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("Mic", self.body)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (Mic, (self.body,))

    def __str__(self) -> str:
        return render_term(self)


@dataclass(frozen=True, slots=True)
class Tuple:
    items: tuple
    _h: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __hash__(self) -> int:
        if self._h is None:
            object.__setattr__(self, "_h", hash(("Tuple", self.items)))
        return self._h

    def __reduce__(self):
        # the cached hash depends on the interpreter's string-hash seed
        return (Tuple, (self.items,))

    def __str__(self) -> str:
        return render_term(self)


Term = Union[PublicConst, FreshName, Pair, SEnc, Mic, Tuple]
TERM_TYPES = (PublicConst, FreshName, Pair, SEnc, Mic, Tuple)


def const(name) -> PublicConst:
    return PublicConst(str(name))


def tup(*items: Term) -> Tuple:
    return Tuple(tuple(items))


class DecryptFailure(Exception):
    """Raised by :func:`sdec` when the key does not open the ciphertext."""


# ---------------------------------------------------------------- freshness


@dataclass
class FreshCounter:
    next_id: int = 0

    def issue(self) -> FreshName:
        name = FreshName(self.next_id)
        self.next_id += 1
        return name


def fresh(ctx: FreshCounter) -> FreshName:
    return ctx.issue()


# ---------------------------------------------------------------- crypto


def senc(body: Term, key: Term) -> SEnc:
    return SEnc(body, key)


def sdec(cipher: Term, key: Term) -> Term:
    if isinstance(cipher, SEnc) and cipher.key == key:
        return cipher.body
    raise DecryptFailure(f"cannot open {render_term(cipher)} with {render_term(key)}")


# ---------------------------------------------------------------- text form


@lru_cache(maxsize=1 << 18)
def render_term(t: Term) -> str:
    if isinstance(t, PublicConst):
        return t.name
    if isinstance(t, FreshName):
        return f"~n{t.id}"
    if isinstance(t, Pair):
        return f"pair({render_term(t.left)},{render_term(t.right)})"
    if isinstance(t, SEnc):
        return f"senc({render_term(t.body)},{render_term(t.key)})"
    if isinstance(t, Mic):
        return f"mic({render_term(t.body)})"
    if isinstance(t, Tuple):
        return "tuple(" + ",".join(render_term(i) for i in t.items) + ")"
    raise TypeError(f"not a term: {t!r}")


_TOKEN = re.compile(r"~n\d+|[A-Za-z0-9_]+|[(),]")


class TermSyntaxError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def peek(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        return m.group(0) if m else ""

    def take(self, expected: str | None = None) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise TermSyntaxError(f"unexpected input at {self.pos}: {self.text[self.pos:self.pos + 20]!r}")
        tok = m.group(0)
        if expected is not None and tok != expected:
            raise TermSyntaxError(f"expected {expected!r} at {self.pos}, got {tok!r}")
        self.pos = m.end()
        return tok


_CONSTRUCTORS = {"pair", "senc", "mic", "tuple"}


def read_term(r: _Reader) -> Term:
    tok = r.take()
    if tok.startswith("~n"):
        return FreshName(int(tok[2:]))
    if tok in _CONSTRUCTORS and r.peek() == "(":
        r.take("(")
        args: list[Term] = []
        if r.peek() != ")":
            args.append(read_term(r))
            while r.peek() == ",":
                r.take(",")
                args.append(read_term(r))
        r.take(")")
        if tok == "pair" and len(args) == 2:
            return Pair(*args)
        if tok == "senc" and len(args) == 2:
            return SEnc(*args)
        if tok == "mic" and len(args) == 1:
            return Mic(args[0])
        if tok == "tuple":
            return Tuple(tuple(args))
        raise TermSyntaxError(f"bad arity for {tok}: {len(args)}")
    if tok in "(),":
        raise TermSyntaxError(f"unexpected {tok!r} at {r.pos}")
    return PublicConst(tok)


def parse_term(text: str) -> Term:
    r = _Reader(text)
    t = read_term(r)
    if r.pos != len(text):
        raise TermSyntaxError(f"trailing input: {text[r.pos:]!r}")
    return t


# ---------------------------------------------------------------- structure


def children(t: Term) -> tuple:
    if isinstance(t, Pair):
        return (t.left, t.right)
    if isinstance(t, SEnc):
        return (t.body, t.key)
    if isinstance(t, Mic):
        return (t.body,)
    if isinstance(t, Tuple):
        return t.items
    return ()


def subterms(terms: Iterable[Term]) -> set:
    out: set = set()
    stack = list(terms)
    while stack:
        t = stack.pop()
        if t in out:
            continue
        out.add(t)
        stack.extend(children(t))
    return out


def fresh_names(t: Term) -> Iterator[FreshName]:
    for s in subterms([t]):
        if isinstance(s, FreshName):
            yield s


def depth(t: Term) -> int:
    kids = children(t)
    return 1 + max((depth(k) for k in kids), default=0)


# ---------------------------------------------------------------- deduction


def _analyze(known: Iterable[Term]) -> frozenset:
    """Close a set under projection and decryption with derivable keys."""
    have = set(known)
    changed = True
    while changed:
        changed = False
        for t in list(have):
            if isinstance(t, Pair):
                new = (t.left, t.right)
            elif isinstance(t, Tuple):
                new = t.items
            elif isinstance(t, SEnc) and _synth(t.key, have):
                new = (t.body,)
            else:
                continue
            for n in new:
                if n not in have:
                    have.add(n)
                    changed = True
    return frozenset(have)


def _synth(t: Term, have) -> bool:
    if t in have or isinstance(t, PublicConst):
        return True
    if isinstance(t, FreshName):
        return False
    return all(_synth(c, have) for c in children(t))


@dataclass(frozen=True)
class KnowledgeBase:
    """Attacker knowledge.

    ``known`` is closed: it holds every derivable subterm of the observed
    messages. Membership (``in``) additionally accepts any term built from
    known terms by the public constructors.
    """

    known: frozenset = field(default_factory=frozenset)

    def __contains__(self, t: Term) -> bool:
        return _synth(t, self.known)

    def learn(self, *terms: Term) -> "KnowledgeBase":
        return deduce_closure(KnowledgeBase(self.known | frozenset(terms)))

    def __len__(self) -> int:
        return len(self.known)


@lru_cache(maxsize=4096)
def _closure(observed: frozenset) -> frozenset:
    analyzed = _analyze(observed)
    universe = subterms(observed)
    return frozenset(t for t in universe if _synth(t, analyzed))


def deduce_closure(kb: KnowledgeBase) -> KnowledgeBase:
    return KnowledgeBase(_closure(frozenset(kb.known)))


def derivable(t: Term, observed: Iterable[Term]) -> bool:
    return t in deduce_closure(KnowledgeBase(frozenset(observed)))


@lru_cache(maxsize=1 << 16)
def analyzed(observed: frozenset) -> frozenset:
    return _analyze(observed)


def attacker_knows(t: Term, observed: frozenset) -> bool:
    """``t`` is derivable from the observed messages.

    Equivalent to membership in the closure: every analyzed term is a
    subterm of ``observed``, so synthesizing over the analysis suffices.
    """
    return _synth(t, analyzed(observed))
