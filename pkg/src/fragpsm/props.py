"""Guarded first-order trace properties: syntax, evaluation and the catalog.

Formula grammar (whitespace-insensitive)::

    formula := impl
    impl    := disj [ "==>" impl ]
    disj    := conj { "|" conj }
    conj    := unary { "&" unary }
    unary   := "not" "(" formula ")" | ("All" | "Ex") var+ "." formula
             | "(" formula ")" | atom
    atom    := Event "(" arg { "," arg } ")" "@" time
             | "K" "(" arg ")" | time "<" time | arg "=" arg
    arg     := var | "'" const "'"
    time    := ["#"] var

Event names start with an upper-case letter, variables with a lower-case
one. ``K(t)`` holds when the attacker can derive ``t`` from everything it
observed by the end of the trace. Universal quantifiers must guard their
body with an implication whose premise binds the quantified variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .events import DECLARED_EVENTS
from .explorer import ExplorationResult, Trace
from .terms import PublicConst, attacker_knows, const

SAFETY, SECRECY, REACH = "safety", "secrecy", "reach"
KINDS = (SAFETY, SECRECY, REACH)

VERIFIED = "VerifiedWithinBound"
FALSIFIED = "Falsified"
WITNESS = "ReachabilityWitness"
NOT_REACHED = "NotReachedWithinBound"


class UnknownEvent(ValueError):
    pass


class FormulaError(ValueError):
    pass


# ---------------------------------------------------------------- syntax


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: PublicConst


@dataclass(frozen=True)
class EventAtom:
    name: str
    args: tuple
    at: str


@dataclass(frozen=True)
class Less:
    a: str
    b: str


@dataclass(frozen=True)
class Eq:
    a: object
    b: object


@dataclass(frozen=True)
class Know:
    t: object


@dataclass(frozen=True)
class Not:
    f: object


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    a: object
    b: object


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: object


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: object


_TOK = re.compile(r"\s*(==>|'[^']*'|#?[A-Za-z_][A-Za-z0-9_]*|[()&|<=@.,])")


def _tokenize(text: str) -> list:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m:
            raise FormulaError(f"bad character at {pos}: {text[pos:pos + 15]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ""

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if not tok or (expected is not None and tok != expected):
            raise FormulaError(f"expected {expected or 'a token'} at token {self.i}, got {tok!r}")
        self.i += 1
        return tok

    def formula(self):
        a = self.disj()
        if self.peek() == "==>":
            self.take()
            return Implies(a, self.formula())
        return a

    def disj(self):
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok == "not":
            self.take()
            self.take("(")
            f = self.formula()
            self.take(")")
            return Not(f)
        if tok in ("All", "Ex"):
            self.take()
            names = []
            while self.peek() != ".":
                names.append(self.take().lstrip("#"))
            self.take(".")
            if not names:
                raise FormulaError("quantifier without variables")
            body = self.formula()
            if tok == "All" and not isinstance(body, Implies):
                raise FormulaError("a universal quantifier needs a guard: All x. A ==> B")
            return Forall(tuple(names), body) if tok == "All" else Exists(tuple(names), body)
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        return self.atom()

    def arg(self):
        tok = self.take()
        if tok.startswith("'"):
            return Const(const(tok[1:-1]))
        if not re.fullmatch(r"#?[a-z_][A-Za-z0-9_]*", tok):
            raise FormulaError(f"expected a variable or quoted constant, got {tok!r}")
        return Var(tok.lstrip("#"))

    def atom(self):
        tok = self.peek()
        if tok == "K" and self.peek(1) == "(":
            self.take()
            self.take("(")
            t = self.arg()
            self.take(")")
            return Know(t)
        if tok[:1].isupper() and self.peek(1) == "(":
            name = self.take()
            if name not in DECLARED_EVENTS:
                raise UnknownEvent(f"undeclared event {name}")
            self.take("(")
            args = [self.arg()]
            while self.peek() == ",":
                self.take()
                args.append(self.arg())
            self.take(")")
            self.take("@")
            return EventAtom(name, tuple(args), self.take().lstrip("#"))
        a = self.arg()
        op = self.take()
        b = self.arg()
        if op == "<":
            if not (isinstance(a, Var) and isinstance(b, Var)):
                raise FormulaError("'<' compares timepoint variables")
            return Less(a.name, b.name)
        if op == "=":
            return Eq(a, b)
        raise FormulaError(f"expected '<' or '=', got {op!r}")


def parse_formula(text: str):
    p = _Parser(text)
    f = p.formula()
    if p.peek():
        raise FormulaError(f"trailing input at token {p.i}: {p.peek()!r}")
    return f


def event_names(f) -> set:
    return {name for name, _ in _polar_atoms(f, True)}


def _polar_atoms(f, positive: bool):
    """Yield (event name or 'K', polarity) for every atom in ``f``."""
    if isinstance(f, EventAtom):
        yield f.name, positive
    elif isinstance(f, Know):
        yield "K", positive
    elif isinstance(f, Not):
        yield from _polar_atoms(f.f, not positive)
    elif isinstance(f, Implies):
        yield from _polar_atoms(f.a, not positive)
        yield from _polar_atoms(f.b, positive)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from _polar_atoms(p, positive)
    elif isinstance(f, (Exists, Forall)):
        yield from _polar_atoms(f.body, positive)


# ---------------------------------------------------------------- semantics


class TraceView:
    """A finite trace as seen by the evaluator: actions per step plus knowledge."""

    def __init__(self, steps, observed: frozenset):
        self.steps = [tuple(s) for s in steps]
        self.observed = observed

    def knows(self, t) -> bool:
        return attacker_knows(t, self.observed)


def _value(x, env):
    if isinstance(x, Const):
        return x.value
    return env.get(x.name)


def _bind(x, value, env):
    if isinstance(x, Const):
        return env if x.value == value else None
    cur = env.get(x.name)
    if cur is None:
        e = dict(env)
        e[x.name] = value
        return e
    return env if cur == value else None


def _solve(f, env: dict, tv: TraceView):
    """Yield every extension of ``env`` satisfying ``f`` on ``tv``."""
    if isinstance(f, EventAtom):
        at = env.get(f.at)
        idxs = range(len(tv.steps)) if at is None else ((at,) if 0 <= at < len(tv.steps) else ())
        for i in idxs:
            for e in tv.steps[i]:
                if e.name != f.name or len(e.args) != len(f.args):
                    continue
                cur = _bind(Var(f.at), i, env)
                for a, v in zip(f.args, e.args):
                    if cur is None:
                        break
                    cur = _bind(a, v, cur)
                if cur is not None:
                    yield cur
    elif isinstance(f, Less):
        a, b = env.get(f.a), env.get(f.b)
        if a is None or b is None:
            raise FormulaError(f"unguarded timepoint in {f.a} < {f.b}")
        if a < b:
            yield env
    elif isinstance(f, Eq):
        a, b = _value(f.a, env), _value(f.b, env)
        if a is not None and b is not None:
            if a == b:
                yield env
        elif a is not None:
            yield _bind(f.b, a, env)
        elif b is not None:
            yield _bind(f.a, b, env)
        else:
            raise FormulaError("equality between two unbound variables")
    elif isinstance(f, Know):
        t = _value(f.t, env)
        if t is None:
            raise FormulaError("K() of an unbound variable")
        if tv.knows(t):
            yield env
    elif isinstance(f, Not):
        if not any(True for _ in _solve(f.f, env, tv)):
            yield env
    elif isinstance(f, And):
        yield from _conj(_order(f.parts), 0, env, tv)
    elif isinstance(f, Or):
        for p in f.parts:
            yield from _solve(p, env, tv)
    elif isinstance(f, (Implies, Forall)):
        imp = f if isinstance(f, Implies) else f.body
        if not isinstance(imp, Implies):
            raise FormulaError("a universal quantifier needs a guard: All x. A ==> B")
        inner = env if isinstance(f, Implies) else {k: v for k, v in env.items() if k not in f.vars}
        for s in _solve(imp.a, inner, tv):
            if not any(True for _ in _solve(imp.b, s, tv)):
                return
        yield env
    elif isinstance(f, Exists):
        inner = {k: v for k, v in env.items() if k not in f.vars}
        if any(True for _ in _solve(f.body, inner, tv)):
            yield env
    else:
        raise FormulaError(f"not a formula: {f!r}")


def _order(parts) -> tuple:
    rank = {EventAtom: 0, Eq: 1}
    return tuple(sorted(parts, key=lambda p: rank.get(type(p), 2)))


def _conj(parts, k, env, tv):
    if k == len(parts):
        yield env
        return
    for e in _solve(parts[k], env, tv):
        yield from _conj(parts, k + 1, e, tv)


def holds(f, tv: TraceView) -> bool:
    return any(True for _ in _solve(f, {}, tv))


# ---------------------------------------------------------------- properties


@dataclass(frozen=True)
class Property:
    name: str
    kind: str
    formula: object
    source: str
    title: str = ""
    segment: str = "frag"
    extension: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormulaError(f"unknown property kind {self.kind!r}")

    @classmethod
    def define(cls, name: str, kind: str, text: str, **kw) -> "Property":
        return cls(name, kind, parse_formula(text), text, **kw)

    @property
    def triggers(self) -> tuple:
        """(event names, whether knowledge growth) that can flip the verdict.

        A safety formula can only become false when an event occurring at a
        negative position is appended (or knowledge grows under a negative
        K); a reachability formula only becomes true through positive atoms.
        """
        want = self.kind == REACH
        names = {n for n, pol in _polar_atoms(self.formula, True) if pol == want}
        return frozenset(names - {"K"}), "K" in names


@dataclass(frozen=True)
class Verdict:
    property: str
    outcome: str
    depth: int
    trace: Optional[Trace] = None
    record: Optional[int] = None

    @property
    def label(self) -> str:
        return self.outcome

    def __str__(self) -> str:
        return f"{self.property}: {self.outcome} (depth {self.depth})"


def violating_records(p: Property, result: ExplorationResult):
    """Record ids whose trace violates (safety/secrecy) or satisfies (reach) ``p``, in id order."""
    names, on_learn = p.triggers
    records = result.records
    want = p.kind == REACH
    for rid in range(1, len(records)):
        r = records[rid]
        if not (on_learn and r.learned) and not any(e.name in names for e in r.rule.actions):
            continue
        tv = TraceView(result.steps(rid), r.knows)
        if holds(p.formula, tv) == want:
            yield rid


def evaluate(p: Property, result: ExplorationResult) -> Verdict:
    rid = next(violating_records(p, result), None)
    d = result.depth_bound
    if p.kind == REACH:
        if rid is None:
            return Verdict(p.name, NOT_REACHED, d)
        return Verdict(p.name, WITNESS, d, result.trace(rid), rid)
    if rid is None:
        return Verdict(p.name, VERIFIED, d)
    return Verdict(p.name, FALSIFIED, d, result.trace(rid), rid)


def check_trace(p: Property, trace: Trace) -> bool:
    """Evaluate ``p`` on one complete trace; True iff it is violated (or, for reach, satisfied)."""
    tv = TraceView(trace.events, trace.terminal.get("Knows"))
    return holds(p.formula, tv) == (p.kind == REACH)


# ---------------------------------------------------------------- catalog

_RECV = "All r c f q n #j. ReceiverRecFrag(r,c,f,q,n)@j ==> "

_CATALOG = (
    ("IntegrityFragmentFrag", "Integrity of Fragment for Fragmentation", "frag", SAFETY,
     _RECV + "(Ex s f2 q2 n2 m #i. SenderSendFragment(s,c,f2,q2,n2,m)@i & i<j)"),
    ("IntegrityFrameFrag", "Integrity of Frame for Fragmentation", "frag", SAFETY,
     "All r m #j. ReceiverDeliverMsdu(r,m)@j ==> "
     "(Ex s c f q n #i. SenderSendFragment(s,c,f,q,n,m)@i & i<j)"),
    ("IntegrityFragmentNumberFrag", "Integrity of Fragment Number for Fragmentation", "frag", SAFETY,
     _RECV + "(Ex s q2 n2 m #i. SenderSendFragment(s,c,f,q2,n2,m)@i & i<j)"),
    ("IntegritySequenceNumberFrag", "Integrity of Sequence Number for Fragmentation", "frag", SAFETY,
     _RECV + "(Ex s f2 n2 m #i. SenderSendFragment(s,c,f2,q,n2,m)@i & i<j)"),
    ("IntegrityNonceFrag", "Integrity of Nonce for Fragmentation", "frag", SAFETY,
     _RECV + "(Ex s f2 q2 m #i. SenderSendFragment(s,c,f2,q2,n,m)@i & i<j)"),
    ("IntegrityPowerManagementPSM", "Integrity of Power Management Field for PSM", "psm", SAFETY,
     "All ap sta p pm #j. APRecvFrame(ap,sta,p,pm)@j ==> (Ex #i. STASendFrame(sta,p,pm)@i & i<j)"),
    ("IntegrityStaAddressPSM", "Integrity of STA Address for PSM", "psm", SAFETY,
     "All ap sta p pm #j. APRecvFrame(ap,sta,p,pm)@j ==> (Ex pm2 #i. STASendFrame(sta,p,pm2)@i & i<j)"),
    ("SecrecyFragmentFrag", "Secrecy of Fragment for Fragmentation", "frag", SECRECY,
     "All s c f q n m #i. SenderSendFragment(s,c,f,q,n,m)@i ==> not(K(c))"),
    ("SecrecyFrameFrag", "Secrecy of Frame for Fragmentation", "frag", SECRECY,
     "All s c f q n m #i. SenderSendFragment(s,c,f,q,n,m)@i ==> not(K(m))"),
    ("SecrecyNonceFrag", "Secrecy of Nonce for Fragmentation", "frag", SECRECY,
     "All s c f q n m #i. SenderSendFragment(s,c,f,q,n,m)@i ==> not(K(n))"),
    ("SecrecyKeyFrag", "Secrecy of Key for Fragmentation", "frag", SECRECY,
     "(All s ap k #i. Associate(s,ap,k)@i ==> not(K(k))) & (All s k #i. Rekey(s,k)@i ==> not(K(k)))"),
    ("StaSleepAfterAckPSM", "STA enter sleep state after receiving ACK", "psm", SAFETY,
     "All sta #j. STAEnterSleep(sta)@j ==> (Ex ap #i. APKnowDoze(ap,sta)@i & i<j)"),
    ("ApBufferAfterSleepPSM", "AP stores messages after STA sleeping", "psm", SAFETY,
     "All ap sta p #j. APBufferUnit(ap,sta,p)@j ==> (Ex #i. STASendDozeMsg('1',sta)@i & i<j)"),
    ("AuthAfterAssociationPSM", "The authentication should happen after association for PSM", "psm", SAFETY,
     "All ap sta p pm #j. APRecvFrame(ap,sta,p,pm)@j ==> (Ex k #i. Associate(sta,ap,k)@i & i<j)"),
    ("ApSendAfterStorePSM", "The AP should send buffers after it stores buffers", "psm", SAFETY,
     "All ap sta p md #j. APDeliverBuffered(ap,sta,p,md)@j ==> (Ex #i. APBufferUnit(ap,sta,p)@i & i<j)"),
    ("SecrecyMessagePSM", "Secrecy of Message for PSM", "psm", SECRECY,
     "(All ap sta p #i. APRecvDownlink(ap,sta,p)@i ==> not(K(p)))"
     " & (All sta p pm #i. STASendFrame(sta,p,pm)@i ==> not(K(p)))"),
    ("SecrecyKeyPSM", "Secrecy of Key for PSM", "psm", SECRECY,
     "(All s ap k #i. Associate(s,ap,k)@i ==> not(K(k))) & (All s k #i. Rekey(s,k)@i ==> not(K(k)))"),
)

_EXTENSIONS = (
    ("BasicDoSReached", "A fresh frame dropped as a retransmission", "frag", REACH,
     "Ex s c f q n m r q2 #i #j. SenderSendFragment(s,c,f,q,n,m)@i & DuplicateDropped(r,c,q2)@j"
     " & i<j & not(q=q2)"),
    ("FragDoSReached", "A fully acknowledged MSDU that is never delivered", "frag", REACH,
     "Ex s m q r src #i #j. SenderMsduAcked(s,m,q)@i & SeriesDiscarded(r,src,q)@j"
     " & not(Ex r2 #k. ReceiverDeliverMsdu(r2,m)@k)"),
    ("QueueLeakReached", "A buffered unit becomes attacker knowledge", "psm", REACH,
     "Ex ap sta p #i. APBufferUnit(ap,sta,p)@i & K(p)"),
)

_SUPPLEMENTARY = (
    ("MoreDataTruthfulnessPSM", "The More Data flag a polling STA acts on is the one the AP set", "psm", SAFETY,
     "All sta p md #j. STARecvBuffered(sta,p,md)@j ==> (Ex ap #i. APDeliverBuffered(ap,sta,p,md)@i & i<j)"
     " | (Ex ap #i. APSendDirect(ap,sta,p)@i & i<j & md='0')"),
)


def _build(rows, extension=False) -> tuple:
    return tuple(Property.define(n, k, text, title=t, segment=seg, extension=extension)
                 for n, t, seg, k, text in rows)


def catalog() -> tuple:
    """The 17 table properties followed by the 3 attack-reachability extensions."""
    return _build(_CATALOG) + _build(_EXTENSIONS, extension=True)


def supplementary() -> tuple:
    """Checked properties kept outside the catalog listing."""
    return _build(_SUPPLEMENTARY, extension=True)


def lookup(name: str) -> Property:
    for p in catalog() + supplementary():
        if name in (p.name, p.title):
            return p
    raise KeyError(name)


# ---------------------------------------------------------------- property files


def parse_property_file(text: str) -> list:
    """Blocks of ``property <name>`` / ``kind <kind>`` / ``formula <text>`` lines.

    Lines starting with ``//`` are comments. A formula may continue over
    several lines until the next blank line or ``property`` header.
    """
    props, cur = [], None

    def flush():
        if cur is None:
            return
        missing = {"name", "kind", "formula"} - cur.keys()
        if missing:
            raise FormulaError(f"property block missing {sorted(missing)}")
        props.append(Property.define(cur["name"], cur["kind"], cur["formula"],
                                     title=cur["name"], segment=cur.get("segment", "frag")))

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        key, _, rest = line.partition(" ")
        if key == "property":
            flush()
            cur = {"name": rest.strip()}
        elif cur is None:
            raise FormulaError(f"text before the first property block: {line!r}")
        elif key in ("kind", "segment"):
            cur[key] = rest.strip()
        elif key == "formula":
            cur["formula"] = rest.strip()
        elif "formula" in cur:
            cur["formula"] += " " + line
        else:
            raise FormulaError(f"unexpected line: {line!r}")
    flush()
    return props
