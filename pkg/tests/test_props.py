import pytest

import oracles
from fragpsm.adversary import AdversaryConfig, Mode
from fragpsm.config import ModelVariant, Workload
from fragpsm.explorer import explore
from fragpsm.model import init_state
from fragpsm.props import (
    FALSIFIED, REACH, VERIFIED, WITNESS, And, EventAtom, Forall, FormulaError, Implies, Know, TraceView,
    UnknownEvent, catalog, check_trace, evaluate, holds, lookup, parse_formula, parse_property_file,
    supplementary,
)

ALL = catalog() + supplementary()


def run(segment, mode, depth, variant="base", **wl):
    adv = AdversaryConfig(Mode.parse(mode), budget=1 if mode == "dolev-yao" else 3)
    return explore(init_state(Workload(segment, **wl), adv), ModelVariant.from_name(variant), adv, depth)


@pytest.fixture(scope="module")
def explorations():
    return {
        "frag": [run("frag", "dolev-yao", 9, frag_msdus=(2,), rekeys=1),
                 run("frag", "mac-spoofing", 8, frag_msdus=(1,)),
                 run("frag", "dolev-yao", 8, "P1+P3", frag_msdus=(1, 2))],
        "psm": [run("psm", "dolev-yao", 9, downlink=1, uplink=1),
                run("psm", "mac-spoofing", 8, downlink=1, uplink=0),
                run("psm", "dolev-yao", 9, "P4", downlink=2, uplink=0)],
    }


def test_catalog_shape():
    assert len(catalog()) == 20
    assert len({p.name for p in catalog()}) == 20
    assert sum(p.extension for p in catalog()) == 3
    assert all(p.kind == REACH for p in catalog() if p.extension)


def test_lookup_by_name_and_title():
    p = lookup("IntegritySequenceNumberFrag")
    assert lookup(p.title) == p
    with pytest.raises(KeyError):
        lookup("NoSuchProperty")


def test_parser_builds_expected_tree():
    f = parse_formula("All x y #i. Rekey(x,y)@i ==> K(y)")
    assert isinstance(f, Forall) and isinstance(f.body, Implies)
    assert isinstance(f.body.a, EventAtom) and isinstance(f.body.b, Know)


@pytest.mark.parametrize("text", [
    "All x. Associate(x,y,z)@i",
    "Ex x. Associate(x",
    "Associate(a,b,c)@i &",
    "Ex x #i. Associate(x,x,x)@i ) ",
])
def test_malformed_formulas_rejected(text):
    with pytest.raises(FormulaError):
        parse_formula(text)


def test_unknown_event_rejected():
    with pytest.raises(UnknownEvent):
        parse_formula("Ex x #i. Teleport(x)@i")


def test_evaluator_on_handmade_trace():
    from fragpsm.events import ev
    from fragpsm.terms import const
    f = parse_formula("Ex a b #i #j. Rekey(a,b)@i & Rekey(a,b)@j & i<j")
    e = ev("Rekey", const("STA_V"), const("k"))
    assert holds(f, TraceView([(e,), (), (e,)], frozenset()))
    assert not holds(f, TraceView([(e,)], frozenset()))


def test_property_file():
    text = """
    // two properties
    property Twice
    kind reach
    formula Ex a b #i #j. Rekey(a,b)@i &
        Rekey(a,b)@j & i<j

    property KeySecret
    kind secrecy
    segment psm
    formula All s k #i. Associate(s,'AP',k)@i ==> not(K(k))
    """
    a, b = parse_property_file(text)
    assert (a.name, a.kind, b.segment) == ("Twice", "reach", "psm")
    assert isinstance(a.formula.body, And) and len(a.formula.body.parts) == 3
    with pytest.raises(FormulaError):
        parse_property_file("property Bare\nkind safety\n")


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_evaluator_agrees_with_straight_line_checker(p, explorations):
    want = p.kind == REACH
    for res in explorations[p.segment]:
        for rid in range(1, len(res.records)):
            r = res.records[rid]
            steps = res.steps(rid)
            expected = oracles.violates(p.name, steps, r.knows)
            got = holds(p.formula, TraceView(steps, r.knows)) == want
            assert got == expected, (res.model.name, res.adv.mode.label, [i.label for i in res.rules(rid)])


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_verdict_trace_is_a_genuine_counterexample(p, explorations):
    for res in explorations[p.segment]:
        v = evaluate(p, res)
        if v.outcome in (FALSIFIED, WITNESS):
            assert check_trace(p, v.trace)
            assert oracles.violates(p.name, v.trace.events, v.trace.terminal.get("Knows"))
            # first hit in breadth-first order is a shortest one
            assert len(v.trace.steps) == res.records[v.record].depth
        else:
            assert v.outcome in (VERIFIED, "NotReachedWithinBound")


def test_falsification_is_monotone_in_depth():
    p = lookup("IntegritySequenceNumberFrag")
    outcomes = [evaluate(p, run("frag", "dolev-yao", d, frag_msdus=(1, 1))).outcome for d in range(3, 10)]
    first = outcomes.index(FALSIFIED)
    assert all(o == FALSIFIED for o in outcomes[first:])
    assert all(o == VERIFIED for o in outcomes[:first])
