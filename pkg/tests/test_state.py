import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragpsm.adversary import AdversaryConfig, Mode
from fragpsm.config import STA_V, ModelVariant, Workload
from fragpsm.explorer import explore
from fragpsm.model import init_state
from fragpsm.psmseg import STA_ASLEEP, ApPsmState
from fragpsm.state import Fact, GlobalState, StateError, canonicalize, parse_state

DY = AdversaryConfig(Mode.DOLEV_YAO, budget=1)


def sample_states():
    init = init_state(Workload("frag", frag_msdus=(2,)), DY)
    res = explore(init, ModelVariant.base(), DY, 8)
    return [res.trace(rid).terminal for rid in range(1, len(res.records), 11)]


SAMPLES = sample_states()


def rename(g, perm):
    text = re.sub(r"~n(\d+)", lambda m: f"~n{perm(int(m.group(1)))}", g.render())
    return parse_state(text)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SAMPLES), st.integers(1, 50))
def test_canonical_form_ignores_fresh_renaming(g, shift):
    assert canonicalize(rename(g, lambda i: 3 * i + shift)) == canonicalize(g)


@pytest.mark.parametrize("g", SAMPLES[:10])
def test_parse_round_trip(g):
    c = canonicalize(g)
    assert canonicalize(parse_state(c)) == c


def test_single_bitmap_bit_is_distinguished():
    init = init_state(Workload("psm"), DY)
    ap = init.get("ApPsm")
    asleep = init.update(remove=[Fact("ApPsm", (ap,))], add=[Fact("ApPsm", (ap.with_status(STA_V, STA_ASLEEP),))])
    assert canonicalize(init) != canonicalize(asleep)


def test_history_is_part_of_the_key():
    g = SAMPLES[0]
    assert canonicalize(g, ("A(~n1)",)) != canonicalize(g, ("B(~n1)",))


def test_schema_is_enforced():
    with pytest.raises(StateError):
        GlobalState((Fact("NoSuchFact", ()),))
    with pytest.raises(StateError):
        GlobalState((Fact("ApPsm", (ApPsmState(),)), Fact("ApPsm", (ApPsmState(),))))


def test_samples_are_reachable():
    assert len(SAMPLES) > 5
    assert all(isinstance(g, GlobalState) for g in SAMPLES)
