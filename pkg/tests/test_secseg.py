import pytest
from hypothesis import given
from hypothesis import strategies as st

from fragpsm.config import ModelVariant
from fragpsm.frames import MacHeader
from fragpsm.secseg import RejectReason, Rejected, SecurityAssoc, decapsulate, encapsulate, rekey
from fragpsm.terms import FreshName, const

K = FreshName(0)
H = MacHeader("STA_V", "AP", seq_num=2)


def pair():
    return SecurityAssoc("AP", K), SecurityAssoc("STA_V", K)


def test_round_trip_and_pn_advance():
    tx, rx = pair()
    m, tx2 = encapsulate(tx, H, const("p"), ModelVariant.base())
    payload, rx2 = decapsulate(rx, m, ModelVariant.base())
    assert payload == const("p")
    assert tx2.send_pn == rx2.recv_pn == 1


def test_replayed_frame_rejected():
    tx, rx = pair()
    m, _ = encapsulate(tx, H, const("p"), ModelVariant.base())
    _, rx2 = decapsulate(rx, m, ModelVariant.base())
    with pytest.raises(Rejected) as e:
        decapsulate(rx2, m, ModelVariant.base())
    assert e.value.reason is RejectReason.BAD_PN


def test_wrong_key_rejected():
    tx, _ = pair()
    m, _ = encapsulate(tx, H, const("p"), ModelVariant.base())
    with pytest.raises(Rejected) as e:
        decapsulate(SecurityAssoc("STA_V", FreshName(9)), m, ModelVariant.base())
    assert e.value.reason is RejectReason.BAD_KEY


def test_rekey_resets_counters():
    sa = rekey(SecurityAssoc("AP", K, 5, 4, 0), FreshName(1))
    assert (sa.send_pn, sa.recv_pn, sa.epoch, sa.pairwise_key) == (0, 0, 1, FreshName(1))


@given(st.sampled_from(["seq_num", "retry", "pwr_mgmt", "more_data", "frag_num", "more_frag"]),
       st.sampled_from(["base", "P3", "P4", "patched"]))
def test_header_mutation_accepted_iff_outside_aad(field, variant_name):
    v = ModelVariant.from_name(variant_name)
    tx, rx = pair()
    m, _ = encapsulate(tx, H, const("p"), v)
    new = {"seq_num": 5}.get(field, 1)
    from dataclasses import replace
    mutated = replace(m, mac=H.with_(**{field: new}))
    protected = {"frag_num", "more_frag"}
    if v.has("P3"):
        protected |= {"seq_num", "retry"}
    if v.has("P4"):
        protected |= {"pwr_mgmt", "more_data"}
    if field in protected:
        with pytest.raises(Rejected):
            decapsulate(rx, mutated, v)
    else:
        assert decapsulate(rx, mutated, v)[0] == const("p")
