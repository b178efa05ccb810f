import pytest
from hypothesis import given
from hypothesis import strategies as st

from fragpsm.config import ModelVariant
from fragpsm.frames import AckMsg, MacHeader, Msdu, PsPoll, SecHeader, aad_of, header_parse, header_serialize
from fragpsm.terms import FreshName, const

headers = st.builds(
    MacHeader,
    src_mac=st.sampled_from(["STA_V", "AP", "STA_A"]),
    dst_mac=st.sampled_from(["STA_V", "AP"]),
    seq_num=st.integers(0, 15),
    frag_num=st.integers(0, 15),
    more_frag=st.integers(0, 1),
    retry=st.integers(0, 1),
    pwr_mgmt=st.integers(0, 1),
    more_data=st.integers(0, 1),
)


@given(headers)
def test_header_round_trip(h):
    assert header_parse(header_serialize(h)) == h


@pytest.mark.parametrize("kw", [{"seq_num": 16}, {"frag_num": -1}, {"retry": 2}])
def test_header_field_ranges(kw):
    with pytest.raises(ValueError):
        MacHeader("STA_V", "AP", **kw)


def test_msdu_chunk_bounds():
    with pytest.raises(ValueError):
        Msdu((), "STA_V")
    assert Msdu((FreshName(0),), "STA_V").as_term().items == (FreshName(0),)


def test_base_aad_omits_seq_retry_pm_md():
    h = MacHeader("STA_V", "AP", seq_num=3, retry=1, pwr_mgmt=1, more_data=1)
    base = aad_of(h, SecHeader(1), ModelVariant.base())
    for field in ("seq_num", "retry", "pwr_mgmt", "more_data"):
        flipped = h.with_(**{field: 1 - getattr(h, field) if field != "seq_num" else 4})
        assert aad_of(flipped, SecHeader(1), ModelVariant.base()) == base


@pytest.mark.parametrize("toggle,field", [("P3", "seq_num"), ("P3", "retry"), ("P4", "pwr_mgmt"), ("P4", "more_data")])
def test_patched_aad_covers_field(toggle, field):
    h = MacHeader("STA_V", "AP")
    other = h.with_(**{field: 1})
    v = ModelVariant.of(toggle)
    assert aad_of(h, SecHeader(1), v) != aad_of(other, SecHeader(1), v)


def test_control_frames_carry_only_addresses():
    assert AckMsg("STA_V").as_term().items == (const("ack"), const("STA_V"))
    assert PsPoll("STA_V").as_term().items == (const("pspoll"), const("STA_V"))
