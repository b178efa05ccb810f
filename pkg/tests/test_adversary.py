import pytest

from fragpsm.adversary import (
    AdversaryConfig, CapabilityError, InjectionRejected, Mode, channel_inject, channel_intercept,
    header_mutations, spoof_tamper_bitmap, spoof_tamper_buffer, spoof_tamper_sa,
)
from fragpsm.config import AP, STA_V, ModelVariant
from fragpsm.fragseg import DefragState
from fragpsm.frames import MacHeader
from fragpsm.psmseg import STA_ASLEEP, ApPsmState
from fragpsm.secseg import SecurityAssoc, encapsulate
from fragpsm.terms import FreshName, KnowledgeBase, const

K = FreshName(0)


def frame(**kw):
    m, _ = encapsulate(SecurityAssoc(STA_V, K), MacHeader(STA_V, AP, **kw), FreshName(1), ModelVariant.base())
    return m


def test_mode_labels_round_trip():
    for m in Mode:
        assert Mode.parse(m.label) is m
    with pytest.raises(ValueError):
        Mode.parse("telepathic")


def test_passive_cannot_touch_channel():
    cfg = AdversaryConfig(Mode.PASSIVE)
    with pytest.raises(CapabilityError):
        channel_intercept(cfg, frame())
    with pytest.raises(CapabilityError):
        channel_inject(cfg, frame())


def test_observed_frame_can_be_reinjected_but_not_forged():
    cfg = AdversaryConfig()
    m = frame()
    with pytest.raises(InjectionRejected):
        channel_inject(cfg, m)
    cfg = channel_intercept(cfg, m)
    channel_inject(cfg, m)
    forged, _ = encapsulate(SecurityAssoc(STA_V, K), m.mac, const("evil"), ModelVariant.base())
    with pytest.raises(InjectionRejected):
        channel_inject(cfg, forged)


def test_mutations_only_change_header():
    m = frame()
    muts = header_mutations(m, (0, 1), uplink_psm=True, downlink_psm=False)
    labels = [lab for lab, _ in muts]
    assert len(labels) == len(set(labels))
    assert "md" not in labels and "pm" in labels
    assert all(x.cipher_body == m.cipher_body and x.mac != m.mac for _, x in muts)


def test_spoofing_required_for_tampering():
    dy = AdversaryConfig()
    with pytest.raises(CapabilityError):
        spoof_tamper_bitmap(dy, ApPsmState(), STA_ASLEEP)
    spoof = AdversaryConfig(Mode.MAC_SPOOFING)
    assert spoof.spoof_target == STA_V
    assert spoof_tamper_bitmap(spoof, ApPsmState(), STA_ASLEEP).status(STA_V) == STA_ASLEEP


def test_tamper_buffer_needs_known_payload():
    spoof = AdversaryConfig(Mode.MAC_SPOOFING)
    with pytest.raises(InjectionRejected):
        spoof_tamper_buffer(spoof, ApPsmState(), FreshName(7))
    spoof = spoof.with_kb(KnowledgeBase().learn(FreshName(7)))
    ap = spoof_tamper_buffer(spoof, ApPsmState(), FreshName(7))
    assert ap.queued(STA_V) == (FreshName(7),)
    d = spoof_tamper_buffer(spoof, DefragState(), (3, 0, FreshName(7)))
    assert d.entries((STA_V, 3)) == ((0, FreshName(7)),)


def test_tamper_sa_installs_attacker_key():
    spoof = AdversaryConfig(Mode.MAC_SPOOFING, kb=KnowledgeBase().learn(FreshName(8)))
    table = spoof_tamper_sa(spoof, {STA_V: SecurityAssoc(STA_V, K, 3, 3, 0)}, FreshName(8))
    assert table[STA_V] == SecurityAssoc(STA_V, FreshName(8), 0, 0, 1)
    with pytest.raises(InjectionRejected):
        spoof_tamper_sa(spoof, {}, FreshName(9))
