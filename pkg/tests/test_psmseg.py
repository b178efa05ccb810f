import pytest

from fragpsm.config import AP, BUFFER_CAP, STA_V, ModelVariant
from fragpsm.fragseg import NotEnabled
from fragpsm.frames import AckMsg
from fragpsm.psmseg import (
    ACTIVE, INTERMEDIATE, POWER_SAVE, STA_ACTIVE, STA_ASLEEP, ApPsmState, StaPsmState, ap_buffer_frame,
    ap_deliver_buffered, ap_recv_doze, ap_send_direct, clear_buffer_on_disconnect, sta_recv_ack,
    sta_recv_buffered, sta_recv_direct, sta_request_doze, sta_send_data, sta_wake_poll,
)
from fragpsm.secseg import SecurityAssoc
from fragpsm.terms import FreshName, const

V = ModelVariant.base()
K = FreshName(0)


def doze():
    sta, sa_sta, m = sta_request_doze(StaPsmState(STA_V), SecurityAssoc(AP, K), const("null"), V)
    ap, sa_ap, _, ack = ap_recv_doze(ApPsmState(), SecurityAssoc(STA_V, K), m, V)
    return sta_recv_ack(sta, ack), ap, sa_sta, sa_ap


def test_doze_handshake():
    sta, ap, _, _ = doze()
    assert sta.state == POWER_SAVE
    assert ap.status(STA_V) == STA_ASLEEP


def test_doze_waits_for_ack():
    sta, _, _ = sta_request_doze(StaPsmState(STA_V), SecurityAssoc(AP, K), const("null"), V)
    assert sta.state == INTERMEDIATE
    with pytest.raises(NotEnabled):
        sta_recv_ack(StaPsmState(STA_V), AckMsg(STA_V))


def test_buffer_only_while_asleep_and_bounded():
    with pytest.raises(NotEnabled):
        ap_buffer_frame(ApPsmState(), STA_V, FreshName(1))
    ap = ApPsmState().with_status(STA_V, STA_ASLEEP)
    for i in range(BUFFER_CAP):
        ap = ap_buffer_frame(ap, STA_V, FreshName(i + 1))
    with pytest.raises(NotEnabled):
        ap_buffer_frame(ap, STA_V, FreshName(9))


def test_direct_send_only_to_awake_station():
    ap = ApPsmState().with_status(STA_V, STA_ASLEEP)
    with pytest.raises(NotEnabled):
        ap_send_direct(ap, SecurityAssoc(STA_V, K), STA_V, FreshName(1), V)


def test_poll_drains_queue_fifo_with_more_data():
    sta, ap, sa_sta, sa_ap = doze()
    payloads = [FreshName(5), FreshName(6)]
    for p in payloads:
        ap = ap_buffer_frame(ap, STA_V, p)
    sta, poll = sta_wake_poll(sta)
    got, flags = [], []
    while poll is not None:
        ap, sa_ap, _, m = ap_deliver_buffered(ap, sa_ap, poll, V)
        flags.append(m.mac.more_data)
        sta, sa_sta, p, poll = sta_recv_buffered(sta, sa_sta, m, V)
        got.append(p)
    assert got == payloads and flags == [1, 0]
    assert sta.state == POWER_SAVE and not sta.polling and not ap.buffer


def test_direct_frames_refused_while_polling():
    sta, _, _, _ = doze()
    sta, _ = sta_wake_poll(sta)
    sa, m = ap_send_direct(ApPsmState(), SecurityAssoc(STA_V, K), STA_V, FreshName(1), V)
    with pytest.raises(NotEnabled):
        sta_recv_direct(sta, SecurityAssoc(AP, K), m, V)


def test_pm_zero_frame_leaves_bitmap():
    _, ap, _, _ = doze()
    _, m = sta_send_data(StaPsmState(STA_V, ACTIVE), SecurityAssoc(AP, K, send_pn=1), const("d"), V)
    ap2, _, _, ack = ap_recv_doze(ap, SecurityAssoc(STA_V, K, recv_pn=1), m, V)
    assert ack is None and ap2.status(STA_V) == STA_ASLEEP


def test_disconnect_clears_peer_buffer_and_bitmap():
    ap = ap_buffer_frame(ApPsmState().with_status(STA_V, STA_ASLEEP), STA_V, FreshName(1))
    ap = clear_buffer_on_disconnect(ap, STA_V)
    assert ap.status(STA_V) == STA_ACTIVE and not ap.buffer
