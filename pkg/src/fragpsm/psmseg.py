"""Power-save mode: station FSM, AP bitmap and bufferable-unit queue."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .config import AP, BUFFER_CAP, ModelVariant
from .fragseg import NotEnabled
from .frames import AckMsg, MacHeader, Mpdu, PsPoll
from .secseg import SecurityAssoc, decapsulate, encapsulate
from .terms import Term

ACTIVE = "Active"
INTERMEDIATE = "Intermediate"
POWER_SAVE = "PowerSave"
STA_ACTIVE = "StaActive"
STA_ASLEEP = "StaAsleep"


@dataclass(frozen=True, slots=True)
class StaPsmState:
    mac: str
    state: str = ACTIVE
    # set between a PS-poll and the buffered frame with more_data = 0
    polling: int = 0


@dataclass(frozen=True, slots=True)
class ApPsmState:
    bitmap: tuple = ()  # ((mac, StaActive|StaAsleep), ...) sorted
    buffer: tuple = ()  # ((dst, payload), ...) in arrival order, payload in plaintext

    def status(self, mac: str) -> str:
        for m, s in self.bitmap:
            if m == mac:
                return s
        return STA_ACTIVE

    def with_status(self, mac: str, status: str) -> "ApPsmState":
        rest = [(m, s) for m, s in self.bitmap if m != mac] + [(mac, status)]
        return replace(self, bitmap=tuple(sorted(rest)))

    def queued(self, mac: str) -> tuple:
        return tuple(p for d, p in self.buffer if d == mac)


def sta_request_doze(s: StaPsmState, sa: SecurityAssoc, payload: Term,
                     variant: ModelVariant) -> tuple[StaPsmState, SecurityAssoc, Mpdu]:
    if s.state != ACTIVE or s.polling:
        raise NotEnabled("station is not idle and active")
    mpdu, sa2 = encapsulate(sa, MacHeader(s.mac, AP, pwr_mgmt=1), payload, variant)
    return replace(s, state=INTERMEDIATE), sa2, mpdu


def sta_send_data(s: StaPsmState, sa: SecurityAssoc, payload: Term,
                  variant: ModelVariant) -> tuple[SecurityAssoc, Mpdu]:
    if s.state != ACTIVE:
        raise NotEnabled("station is not active")
    mpdu, sa2 = encapsulate(sa, MacHeader(s.mac, AP, pwr_mgmt=0), payload, variant)
    return sa2, mpdu


def sta_recv_ack(s: StaPsmState, ack: AckMsg) -> StaPsmState:
    if s.state != INTERMEDIATE or ack.dst != s.mac:
        raise NotEnabled("no doze exchange pending")
    return replace(s, state=POWER_SAVE)


def ap_recv_doze(a: ApPsmState, sa: SecurityAssoc, m: Mpdu,
                 variant: ModelVariant) -> tuple[ApPsmState, SecurityAssoc, Term, Optional[AckMsg]]:
    """AP side of any uplink frame; pm = 1 marks the sender asleep and is ACKed.

    Raises ``Rejected`` when decapsulation fails.
    """
    payload, sa2 = decapsulate(sa, m, variant)
    if m.mac.pwr_mgmt:
        return a.with_status(m.mac.src_mac, STA_ASLEEP), sa2, payload, AckMsg(m.mac.src_mac)
    return a, sa2, payload, None


def ap_buffer_frame(a: ApPsmState, dst: str, payload: Term) -> ApPsmState:
    if a.status(dst) != STA_ASLEEP:
        raise NotEnabled(f"{dst} is not asleep")
    if len(a.queued(dst)) >= BUFFER_CAP:
        raise NotEnabled(f"buffer for {dst} is full")
    return replace(a, buffer=a.buffer + ((dst, payload),))


def ap_send_direct(a: ApPsmState, sa: SecurityAssoc, dst: str, payload: Term,
                   variant: ModelVariant) -> tuple[SecurityAssoc, Mpdu]:
    if a.status(dst) != STA_ACTIVE:
        raise NotEnabled(f"{dst} is asleep")
    mpdu, sa2 = encapsulate(sa, MacHeader(AP, dst), payload, variant)
    return sa2, mpdu


def sta_wake_poll(s: StaPsmState) -> tuple[StaPsmState, PsPoll]:
    if s.state != POWER_SAVE:
        raise NotEnabled("station is not dozing")
    return replace(s, state=ACTIVE, polling=1), PsPoll(s.mac)


def ap_deliver_buffered(a: ApPsmState, sa: SecurityAssoc, poll: PsPoll,
                        variant: ModelVariant) -> tuple[ApPsmState, SecurityAssoc, Term, Mpdu]:
    queued = a.queued(poll.sta)
    if not queued:
        raise NotEnabled(f"nothing buffered for {poll.sta}")
    head = queued[0]
    idx = next(i for i, (d, _) in enumerate(a.buffer) if d == poll.sta)
    rest = a.buffer[:idx] + a.buffer[idx + 1:]
    mac = MacHeader(AP, poll.sta, more_data=1 if len(queued) > 1 else 0)
    mpdu, sa2 = encapsulate(sa, mac, head, variant)
    return replace(a, buffer=rest), sa2, head, mpdu


def sta_recv_buffered(s: StaPsmState, sa: SecurityAssoc, m: Mpdu, variant: ModelVariant
                      ) -> tuple[StaPsmState, SecurityAssoc, Term, Optional[PsPoll]]:
    if not s.polling:
        raise NotEnabled("station did not poll")
    payload, sa2 = decapsulate(sa, m, variant)
    if m.mac.more_data:
        return s, sa2, payload, PsPoll(s.mac)
    return replace(s, state=POWER_SAVE, polling=0), sa2, payload, None


def sta_recv_direct(s: StaPsmState, sa: SecurityAssoc, m: Mpdu,
                    variant: ModelVariant) -> tuple[SecurityAssoc, Term]:
    if s.state != ACTIVE or s.polling:
        raise NotEnabled("station is not receiving ordinary traffic")
    payload, sa2 = decapsulate(sa, m, variant)
    return sa2, payload


def clear_buffer_on_disconnect(a: ApPsmState, peer: str) -> ApPsmState:
    return replace(
        a.with_status(peer, STA_ACTIVE),
        buffer=tuple((d, p) for d, p in a.buffer if d != peer),
    )
