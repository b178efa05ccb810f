"""Fragmentation (sender) and defragmentation (receiver) state machines.

All transitions are pure: they take a state and return the next one. A
precondition that does not hold raises :class:`NotEnabled`, which the rule
layer treats as "this rule instance is not applicable".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .config import AP, SEQ_MOD, ModelVariant
from .frames import AckMsg, MacHeader, Mpdu, Msdu
from .secseg import SecurityAssoc, decapsulate, encapsulate, whole_frame_mic
from .terms import Term, Tuple, const

INITIALLY_CONNECTED = "InitiallyConnected"
FRAG_PROCESSING = "FragmentationProcessing"
FRAG_COMPLETED = "FragmentationCompleted"
TIME_EXCEED = "TimeExceed"
RECV_PROCESSING = "ReceptionProcessing"
RECV_COMPLETED = "ReceptionCompleted"


class NotEnabled(Exception):
    """A transition's precondition does not hold."""


@dataclass(frozen=True, slots=True)
class FragSenderState:
    state: str = INITIALLY_CONNECTED
    current_msdu: Optional[Msdu] = None
    next_frag: int = 0
    seq_num: int = 0
    awaiting_ack: int = 0
    nonce: Optional[Term] = None
    msdu_count: int = 0


def fragment_payload(chunk: Term, nonce: Term, wmic: Optional[Term] = None) -> Tuple:
    return Tuple((chunk, nonce) if wmic is None else (chunk, nonce, wmic))


def split_payload(payload: Term) -> tuple[Term, Term, Optional[Term]]:
    if isinstance(payload, Tuple) and len(payload.items) in (2, 3):
        items = payload.items
        return items[0], items[1], items[2] if len(items) == 3 else None
    return payload, const("none"), None


def frag_start(s: FragSenderState, msdu: Msdu, nonce: Term) -> FragSenderState:
    """Hand a new MSDU to the sender; it gets the next sequence number."""
    if s.current_msdu is not None:
        raise NotEnabled("an MSDU is already in flight")
    return replace(
        s,
        current_msdu=msdu,
        next_frag=0,
        seq_num=s.msdu_count % SEQ_MOD,
        awaiting_ack=0,
        nonce=nonce,
        msdu_count=s.msdu_count + 1,
    )


def frag_step(s: FragSenderState, sa: SecurityAssoc,
              variant: ModelVariant) -> tuple[FragSenderState, SecurityAssoc, Mpdu]:
    if s.current_msdu is None or s.awaiting_ack:
        raise NotEnabled("no sendable fragment")
    msdu = s.current_msdu
    k = s.next_frag
    if k >= len(msdu.chunks):
        raise NotEnabled("all fragments already sent")
    last = k == len(msdu.chunks) - 1
    wmic = whole_frame_mic(msdu, sa.pairwise_key) if last and variant.has("P1") else None
    mac = MacHeader(msdu.origin, AP, seq_num=s.seq_num, frag_num=k, more_frag=0 if last else 1)
    mpdu, sa2 = encapsulate(sa, mac, fragment_payload(msdu.chunks[k], s.nonce, wmic), variant)
    s2 = replace(
        s,
        state=FRAG_COMPLETED if last else FRAG_PROCESSING,
        next_frag=k + 1,
        awaiting_ack=1,
    )
    return s2, sa2, mpdu


def frag_ack(s: FragSenderState, ack: AckMsg) -> tuple[FragSenderState, Optional[Msdu]]:
    """Consume an ACK. Returns the completed MSDU when this ACK finishes it.

    The ACK carries no sequence or fragment number, so any ACK unblocks.
    """
    del ack
    if not s.awaiting_ack:
        raise NotEnabled("not awaiting an ACK")
    msdu = s.current_msdu
    if msdu is not None and s.next_frag == len(msdu.chunks):
        return replace(s, awaiting_ack=0, current_msdu=None, next_frag=0, nonce=None), msdu
    return replace(s, awaiting_ack=0), None


def frag_timeout(s: FragSenderState) -> FragSenderState:
    if s.current_msdu is None:
        raise NotEnabled("nothing in flight")
    return replace(s, state=TIME_EXCEED, current_msdu=None, next_frag=0, awaiting_ack=0, nonce=None)


# ---------------------------------------------------------------- receiver


@dataclass(frozen=True, slots=True)
class DefragState:
    state: str = INITIALLY_CONNECTED
    # ((src, seq), ((frag_num, payload), ...)) sorted by key, entries by frag_num
    cache: tuple = ()
    dedup: frozenset = field(default_factory=frozenset)
    expired: frozenset = field(default_factory=frozenset)

    @property
    def timer_armed(self) -> frozenset:
        return frozenset(k for k, _ in self.cache)

    def entries(self, key) -> tuple:
        for k, v in self.cache:
            if k == key:
                return v
        return ()

    def with_entries(self, key, entries: tuple) -> "DefragState":
        rest = [(k, v) for k, v in self.cache if k != key]
        if entries:
            rest.append((key, tuple(sorted(entries, key=lambda e: e[0]))))
        return replace(self, cache=tuple(sorted(rest, key=lambda kv: kv[0])))

    def insert(self, key, frag_num: int, payload: Term) -> "DefragState":
        """Store a fragment; an existing entry for the same frag_num wins."""
        entries = self.entries(key)
        if any(f == frag_num for f, _ in entries):
            return self
        return replace(
            self.with_entries(key, entries + ((frag_num, payload),)),
            dedup=self.dedup - {key},
        )


@dataclass(frozen=True, slots=True)
class DefragOutcome:
    """What the receiver did with one accepted MPDU.

    kind is one of stored, delivered, discarded, duplicate, expired.
    """

    kind: str
    key: tuple
    frag_num: int
    chunk: Term
    nonce: Term
    msdu: Optional[Msdu] = None
    ack: Optional[AckMsg] = None


def _close(d: DefragState, key, last: int, variant: ModelVariant) -> tuple[DefragState, Optional[Msdu]]:
    entries = d.entries(key)
    d2 = replace(d.with_entries(key, ()), dedup=d.dedup | {key}, state=RECV_COMPLETED)
    if [f for f, _ in entries] != list(range(last + 1)):
        return d2, None
    parts = [split_payload(p) for _, p in entries]
    msdu = Msdu(tuple(c for c, _, _ in parts), key[0])
    if variant.has("P1"):
        wmic = parts[-1][2]
        if wmic is None or wmic != whole_frame_mic(msdu, None):
            return d2, None
    return d2, msdu


def defrag_receive(d: DefragState, sa: SecurityAssoc, m: Mpdu,
                   variant: ModelVariant) -> tuple[DefragState, SecurityAssoc, DefragOutcome]:
    """Process one MPDU. Raises ``Rejected`` when decapsulation fails."""
    payload, sa2 = decapsulate(sa, m, variant)
    h = m.mac
    key = (h.src_mac, h.seq_num)
    chunk, nonce, _ = split_payload(payload)
    ack = AckMsg(h.src_mac)

    def out(kind, msdu=None):
        return DefragOutcome(kind, key, h.frag_num, chunk, nonce, msdu, ack)

    if h.retry and key in d.dedup:
        return d, sa2, out("duplicate")
    if key in d.expired:
        return d, sa2, out("expired")
    if any(f == h.frag_num for f, _ in d.entries(key)):
        return d, sa2, out("duplicate")
    d = d.insert(key, h.frag_num, payload)
    if h.more_frag:
        return replace(d, state=RECV_PROCESSING), sa2, out("stored")
    d, msdu = _close(d, key, h.frag_num, variant)
    return d, sa2, out("delivered" if msdu is not None else "discarded", msdu)


def defrag_timeout(d: DefragState, key) -> DefragState:
    if key not in d.timer_armed:
        raise NotEnabled(f"no timer armed for {key}")
    return replace(d.with_entries(key, ()), expired=d.expired | {key}, state=TIME_EXCEED)


def clear_cache_on_disconnect(d: DefragState, peer: str) -> DefragState:
    return replace(
        d,
        cache=tuple((k, v) for k, v in d.cache if k[0] != peer),
        dedup=frozenset(k for k in d.dedup if k[0] != peer),
        expired=frozenset(k for k in d.expired if k[0] != peer),
    )
