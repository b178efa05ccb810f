"""802.11 frame data model: MAC header, CCMP/GCMP header, MSDU and MPDU."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .config import MAX_FRAGMENTS, SEQ_MOD, ModelVariant
from .terms import Term, Tuple, const, render_term

HEADER_FIELDS = ("src", "dst", "seq", "frag", "mf", "retry", "pm", "md")


@dataclass(frozen=True, slots=True)
class MacHeader:
    src_mac: str
    dst_mac: str
    seq_num: int = 0
    frag_num: int = 0
    more_frag: int = 0
    retry: int = 0
    pwr_mgmt: int = 0
    more_data: int = 0

    def __post_init__(self):
        if not 0 <= self.frag_num < MAX_FRAGMENTS:
            raise ValueError(f"frag_num {self.frag_num} outside 0..{MAX_FRAGMENTS - 1}")
        if not 0 <= self.seq_num < SEQ_MOD:
            raise ValueError(f"seq_num {self.seq_num} outside 0..{SEQ_MOD - 1}")
        for bit in (self.more_frag, self.retry, self.pwr_mgmt, self.more_data):
            if bit not in (0, 1):
                raise ValueError(f"flag must be 0 or 1, got {bit}")

    def with_(self, **changes) -> "MacHeader":
        return replace(self, **changes)


@dataclass(frozen=True, slots=True)
class SecHeader:
    pn: int
    key_id: str = "0"


@dataclass(frozen=True, slots=True)
class Msdu:
    chunks: tuple
    origin: str

    def __post_init__(self):
        if not 1 <= len(self.chunks) <= MAX_FRAGMENTS:
            raise ValueError(f"an MSDU carries 1..{MAX_FRAGMENTS} chunks, got {len(self.chunks)}")

    def as_term(self) -> Tuple:
        return Tuple(tuple(self.chunks))


@dataclass(frozen=True, slots=True)
class Mpdu:
    mac: MacHeader
    sec: SecHeader
    cipher_body: Term
    cipher_mic: Term

    def as_term(self) -> Tuple:
        """The frame as the attacker sees it on air."""
        h = self.mac
        return Tuple((
            const(h.src_mac), const(h.dst_mac), const(h.seq_num), const(h.frag_num),
            const(h.more_frag), const(h.retry), const(h.pwr_mgmt), const(h.more_data),
            const(self.sec.pn), const(self.sec.key_id), self.cipher_body, self.cipher_mic,
        ))


@dataclass(frozen=True, slots=True)
class AckMsg:
    """Control frame; carries only the receiver address."""

    dst: str

    def as_term(self) -> Tuple:
        return Tuple((const("ack"), const(self.dst)))


@dataclass(frozen=True, slots=True)
class PsPoll:
    """Control frame; carries only the polling station's address."""

    sta: str

    def as_term(self) -> Tuple:
        return Tuple((const("pspoll"), const(self.sta)))


def aad_of(mac: MacHeader, sec: SecHeader, variant: ModelVariant) -> Tuple:
    fields = [
        const(mac.src_mac), const(mac.dst_mac), const(mac.frag_num), const(mac.more_frag),
        const(sec.pn), const(sec.key_id),
    ]
    if variant.has("P3"):
        fields += [const(mac.seq_num), const(mac.retry)]
    if variant.has("P4"):
        fields += [const(mac.pwr_mgmt), const(mac.more_data)]
    return Tuple(tuple(fields))


def header_serialize(mac: MacHeader) -> str:
    return (
        f"mac{{src={mac.src_mac},dst={mac.dst_mac},seq={mac.seq_num},frag={mac.frag_num},"
        f"mf={mac.more_frag},retry={mac.retry},pm={mac.pwr_mgmt},md={mac.more_data}}}"
    )


_HEADER_RE = re.compile(
    r"mac\{src=(\w+),dst=(\w+),seq=(\d+),frag=(\d+),mf=(\d),retry=(\d),pm=(\d),md=(\d)\}"
)


def header_parse(text: str) -> MacHeader:
    m = _HEADER_RE.fullmatch(text)
    if not m:
        raise ValueError(f"not a MAC header: {text!r}")
    src, dst, *nums = m.groups()
    return MacHeader(src, dst, *(int(n) for n in nums))


def mpdu_serialize(m: Mpdu) -> str:
    return (
        f"mpdu({header_serialize(m.mac)},sec{{pn={m.sec.pn},key={m.sec.key_id}}},"
        f"{render_term(m.cipher_body)},{render_term(m.cipher_mic)})"
    )
