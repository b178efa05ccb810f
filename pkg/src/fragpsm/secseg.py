"""Security encapsulation segment: CCMP/GCMP at the symbolic level.

CCMP and GCMP behave identically here; ``SCHEME`` only labels reports.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .config import ModelVariant
from .frames import MacHeader, Mpdu, Msdu, SecHeader, aad_of
from .terms import DecryptFailure, Mic, SEnc, Term, Tuple, const, sdec

SCHEME = "CCMP/GCMP"


@dataclass(frozen=True, slots=True)
class SecurityAssoc:
    peer_mac: str
    pairwise_key: Term
    send_pn: int = 0
    recv_pn: int = 0
    epoch: int = 0


class RejectReason(enum.Enum):
    BAD_KEY = "BadKey"
    BAD_MIC = "BadMic"
    BAD_PN = "BadPn"


class Rejected(Exception):
    def __init__(self, reason: RejectReason):
        super().__init__(reason.value)
        self.reason = reason


def _mic_over(mac: MacHeader, sec: SecHeader, payload: Term, variant: ModelVariant) -> Mic:
    return Mic(Tuple((aad_of(mac, sec, variant), payload)))


def encapsulate(sa: SecurityAssoc, mac: MacHeader, payload: Term,
                variant: ModelVariant) -> tuple[Mpdu, SecurityAssoc]:
    sa2 = replace(sa, send_pn=sa.send_pn + 1)
    sec = SecHeader(pn=sa2.send_pn, key_id=str(sa.epoch % 4))
    key = sa.pairwise_key
    mpdu = Mpdu(mac, sec, SEnc(payload, key), SEnc(_mic_over(mac, sec, payload, variant), key))
    return mpdu, sa2


def decapsulate(sa: SecurityAssoc, m: Mpdu, variant: ModelVariant) -> tuple[Term, SecurityAssoc]:
    """Open an MPDU or raise :class:`Rejected`.

    The PN check is strict successor (pn == recv_pn + 1).
    """
    try:
        payload = sdec(m.cipher_body, sa.pairwise_key)
        mic = sdec(m.cipher_mic, sa.pairwise_key)
    except DecryptFailure:
        raise Rejected(RejectReason.BAD_KEY) from None
    if mic != _mic_over(m.mac, m.sec, payload, variant):
        raise Rejected(RejectReason.BAD_MIC)
    if m.sec.pn != sa.recv_pn + 1:
        raise Rejected(RejectReason.BAD_PN)
    return payload, replace(sa, recv_pn=m.sec.pn)


def rekey(sa: SecurityAssoc, fresh_key: Term) -> SecurityAssoc:
    return SecurityAssoc(sa.peer_mac, fresh_key, 0, 0, sa.epoch + 1)


def whole_frame_mic(msdu: Msdu, key: Term) -> Mic:
    # confidentiality comes from the final fragment's encryption, not from `key`
    del key
    return Mic(Tuple(tuple(msdu.chunks) + (const(msdu.origin),)))
