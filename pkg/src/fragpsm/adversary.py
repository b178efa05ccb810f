"""Threat models: Dolev-Yao channel control and the MAC-spoofing attacker."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

from .config import STA_V
from .fragseg import DefragState
from .frames import Mpdu
from .psmseg import ApPsmState
from .secseg import SecurityAssoc
from .terms import KnowledgeBase, Term


class Mode(enum.IntEnum):
    PASSIVE = 0
    DOLEV_YAO = 1
    MAC_SPOOFING = 2

    @property
    def label(self) -> str:
        return {0: "passive", 1: "dolev-yao", 2: "mac-spoofing"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Mode":
        for m in cls:
            if m.label == text:
                return m
        raise ValueError(f"unknown adversary mode {text!r}")


class CapabilityError(Exception):
    """The adversary tried something outside its threat model."""


class InjectionRejected(CapabilityError):
    """An injected message contains a term the attacker cannot derive."""


@dataclass(frozen=True)
class AdversaryConfig:
    mode: Mode = Mode.DOLEV_YAO
    spoof_target: Optional[str] = None
    kb: KnowledgeBase = field(default_factory=KnowledgeBase)
    # cap on active attacker rule applications per trace
    budget: int = 4

    def __post_init__(self):
        if self.mode is Mode.MAC_SPOOFING and self.spoof_target is None:
            object.__setattr__(self, "spoof_target", STA_V)

    @property
    def can_channel(self) -> bool:
        return self.mode >= Mode.DOLEV_YAO

    @property
    def can_spoof(self) -> bool:
        return self.mode is Mode.MAC_SPOOFING

    def with_kb(self, kb: KnowledgeBase) -> "AdversaryConfig":
        return replace(self, kb=kb)


def message_term(msg) -> Optional[Term]:
    return msg.as_term() if isinstance(msg, Mpdu) else None


def channel_intercept(cfg: AdversaryConfig, msg) -> AdversaryConfig:
    if not cfg.can_channel:
        raise CapabilityError("a passive adversary cannot intercept")
    t = message_term(msg)
    return cfg.with_kb(cfg.kb.learn(t)) if t is not None else cfg


def check_injectable(kb: KnowledgeBase, msg) -> None:
    """Gate for injection: every cryptographic part must be derivable.

    Header fields are public constants and may be chosen freely.
    """
    if isinstance(msg, Mpdu):
        for part in (msg.cipher_body, msg.cipher_mic):
            if part not in kb:
                raise InjectionRejected(f"underivable term {part}")


def channel_inject(cfg: AdversaryConfig, msg) -> None:
    if not cfg.can_channel:
        raise CapabilityError("a passive adversary cannot inject")
    check_injectable(cfg.kb, msg)


def header_mutations(m: Mpdu, seq_candidates, uplink_psm: bool, downlink_psm: bool) -> list:
    """Single-step header rewrites the attacker may apply to an observed MPDU.

    Returns (label, mutated MPDU) pairs in a fixed order. ``seq_candidates``
    bounds the sequence numbers tried; pwr_mgmt is only flipped on station to
    AP frames and more_data only on AP to station frames.
    """
    h = m.mac
    out: list = []

    def add(label, **changes):
        nh = h.with_(**changes)
        if nh != h:
            out.append((label, replace(m, mac=nh)))

    for seq in sorted(set(seq_candidates)):
        add(f"seq={seq},retry=1", seq_num=seq, retry=1)
        add(f"seq={seq}", seq_num=seq)
    add("retry", retry=1 - h.retry)
    add("frag", frag_num=1 - min(h.frag_num, 1))
    add("mf", more_frag=1 - h.more_frag)
    if uplink_psm:
        add("pm", pwr_mgmt=1 - h.pwr_mgmt)
    if downlink_psm:
        add("md", more_data=1 - h.more_data)
    return out


def _require_spoof(cfg: AdversaryConfig) -> None:
    if not cfg.can_spoof or cfg.spoof_target is None:
        raise CapabilityError("MAC spoofing capability required")


def spoof_tamper_bitmap(cfg: AdversaryConfig, ap: ApPsmState, value: str) -> ApPsmState:
    _require_spoof(cfg)
    return ap.with_status(cfg.spoof_target, value)


def spoof_tamper_buffer(cfg: AdversaryConfig, target, entry):
    """Insert an entry keyed by the spoofed MAC into an AP-side store.

    ``target`` is the AP's PSM state (entry = payload) or its defragmentation
    state (entry = (seq_num, frag_num, payload)).
    """
    _require_spoof(cfg)
    payload = entry if isinstance(target, ApPsmState) else entry[2]
    if payload not in cfg.kb:
        raise InjectionRejected(f"underivable payload {payload}")
    if isinstance(target, ApPsmState):
        return replace(target, buffer=target.buffer + ((cfg.spoof_target, payload),))
    if isinstance(target, DefragState):
        seq, frag, _ = entry
        return target.insert((cfg.spoof_target, seq), frag, payload)
    raise TypeError(f"cannot tamper with {type(target).__name__}")


def spoof_tamper_sa(cfg: AdversaryConfig, sa_table: dict, new_key: Term) -> dict:
    _require_spoof(cfg)
    if new_key not in cfg.kb:
        raise InjectionRejected("the replacement key must be attacker-known")
    table = dict(sa_table)
    old = table.get(cfg.spoof_target)
    epoch = old.epoch + 1 if old is not None else 0
    table[cfg.spoof_target] = SecurityAssoc(cfg.spoof_target, new_key, 0, 0, epoch)
    return table

