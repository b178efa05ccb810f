"""Trace events (action facts) and rule instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .terms import TERM_TYPES, Term, const, render_term

FRAG_EVENTS = (
    "SenderSendFragment", "ReceiverRecFrag", "ReceiverDeliverMsdu", "AckSent", "SeriesDiscarded",
    "DuplicateDropped", "ExpiredDropped", "SenderRecvAck", "SenderMsduAcked", "FragTimeout",
    "DefragTimeout",
)
PSM_EVENTS = (
    "STASendDozeMsg", "APKnowDoze", "APBufferUnit", "APDeliverBuffered", "STAWake", "PsPollSent",
    "Disconnect", "Associate", "STASendFrame", "APRecvFrame", "STARecvAck", "STAEnterSleep",
    "APRecvDownlink", "APSendDirect", "STARecvBuffered", "STAReturnSleep", "STARecvData", "Rekey",
)
ADVERSARY_EVENTS = ("Intercept", "Inject", "SpoofAssociate", "TamperBitmap", "TamperBuffer", "TamperSA")

DECLARED_EVENTS = frozenset(FRAG_EVENTS + PSM_EVENTS + ADVERSARY_EVENTS)


def as_term(x) -> Term:
    if isinstance(x, TERM_TYPES):
        return x
    if isinstance(x, (str, int)):
        return const(x)
    if hasattr(x, "as_term"):
        return x.as_term()
    raise TypeError(f"cannot use {x!r} as an event argument")


@dataclass(frozen=True, slots=True)
class Event:
    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}(" + ",".join(render_term(a) for a in self.args) + ")"


def ev(name: str, *args) -> Event:
    if name not in DECLARED_EVENTS:
        raise ValueError(f"undeclared event {name}")
    return Event(name, tuple(as_term(a) for a in args))


@dataclass(frozen=True, slots=True)
class RuleInstance:
    name: str
    actor: str
    actions: tuple
    _label: Optional[str] = field(default=None, init=False, repr=False, compare=False)

    @property
    def label(self) -> str:
        if self._label is None:
            text = f"rule={self.name} actor={self.actor} actions=[" + ";".join(map(str, self.actions)) + "]"
            object.__setattr__(self, "_label", text)
        return self._label

    @property
    def sort_key(self) -> tuple:
        return (self.name, self.label)

    def __str__(self) -> str:
        return self.label
