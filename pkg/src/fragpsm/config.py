"""Model variants and workload configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

SEQ_MOD = 16
MAX_FRAGMENTS = 16
BUFFER_CAP = 2
DEFAULT_DEPTH = 14
DEFAULT_STATE_CAP = 500_000

AP = "AP"
STA_V = "STA_V"
STA_A = "STA_A"
ADDRESSES = (AP, STA_V, STA_A)

TOGGLES = ("P1", "P2", "P3", "P4")
TOGGLE_HELP = {
    "P1": "whole-frame MIC before fragmentation",
    "P2": "clear caches and buffers on disconnect",
    "P3": "protect seq_num and retry",
    "P4": "protect pwr_mgmt and more_data",
}


@dataclass(frozen=True)
class ModelVariant:
    toggles: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        bad = set(self.toggles) - set(TOGGLES)
        if bad:
            raise ValueError(f"unknown toggles: {sorted(bad)}")
        object.__setattr__(self, "toggles", frozenset(self.toggles))

    @classmethod
    def base(cls) -> "ModelVariant":
        return cls(frozenset())

    @classmethod
    def patched(cls) -> "ModelVariant":
        return cls(frozenset(TOGGLES))

    @classmethod
    def of(cls, *toggles: str) -> "ModelVariant":
        return cls(frozenset(toggles))

    def has(self, toggle: str) -> bool:
        return toggle in self.toggles

    @property
    def name(self) -> str:
        if not self.toggles:
            return "base"
        if self.toggles == frozenset(TOGGLES):
            return "patched"
        return "+".join(sorted(self.toggles))

    @classmethod
    def from_name(cls, name: str) -> "ModelVariant":
        if name == "base":
            return cls.base()
        if name == "patched":
            return cls.patched()
        return cls(frozenset(name.split("+")))


@dataclass(frozen=True)
class Workload:
    """What the honest entities want to do during one exploration.

    ``frag_msdus`` lists chunk counts of the MSDUs the victim station sends to
    the AP (fragmentation segment). ``downlink`` and ``uplink`` bound the PSM
    segment traffic. A workload drives exactly one functional segment.
    """

    segment: str = "frag"
    frag_msdus: tuple = (1, 2)
    rekeys: int = 0
    downlink: int = 2
    uplink: int = 1

    def __post_init__(self):
        if self.segment not in ("frag", "psm"):
            raise ValueError(f"unknown segment {self.segment!r}")
        for c in self.frag_msdus:
            if not 1 <= c <= MAX_FRAGMENTS:
                raise ValueError(f"MSDU chunk count {c} outside 1..{MAX_FRAGMENTS}")


FRAG_WORKLOAD = Workload(segment="frag", frag_msdus=(1, 2), rekeys=0)
PSM_WORKLOAD = Workload(segment="psm", downlink=2, uplink=1)
