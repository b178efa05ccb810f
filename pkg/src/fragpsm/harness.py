"""Experiment driver: exploration configs, attack scenarios, the verdict matrix and trace files."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .adversary import AdversaryConfig, Mode
from .config import DEFAULT_DEPTH, DEFAULT_STATE_CAP, ModelVariant, Workload
from .explorer import ExplorationResult, ReplayError, Trace, apply, explore, replay
from .model import init_state
from .props import (
    FALSIFIED, NOT_REACHED, REACH, VERIFIED, WITNESS, Property, Verdict, catalog, evaluate,
)
from .state import GlobalState

VARIANTS = ("base", "P1", "P2", "P3", "P4", "patched")
MATRIX_ADVERSARIES = ("dolev-yao", "mac-spoofing")
TRACE_MAGIC = "fragpsm-trace v1"


class ScenarioBroken(RuntimeError):
    """A scripted attack was not found on the base model."""


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One exploration setting: which segment, how much traffic, how strong an attacker."""

    workload: Workload
    budget: int
    depth: int

    def adversary(self, mode: str) -> AdversaryConfig:
        return AdversaryConfig(mode=Mode.parse(mode), budget=self.budget)


# The spoofing configurations are smaller: every extra association cycle
# multiplies the reachable states, and the spoofing attacks need at most 10 steps.
RUN_CONFIGS = {
    ("frag", "passive"): RunConfig(Workload("frag", frag_msdus=(2, 2), rekeys=1), 0, DEFAULT_DEPTH),
    ("frag", "dolev-yao"): RunConfig(Workload("frag", frag_msdus=(2, 2), rekeys=1), 1, DEFAULT_DEPTH),
    ("frag", "mac-spoofing"): RunConfig(Workload("frag", frag_msdus=(2,), rekeys=0), 3, 10),
    ("psm", "passive"): RunConfig(Workload("psm", downlink=2, uplink=1), 0, DEFAULT_DEPTH),
    ("psm", "dolev-yao"): RunConfig(Workload("psm", downlink=2, uplink=1), 1, DEFAULT_DEPTH),
    ("psm", "mac-spoofing"): RunConfig(Workload("psm", downlink=1, uplink=1), 3, 10),
}


def variant_of(name: str) -> ModelVariant:
    return ModelVariant.from_name(name)


def run_exploration(segment: str, variant: ModelVariant, mode: str, depth: Optional[int] = None,
                    state_cap: int = DEFAULT_STATE_CAP, workers: int = 1) -> ExplorationResult:
    cfg = RUN_CONFIGS[(segment, mode)]
    adv = cfg.adversary(mode)
    return explore(init_state(cfg.workload, adv), variant, adv, depth or cfg.depth,
                   state_cap=state_cap, workers=workers)


# ---------------------------------------------------------------- verdict matrix


@dataclass(frozen=True)
class MatrixRow:
    property: str
    variant: str
    adversary: str
    verdict: str
    depth: int

    def line(self) -> str:
        return f"{self.property}\t{self.variant}\t{self.adversary}\t{self.verdict}\t{self.depth}"


MATRIX_HEADER = "property\tvariant\tadversary\tverdict\tdepth"


class Runner:
    """Evaluates properties, exploring each (segment, variant, adversary) at most once."""

    def __init__(self, state_cap: int = DEFAULT_STATE_CAP, workers: int = 1):
        self.state_cap = state_cap
        self.workers = workers
        self._cache = {}

    def result(self, segment: str, variant: ModelVariant, mode: str,
               depth: Optional[int] = None) -> ExplorationResult:
        key = (segment, variant, mode, depth)
        if key not in self._cache:
            self._cache[key] = run_exploration(segment, variant, mode, depth, self.state_cap, self.workers)
        return self._cache[key]

    def verdict(self, p: Property, variant: ModelVariant, mode: str,
                depth: Optional[int] = None) -> Verdict:
        return evaluate(p, self.result(p.segment, variant, mode, depth))


def matrix_verdicts(runner: Optional[Runner] = None, properties=None, variants=VARIANTS,
                    adversaries=MATRIX_ADVERSARIES) -> dict:
    """(property, variant, adversary) -> Verdict for the whole grid.

    Each exploration is evaluated against every property of its segment and
    then dropped, so memory stays at one exploration however large the grid.
    """
    runner = runner or Runner()
    properties = catalog() if properties is None else properties
    out = {}
    for vname in variants:
        for mode in adversaries:
            for seg in sorted({p.segment for p in properties}):
                res = run_exploration(seg, variant_of(vname), mode, None, runner.state_cap, runner.workers)
                for p in properties:
                    if p.segment == seg:
                        out[(p.name, vname, mode)] = evaluate(p, res)
                del res
    return out


def matrix_rows(runner: Optional[Runner] = None, properties=None, variants=VARIANTS,
                adversaries=MATRIX_ADVERSARIES, verdicts: Optional[dict] = None) -> list:
    properties = catalog() if properties is None else properties
    if verdicts is None:
        verdicts = matrix_verdicts(runner, properties, variants, adversaries)
    rows = []
    for p in properties:
        for vname in variants:
            for mode in adversaries:
                v = verdicts[(p.name, vname, mode)]
                rows.append(MatrixRow(p.name, vname, mode, v.outcome, v.depth))
    return rows


def format_matrix(rows) -> str:
    return "\n".join([MATRIX_HEADER] + [r.line() for r in rows]) + "\n"


def parse_matrix(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MATRIX_HEADER:
        raise ValueError("matrix report must start with the column header")
    rows = []
    for ln in lines[1:]:
        prop, variant, adv, verdict, depth = ln.split("\t")
        rows.append(MatrixRow(prop, variant, adv, verdict, int(depth)))
    return rows


def golden_matrix_text() -> str:
    return resources.files("fragpsm").joinpath("data/golden_matrix.tsv").read_text()


def expected_outcome(prop: str, variant: str, adversary: str, depth: int,
                     golden: Optional[list] = None) -> Optional[str]:
    """What the reviewed golden matrix implies for this cell at ``depth``, if anything.

    A bad trace found at depth d is still there at every larger depth, and a
    verdict of absence at depth d holds at every smaller one.
    """
    if golden is None:
        golden = parse_matrix(golden_matrix_text())
    for r in golden:
        if (r.property, r.variant, r.adversary) != (prop, variant, adversary):
            continue
        if r.verdict in (FALSIFIED, WITNESS) and depth >= r.depth:
            return r.verdict
        if r.verdict in (VERIFIED, NOT_REACHED) and depth <= r.depth:
            return r.verdict
        return None
    return None


# ---------------------------------------------------------------- trace files


@dataclass(frozen=True)
class TraceFile:
    model: ModelVariant
    adv: AdversaryConfig
    workload: Workload
    labels: tuple

    @property
    def depth(self) -> int:
        return len(self.labels)

    def initial_state(self) -> GlobalState:
        return init_state(self.workload, self.adv)

    def replay(self) -> GlobalState:
        return replay(self.initial_state(), self.labels, self.model, self.adv)


def _workload_fields(w: Workload) -> str:
    if w.segment == "frag":
        return f"segment=frag msdus={','.join(map(str, w.frag_msdus))} rekeys={w.rekeys}"
    return f"segment=psm downlink={w.downlink} uplink={w.uplink}"


def format_trace(trace: Trace, model: ModelVariant, adv: AdversaryConfig, workload: Workload) -> str:
    head = (f"{TRACE_MAGIC} model={model.name} adv={adv.mode.label} depth={len(trace.steps)} "
            f"{_workload_fields(workload)} budget={adv.budget}")
    return "\n".join([head] + [f"step={i} {s.label}" for i, s in enumerate(trace.steps)]) + "\n"


def emit_trace(trace: Trace, path, model: ModelVariant, adv: AdversaryConfig, workload: Workload) -> Path:
    path = Path(path)
    try:
        path.write_text(format_trace(trace, model, adv, workload))
    except OSError as e:
        raise OSError(f"cannot write trace file {path}: {e.strerror}") from e
    return path


def parse_trace(text: str) -> TraceFile:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(TRACE_MAGIC + " "):
        raise TraceFormatError("missing trace header")
    meta = dict(tok.split("=", 1) for tok in lines[0][len(TRACE_MAGIC):].split())
    try:
        if meta["segment"] == "frag":
            w = Workload("frag", frag_msdus=tuple(int(x) for x in meta["msdus"].split(",")),
                         rekeys=int(meta["rekeys"]))
        else:
            w = Workload("psm", downlink=int(meta["downlink"]), uplink=int(meta["uplink"]))
        adv = AdversaryConfig(mode=Mode.parse(meta["adv"]), budget=int(meta["budget"]))
        model = ModelVariant.from_name(meta["model"])
        depth = int(meta["depth"])
    except (KeyError, ValueError) as e:
        raise TraceFormatError(f"bad trace header: {e}") from e
    labels = []
    for i, ln in enumerate(lines[1:]):
        prefix = f"step={i} "
        if not ln.startswith(prefix):
            raise TraceFormatError(f"line {i + 2}: expected {prefix!r}")
        labels.append(ln[len(prefix):])
    if len(labels) != depth:
        raise TraceFormatError(f"header says depth={depth} but the file has {len(labels)} steps")
    return TraceFile(model, adv, w, tuple(labels))


def load_trace(path) -> TraceFile:
    return parse_trace(Path(path).read_text())


# ---------------------------------------------------------------- scenarios

_UNSENT_DELIVERY = "not(Ex s2 c2 f2 q2 n2 #h. SenderSendFragment(s2,c2,f2,q2,n2,m)@h)"


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    workload: Workload
    mode: str
    budget: int
    patched: str
    prop: Property
    depth: int
    # only these rules may fire anywhere in the run
    rules: frozenset = field(default_factory=frozenset)

    @property
    def adv(self) -> AdversaryConfig:
        return AdversaryConfig(mode=Mode.parse(self.mode), budget=self.budget)

    def rule_filter(self, depth: int, name: str) -> bool:
        return name in self.rules


_FRAG_HONEST = {"Associate", "SendFragment", "RecvFragment", "RecvAck"}

SCENARIOS = {s.name: s for s in (
    Scenario(
        "basic_dos", "a fresh frame is mistaken for a retransmission and dropped",
        Workload("frag", frag_msdus=(1, 1)), "dolev-yao", 1, "P3",
        next(p for p in catalog() if p.name == "BasicDoSReached"), 7,
        frozenset(_FRAG_HONEST | {"InjectMutated"}),
    ),
    Scenario(
        "frag_dos", "every fragment is acknowledged but the series is never reassembled",
        Workload("frag", frag_msdus=(1, 2)), "dolev-yao", 1, "P3",
        next(p for p in catalog() if p.name == "FragDoSReached"), 11,
        frozenset(_FRAG_HONEST | {"InjectMutated"}),
    ),
    Scenario(
        "mixed_key", "fragments encrypted under different keys are reassembled into one frame",
        Workload("frag", frag_msdus=(2, 2), rekeys=1), "dolev-yao", 1, "P1",
        Property.define(
            "MixedKeyReached", REACH,
            "Ex r c f q n s k m #i #l #j. ReceiverRecFrag(r,c,f,q,n)@i & Rekey(s,k)@l"
            " & ReceiverDeliverMsdu(r,m)@j & i<l & l<j & " + _UNSENT_DELIVERY,
            title="A frame mixing fragments from before and after a rekey is delivered"),
        13,
        frozenset(_FRAG_HONEST | {"SenderTimeout", "Rekey", "InjectMutated"}),
    ),
    Scenario(
        "cache_poisoning", "a spoofed association plants a fragment the victim's frame is completed with",
        Workload("frag", frag_msdus=(2,)), "mac-spoofing", 3, "P2",
        Property.define(
            "CachePoisonReached", REACH,
            "Ex r m a x #t #j. TamperBuffer(a,x)@t & ReceiverDeliverMsdu(r,m)@j & t<j & " + _UNSENT_DELIVERY,
            title="A frame completed with attacker-planted data is delivered"),
        10,
        frozenset(_FRAG_HONEST | {"Disconnect", "SpoofAssociate", "TamperBuffer"}),
    ),
    Scenario(
        "queue_leak", "buffered frames are released to the attacker after a spoofed association",
        Workload("psm", downlink=1, uplink=0), "mac-spoofing", 3, "P2",
        next(p for p in catalog() if p.name == "QueueLeakReached"), 9,
        frozenset({"Associate", "StaSendDoze", "ApRecvFrame", "StaRecvAck", "ApIncoming", "Disconnect",
                   "SpoofAssociate", "InjectPsPoll", "ApDeliverBuffered"}),
    ),
)}


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    depth: int
    base: Verdict
    patched_variant: str
    patched: Verdict
    trace_files: tuple = ()

    @property
    def ok(self) -> bool:
        return self.base.outcome == WITNESS and self.patched.outcome == NOT_REACHED

    def lines(self) -> list:
        return [
            f"scenario {self.name} depth={self.depth}",
            f"  base\t{self.base.outcome}",
            f"  {self.patched_variant}\t{self.patched.outcome}",
        ] + [f"  trace\t{p}" for p in self.trace_files]


def scenario_run(s: Scenario, variant: ModelVariant, state_cap: int = DEFAULT_STATE_CAP,
                 workers: int = 1) -> ExplorationResult:
    adv = s.adv
    return explore(init_state(s.workload, adv), variant, adv, s.depth, state_cap=state_cap,
                   workers=workers, rule_filter=s.rule_filter)


def admitted_prefix(s: Scenario, labels, variant: ModelVariant) -> Trace:
    """The longest prefix of ``labels`` that ``variant`` still admits."""
    g, steps = init_state(s.workload, s.adv), []
    for lab in labels:
        try:
            inst, g = apply(g, lab, variant, s.adv)
        except ReplayError:
            break
        steps.append(inst)
    return Trace(tuple(steps), g)


def run_scenario(name: str, out_dir=None, state_cap: int = DEFAULT_STATE_CAP,
                 workers: int = 1) -> ScenarioReport:
    """Run the scripted attack on the base model and on its patched variant.

    With ``out_dir`` two trace files are written: the base witness, and for
    the patched model either its witness (the patch failed) or the longest
    prefix of the base witness it still admits, i.e. where the attack stops.
    """
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    s = SCENARIOS[name]
    base_v, patched_v = ModelVariant.base(), variant_of(s.patched)
    base = evaluate(s.prop, scenario_run(s, base_v, state_cap, workers))
    if base.outcome != WITNESS:
        raise ScenarioBroken(f"{name}: attack not found on the base model within depth {s.depth}")
    patched = evaluate(s.prop, scenario_run(s, patched_v, state_cap, workers))
    paths = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        other = patched.trace or admitted_prefix(s, [st.label for st in base.trace.steps], patched_v)
        for tag, model, t in (("base", base_v, base.trace), (s.patched, patched_v, other)):
            path = Path(out_dir) / f"{name}.{tag}.trace"
            paths.append(str(emit_trace(t, path, model, s.adv, s.workload)))
    return ScenarioReport(name, s.depth, base, s.patched, patched, tuple(paths))
