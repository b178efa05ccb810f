"""Bounded breadth-first exploration with canonical-state deduplication.

Nodes are deduplicated on the canonical form of the state together with the
set of events on the path that reached it, so two paths merge only when no
trace property can tell their histories apart except by event order. Every
edge is kept as a trace record; a record's trace is the tree path to its
source node followed by the edge's rule instance.
"""

from __future__ import annotations

import gc
import hashlib
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .adversary import AdversaryConfig
from .config import DEFAULT_STATE_CAP, ModelVariant
from .events import RuleInstance
from .model import successor, successors
from .state import GlobalState, canonicalize


class ResourceExceeded(RuntimeError):
    pass


class ReplayError(ValueError):
    pass


def enabled_rules(g: GlobalState, model: ModelVariant, adv: AdversaryConfig) -> list:
    return [inst for inst, _ in successors(g, model, adv)]


def apply(g: GlobalState, label: str, model: ModelVariant, adv: AdversaryConfig) -> tuple:
    name = label.split(" ", 1)[0].removeprefix("rule=")
    hit = successor(g, model, adv, name, label)
    if hit is None:
        raise ReplayError(f"rule instance not enabled: {label}")
    return hit


def replay(init: GlobalState, labels, model: ModelVariant, adv: AdversaryConfig) -> GlobalState:
    g = init
    for lab in labels:
        _, g = apply(g, lab.label if isinstance(lab, RuleInstance) else lab, model, adv)
    return g


def state_key(g: GlobalState, history: frozenset) -> bytes:
    return hashlib.blake2b(canonicalize(g, tuple(history)), digest_size=16).digest()


@dataclass(frozen=True, slots=True)
class TraceRecord:
    parent: int             # record id of the source node's tree record; -1 at the root
    rule: Optional[RuleInstance]
    node: int
    depth: int
    knows: frozenset        # attacker observations at the end of this trace
    learned: bool           # the last step added to the attacker's observations


@dataclass(frozen=True)
class Trace:
    steps: tuple
    terminal: GlobalState

    @property
    def events(self) -> list:
        return [list(s.actions) for s in self.steps]


@dataclass
class ExplorationResult:
    init: GlobalState
    model: ModelVariant
    adv: AdversaryConfig
    depth_bound: int
    records: list = field(default_factory=list)
    state_count: int = 0
    frontier_count: int = 0
    digest: str = ""
    # node id -> state key, for replay checks
    node_keys: list = field(default_factory=list)

    def rules(self, rid: int) -> list:
        out = []
        while rid > 0:
            r = self.records[rid]
            out.append(r.rule)
            rid = r.parent
        return out[::-1]

    def steps(self, rid: int) -> list:
        """Action tuples along the trace of record ``rid``."""
        return [r.actions for r in self.rules(rid)]

    def trace(self, rid: int) -> Trace:
        rules = self.rules(rid)
        return Trace(tuple(rules), replay(self.init, rules, self.model, self.adv))

    def serialize(self) -> str:
        return (f"model={self.model.name} adv={self.adv.mode.label} depth={self.depth_bound} "
                f"states={self.state_count} edges={len(self.records) - 1} "
                f"frontier={self.frontier_count} digest={self.digest}")


def _expand(job):
    g, history, model, adv = job
    out = []
    for inst, nxt in successors(g, model, adv):
        h = history | frozenset(str(e) for e in inst.actions)
        out.append((inst, nxt, h, state_key(nxt, h)))
    return out


# Frontier of the level being expanded by forked workers. Workers inherit it
# at fork time, so only index ranges go out and (instance, key, changed
# knowledge) comes back; the parent rebuilds the successors that turn out new,
# which is cheaper than pickling states.
_LEVEL: tuple = ()


def _expand_slice(bounds):
    lo, hi = bounds
    frontier, model, adv = _LEVEL
    out = []
    for _, g, h in frontier[lo:hi]:
        knows = g.get("Knows")
        row = []
        for inst, nxt, _, key in _expand((g, h, model, adv)):
            k2 = nxt.get("Knows")
            row.append((inst, key, None if k2 == knows else k2))
        out.append(row)
    return out


def _expand_level(frontier, model, adv, workers):
    """Successors of every frontier node as (inst, state, history, key, knows).

    The state is None when a worker expanded the node.
    """
    global _LEVEL
    if workers <= 1 or len(frontier) <= 64:
        return [[(inst, s, h, key, s.get("Knows")) for inst, s, h, key in _expand((g, hist, model, adv))]
                for _, g, hist in frontier]
    step = max(1, len(frontier) // (workers * 4))
    slices = [(i, min(i + step, len(frontier))) for i in range(0, len(frontier), step)]
    _LEVEL = (frontier, model, adv)
    # keep the children's collector off the inherited heap so its pages stay shared
    gc.freeze()
    try:
        with ProcessPoolExecutor(workers, mp_context=multiprocessing.get_context("fork")) as pool:
            parts = list(pool.map(_expand_slice, slices))
    finally:
        _LEVEL = ()
        gc.unfreeze()
    out = []
    for part, (lo, _) in zip(parts, slices):
        for (_, g, hist), row in zip(frontier[lo:], part):
            knows = g.get("Knows")
            out.append([(inst, None, hist | frozenset(str(e) for e in inst.actions), key,
                         knows if k2 is None else k2) for inst, key, k2 in row])
    return out


def explore(init: GlobalState, model: ModelVariant, adv: AdversaryConfig, depth_bound: int,
            state_cap: int = DEFAULT_STATE_CAP, workers: int = 1, rule_filter=None) -> ExplorationResult:
    """Exhaustive forward search up to ``depth_bound`` rule applications.

    ``rule_filter(depth, rule_name) -> bool`` optionally restricts which rules
    may fire at a given step (scenario hints); it never adds transitions.
    With ``workers > 1`` each large level is expanded in forked processes;
    records and digests are identical to a single-worker run.
    """
    if depth_bound < 1:
        raise ValueError("depth_bound must be at least 1")
    res = ExplorationResult(init, model, adv, depth_bound)
    root_key = state_key(init, frozenset())
    visited = {root_key: 0}
    res.records.append(TraceRecord(-1, None, 0, 0, init.get("Knows"), False))
    frontier = [(0, init, frozenset())]
    for depth in range(depth_bound):
        expanded = _expand_level(frontier, model, adv, workers)
        nxt = []
        for (rid, g, _), succs in zip(frontier, expanded):
            parent_knows = g.get("Knows")
            for inst, s, h, key, knows in succs:
                if rule_filter is not None and not rule_filter(depth, inst.name):
                    continue
                node = visited.get(key)
                new = node is None
                if new:
                    node = len(visited)
                    visited[key] = node
                    if len(visited) > state_cap:
                        raise ResourceExceeded(
                            f"visited-state count passed the cap of {state_cap} at depth {depth + 1}")
                    if s is None:
                        s = successor(g, model, adv, inst.name, inst.label)[1]
                # observations only grow, so a size change means something was learned
                res.records.append(
                    TraceRecord(rid, inst, node, depth + 1, knows, len(knows) != len(parent_knows)))
                if new:
                    nxt.append((len(res.records) - 1, s, h))
        frontier = nxt
        if not frontier:
            break
    res.state_count = len(visited)
    res.node_keys = sorted(visited, key=visited.get)
    res.frontier_count = len(frontier)
    res.digest = hashlib.sha256(b"".join(sorted(visited))).hexdigest()[:16]
    return res
