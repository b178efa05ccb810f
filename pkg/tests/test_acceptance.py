"""The eight acceptance criteria, each at its stated time limit.

Every test prints one ``criterion N [PASS|FAIL]`` line and the session
summary repeats them.
"""

import time

import pytest

import oracles
from fragpsm.cli import main
from fragpsm.config import ModelVariant
from fragpsm.harness import (
    RUN_CONFIGS, SCENARIOS, VARIANTS, Runner, emit_trace, format_matrix, golden_matrix_text, load_trace,
    matrix_rows, parse_matrix, run_exploration, run_scenario, variant_of,
)
from fragpsm.props import FALSIFIED, NOT_REACHED, VERIFIED, WITNESS, catalog, evaluate, lookup
from fragpsm.state import canonicalize
from fragpsm.terms import KnowledgeBase, Tuple, deduce_closure

from test_explorer import explorer_sequences
from test_invariants import honest_traces, problems
from test_terms import random_kbs

BASE_FALSIFIED = {
    "IntegritySequenceNumberFrag": "P3",
    "IntegrityPowerManagementPSM": "P4",
    "MoreDataTruthfulnessPSM": "P4",
}


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def replays_exactly(verdict, variant, mode, segment, tmp_path):
    cfg = RUN_CONFIGS[(segment, mode)]
    path = emit_trace(verdict.trace, tmp_path / f"{verdict.property}.{variant.name}.{mode}.trace",
                      variant, cfg.adversary(mode), cfg.workload)
    return canonicalize(load_trace(path).replay()) == canonicalize(verdict.trace.terminal)


def test_criterion_1_catalog(acceptance, capsys):
    (rc, lines), dt = timed(lambda: (main(["list-properties"]), capsys.readouterr().out.splitlines()))
    core = [p for p in catalog() if not p.extension]
    evaluable = True
    for vname in VARIANTS:
        for seg in ("frag", "psm"):
            res = run_exploration(seg, variant_of(vname), "dolev-yao", depth=3)
            for p in core:
                if p.segment == seg:
                    evaluable &= evaluate(p, res).outcome in (VERIFIED, FALSIFIED)
    ok = rc == 0 and len(lines) == 20 and len(core) == 17 and evaluable and dt < 1.0
    acceptance(1, "catalog completeness", ok, f"{len(lines)} listed, {len(core)} core")
    assert ok


@pytest.mark.parametrize("name", sorted(BASE_FALSIFIED))
def test_criterion_2_base_falsifications(name, acceptance, tmp_path):
    p = lookup(name)
    v, dt = timed(lambda: Runner().verdict(p, ModelVariant.base(), "dolev-yao", 14))
    ok = v.outcome == FALSIFIED and v.depth <= 14 and dt < 60
    ok = ok and replays_exactly(v, ModelVariant.base(), "dolev-yao", p.segment, tmp_path)
    acceptance(2, "base-model falsifications", ok,
               f"{name} {v.outcome} in {len(v.trace.steps) if v.trace else '-'} steps, {dt:.1f}s")
    assert ok


@pytest.mark.parametrize("name", sorted(BASE_FALSIFIED))
def test_criterion_3_patched_verifications(name, acceptance):
    p = lookup(name)
    variant = ModelVariant.of(BASE_FALSIFIED[name])
    v, dt = timed(lambda: Runner().verdict(p, variant, "dolev-yao", 14))
    ok = v.outcome == VERIFIED and v.depth == 14 and dt < 120
    acceptance(3, "patched-model verifications", ok,
               f"{name} on {variant.name}: {v.outcome}, {dt:.1f}s")
    assert ok


@pytest.mark.parametrize("name", ["mixed_key", "cache_poisoning", "queue_leak"])
def test_criterion_4_known_attacks(name, acceptance, tmp_path):
    r, dt = timed(lambda: run_scenario(name, tmp_path))
    s = SCENARIOS[name]
    ok = (r.base.outcome == WITNESS and r.patched.outcome == NOT_REACHED and r.base.depth == r.patched.depth
          and r.patched_variant == ("P1" if name == "mixed_key" else "P2") and dt < 120)
    ok = ok and (name == "mixed_key" or s.mode == "mac-spoofing")
    acceptance(4, "known-attack reproduction", ok,
               f"{name}: {r.base.outcome}/{r.patched.outcome} at depth {r.depth}, {dt:.1f}s")
    assert ok


def _inject_header(e):
    """(seq_num, retry) of an injected data frame."""
    items = e.args[0].items
    return items[2], items[5].name


def basic_dos_shape(steps) -> bool:
    """Delivery, then a retry=1 injection reusing a delivered seq_num, then a fresh frame dropped."""
    stage, delivered_seqs, fresh, injected = 0, set(), set(), None
    for acts in steps:
        for e in acts:
            if e.name == "ReceiverDeliverMsdu":
                delivered_seqs |= {x.args[3] for x in acts if x.name == "ReceiverRecFrag"}
                stage = max(stage, 1)
            elif e.name == "SenderSendFragment" and stage >= 1:
                fresh.add(e.args[1])
            elif stage == 1 and e.name == "Inject" and isinstance(e.args[0], Tuple) and len(e.args[0].items) == 12:
                seq, retry = _inject_header(e)
                chunk = e.args[0].items[10].body.items[0]
                if retry == "1" and seq in delivered_seqs and chunk in fresh:
                    stage, injected = 2, chunk
            elif stage == 2 and e.name == "DuplicateDropped" and e.args[1] == injected:
                return True
    return False


def frag_dos_shape(steps) -> bool:
    """Every fragment of an MSDU ACKed, its series discarded, the MSDU never delivered."""
    evs = [e for acts in steps for e in acts]
    delivered = {e.args[1] for e in evs if e.name == "ReceiverDeliverMsdu"}
    for a in evs:
        if a.name != "SenderMsduAcked" or a.args[1] in delivered:
            continue
        msdu, seq = a.args[1], a.args[2]
        frags = [e for e in evs if e.name == "SenderSendFragment" and e.args[5] == msdu]
        discarded = any(e.name == "SeriesDiscarded" and e.args[2] == seq for e in evs)
        if len(frags) == len(msdu.items) and discarded:
            return True
    return False


@pytest.mark.parametrize("name,shape", [("basic_dos", basic_dos_shape), ("frag_dos", frag_dos_shape)])
def test_criterion_5_new_attacks(name, shape, acceptance, tmp_path):
    r, dt = timed(lambda: run_scenario(name, tmp_path))
    steps = [s.actions for s in r.base.trace.steps]
    ok = r.base.outcome == WITNESS and shape(steps) and dt < 60
    acceptance(5, "new-attack reproduction", ok,
               f"{name}: {len(steps)}-step witness, shape {'ok' if shape(steps) else 'wrong'}, {dt:.1f}s")
    assert ok


def test_criterion_6_oracle_equivalence(acceptance):
    def check():
        seqs = all(explorer_sequences(w, d) == oracles.enumerate_honest_frag(w, d)
                   for w in [(1,), (2,), (1, 1), (1, 2), (3,)] for d in range(1, 5))
        kbs = random_kbs()
        closure = all(deduce_closure(KnowledgeBase(frozenset(kb))).known == oracles.brute_force_closure(kb)
                      for kb in kbs)
        return seqs, closure, len(kbs)

    (seqs, closure, n), dt = timed(check)
    ok = seqs and closure and n == 200 and dt < 60
    acceptance(6, "oracle equivalence", ok, f"enumerator {'equal' if seqs else 'differs'}, "
               f"closure {'equal' if closure else 'differs'} on {n} bases, {dt:.1f}s")
    assert ok


def test_criterion_7_determinism_and_replay(matrix_run, acceptance, tmp_path):
    first, dt1, verdicts = matrix_run
    second, dt2 = timed(lambda: format_matrix(matrix_rows(Runner(workers=2))))
    same = first == second
    golden = first == golden_matrix_text()
    replay_ok, n = True, 0
    for row in parse_matrix(first):
        if row.verdict in (FALSIFIED, WITNESS):
            p, variant = lookup(row.property), variant_of(row.variant)
            v = verdicts[(row.property, row.variant, row.adversary)]
            replay_ok &= replays_exactly(v, variant, row.adversary, p.segment, tmp_path)
            n += 1
    ok = same and golden and replay_ok and dt1 < 300 and dt2 < 300
    acceptance(7, "determinism and replay", ok,
               f"identical={same}, golden={golden}, {n} traces replayed, {dt1:.0f}s / {dt2:.0f}s (2 workers)")
    assert ok


def test_criterion_8_honest_invariants(acceptance):
    (bad, n), dt = timed(lambda: (lambda ts: ([p for t in ts for p in problems(t)], len(ts)))(honest_traces(500)))
    ok = not bad and n == 500 and dt < 60
    acceptance(8, "honest-run functional invariants", ok, f"{n} traces, {len(bad)} violations, {dt:.1f}s")
    assert ok



def test_shape_checks_tell_the_two_attacks_apart():
    basic = [s.actions for s in run_scenario("basic_dos").base.trace.steps]
    frag = [s.actions for s in run_scenario("frag_dos").base.trace.steps]
    assert basic_dos_shape(basic) and not frag_dos_shape(basic)
    assert frag_dos_shape(frag) and not basic_dos_shape(frag)
