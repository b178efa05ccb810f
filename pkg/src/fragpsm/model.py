"""Rewriting rules composing the functional and security segments.

Every rule is a generator over a :class:`GlobalState` that yields
``(RuleInstance, successor)`` pairs. The segment modules supply the pure
transitions; this module wires them to facts, the channel and the attacker.
"""

from __future__ import annotations

from dataclasses import replace

from .adversary import AdversaryConfig, header_mutations
from .config import AP, SEQ_MOD, STA_V, ModelVariant, Workload
from .events import RuleInstance, ev
from .fragseg import (
    DefragState, FragSenderState, NotEnabled, clear_cache_on_disconnect, defrag_receive,
    defrag_timeout, frag_ack, frag_start, frag_step, frag_timeout,
)
from .frames import AckMsg, Mpdu, Msdu, PsPoll
from .psmseg import (
    STA_ACTIVE, STA_ASLEEP, ApPsmState, StaPsmState, ap_buffer_frame, ap_deliver_buffered,
    ap_recv_doze, ap_send_direct, clear_buffer_on_disconnect, sta_recv_ack, sta_recv_buffered,
    sta_recv_direct, sta_request_doze, sta_send_data, sta_wake_poll,
)
from .secseg import Rejected, SecurityAssoc, rekey
from .state import Fact, GlobalState
from .terms import FreshName, PublicConst, Tuple, const

ATTACKER = "Attacker"
EVIL = const("evil")


def init_state(workload: Workload, adv: AdversaryConfig | None = None) -> GlobalState:
    """Unassociated victim, empty channel, workload queued."""
    adv = adv or AdversaryConfig()
    budget = adv.budget if adv.can_channel else 0
    facts = [
        Fact("Fresh", (0,)),
        Fact("Budget", (budget, workload.rekeys)),
        Fact("Knows", (frozenset(adv.kb.known),)),
    ]
    if workload.segment == "frag":
        facts += [
            Fact("FragSender", (FragSenderState(),)),
            Fact("SenderQueue", (tuple(workload.frag_msdus),)),
            Fact("Defrag", (DefragState(),)),
        ]
    else:
        facts += [
            Fact("StaPsm", (StaPsmState(STA_V),)),
            Fact("ApPsm", (ApPsmState(),)),
            Fact("PsmTraffic", (workload.downlink, workload.uplink)),
        ]
    return GlobalState(tuple(facts))


# ---------------------------------------------------------------- plumbing


def _one(g: GlobalState, name: str):
    for f in g.facts:
        if f.name == name:
            return f
    return None


def _keyed(g: GlobalState, name: str, key):
    for f in g.facts:
        if f.name == name and f.args[0] == key:
            return f
    return None


class _Tx:
    """Accumulates one rule application's fact changes."""

    def __init__(self, g: GlobalState):
        self.g = g
        self.remove: list = []
        self.add: list = []
        self.counter = g.get("Fresh")
        self.learned: list = []
        self.spent = 0
        self.rekeyed = 0

    def fresh(self) -> FreshName:
        n = FreshName(self.counter)
        self.counter += 1
        return n

    def drop(self, fact: Fact) -> None:
        self.remove.append(fact)

    def put(self, name: str, *args) -> None:
        self.add.append(Fact(name, args))

    def swap(self, fact: Fact, *args) -> None:
        self.drop(fact)
        self.put(fact.name, *args)

    def emit(self, msg) -> None:
        self.put("Chan", msg)
        if isinstance(msg, Mpdu):
            self.learned.append(msg.as_term())

    def commit(self) -> GlobalState:
        g = self.g
        if self.counter != g.get("Fresh"):
            self.swap(_one(g, "Fresh"), self.counter)
        if self.spent or self.rekeyed:
            b = _one(g, "Budget")
            self.swap(b, b.args[0] - self.spent, b.args[1] - self.rekeyed)
        if self.learned:
            k = _one(g, "Knows")
            self.swap(k, k.args[0] | frozenset(self.learned))
        return g.update(self.remove, self.add)


def _attacker_budget(g: GlobalState) -> int:
    return g.get("Budget")[0]


def _victim_holds(g: GlobalState) -> bool:
    return (_keyed(g, "StaSA", STA_V) is not None and _keyed(g, "ApSA", STA_V) is not None
            and _keyed(g, "AttackerHolds", STA_V) is None)


def _chan(g: GlobalState, kind):
    return [f for f in g.facts if f.name == "Chan" and isinstance(f.args[0], kind)]


def _knowledge(g: GlobalState) -> frozenset:
    return g.get("Knows")


def seq_candidates(g: GlobalState) -> tuple:
    """Sequence numbers worth forging: those seen from the victim, their successors, and 0."""
    seen = set()
    for t in _knowledge(g):
        if isinstance(t, Tuple) and len(t.items) == 12 and t.items[0] == PublicConst(STA_V):
            seen.add(int(t.items[2].name))
    return tuple(sorted({0} | seen | {(s + 1) % SEQ_MOD for s in seen}))


# ---------------------------------------------------------------- connection


def _teardown(tx: _Tx, g: GlobalState, variant: ModelVariant) -> None:
    """The AP forgets the association currently held under the victim's MAC."""
    for name in ("ApSA", "AttackerHolds"):
        f = _keyed(g, name, STA_V)
        if f:
            tx.drop(f)
    if variant.has("P2"):
        d = _one(g, "Defrag")
        if d:
            tx.swap(d, clear_cache_on_disconnect(d.args[0], STA_V))
        a = _one(g, "ApPsm")
        if a:
            tx.swap(a, clear_buffer_on_disconnect(a.args[0], STA_V))


def r_associate(g, variant, adv):
    """The victim (re)associates; an association held under its MAC is replaced."""
    if _keyed(g, "StaSA", STA_V):
        return
    tx = _Tx(g)
    if _keyed(g, "ApSA", STA_V):
        _teardown(tx, g, variant)
    k = tx.fresh()
    tx.put("StaSA", STA_V, SecurityAssoc(AP, k))
    tx.put("ApSA", STA_V, SecurityAssoc(STA_V, k))
    evicted = _keyed(g, "Evicted", STA_V)
    if evicted:
        tx.drop(evicted)
    psm = _one(g, "StaPsm")
    if psm:
        tx.swap(psm, StaPsmState(STA_V))
    yield RuleInstance("Associate", STA_V, (ev("Associate", STA_V, AP, k),)), tx.commit()


def r_rekey(g, variant, adv):
    if g.get("Budget")[1] <= 0 or not _victim_holds(g):
        return
    tx = _Tx(g)
    k = tx.fresh()
    sta, ap = _keyed(g, "StaSA", STA_V), _keyed(g, "ApSA", STA_V)
    tx.swap(sta, STA_V, rekey(sta.args[1], k))
    tx.swap(ap, STA_V, rekey(ap.args[1], k))
    tx.rekeyed = 1
    yield RuleInstance("Rekey", STA_V, (ev("Rekey", STA_V, k),)), tx.commit()


def r_disconnect(g, variant, adv):
    """Attacker-triggered deauthentication of the victim's MAC (unauthenticated)."""
    if not adv.can_channel or _attacker_budget(g) <= 0:
        return
    if not _victim_holds(g):
        return
    tx = _Tx(g)
    tx.spent = 1
    _teardown(tx, g, variant)
    tx.drop(_keyed(g, "StaSA", STA_V))
    if not _keyed(g, "Evicted", STA_V):
        tx.put("Evicted", STA_V)
    sender = _one(g, "FragSender")
    if sender and sender.args[0].current_msdu is not None:
        s = sender.args[0]
        tx.swap(sender, replace(s, current_msdu=None, next_frag=0, awaiting_ack=0, nonce=None))
    yield RuleInstance("Disconnect", ATTACKER, (ev("Disconnect", STA_V),)), tx.commit()


# ---------------------------------------------------------------- attacker


def r_spoof_associate(g, variant, adv):
    if not adv.can_spoof or _attacker_budget(g) <= 0:
        return
    target = adv.spoof_target
    if _keyed(g, "ApSA", target) or not _keyed(g, "Evicted", target):
        return
    tx = _Tx(g)
    tx.spent = 1
    ka = tx.fresh()
    tx.put("ApSA", target, SecurityAssoc(target, ka))
    tx.put("AttackerHolds", target)
    tx.learned.append(ka)
    actions = (ev("SpoofAssociate", target), ev("TamperSA", target, ka))
    yield RuleInstance("SpoofAssociate", ATTACKER, actions), tx.commit()


def r_tamper_bitmap(g, variant, adv):
    if not adv.can_spoof or _attacker_budget(g) <= 0:
        return
    target = adv.spoof_target
    a = _one(g, "ApPsm")
    if a is None or not _keyed(g, "AttackerHolds", target):
        return
    ap = a.args[0]
    value = STA_ACTIVE if ap.status(target) == STA_ASLEEP else STA_ASLEEP
    tx = _Tx(g)
    tx.spent = 1
    tx.swap(a, ap.with_status(target, value))
    yield RuleInstance("TamperBitmap", ATTACKER, (ev("TamperBitmap", target, value),)), tx.commit()


def r_tamper_buffer(g, variant, adv):
    if not adv.can_spoof or _attacker_budget(g) <= 0:
        return
    target = adv.spoof_target
    if not _keyed(g, "AttackerHolds", target):
        return
    a = _one(g, "ApPsm")
    if a is not None:
        try:
            ap2 = ap_buffer_frame(a.args[0].with_status(target, STA_ASLEEP), target, EVIL)
        except NotEnabled:
            return
        ap2 = replace(ap2, bitmap=a.args[0].bitmap)
        tx = _Tx(g)
        tx.spent = 1
        tx.swap(a, ap2)
        yield RuleInstance("TamperBuffer", ATTACKER, (ev("TamperBuffer", target, EVIL),)), tx.commit()
    d = _one(g, "Defrag")
    if d is not None:
        payload = Tuple((EVIL, EVIL))
        for seq in seq_candidates(g):
            for frag in (0, 1):
                d2 = d.args[0].insert((target, seq), frag, payload)
                if d2 == d.args[0]:
                    continue
                tx = _Tx(g)
                tx.spent = 1
                tx.swap(d, d2)
                act = ev("TamperBuffer", target, Tuple((const(seq), const(frag), payload)))
                yield RuleInstance("TamperBuffer", ATTACKER, (act,)), tx.commit()


def r_intercept(g, variant, adv):
    if not adv.can_channel or _attacker_budget(g) <= 0:
        return
    for f in _chan(g, (Mpdu, AckMsg, PsPoll)):
        tx = _Tx(g)
        tx.spent = 1
        tx.drop(f)
        yield RuleInstance("Intercept", ATTACKER, (ev("Intercept", f.args[0]),)), tx.commit()


def r_inject_mutated(g, variant, adv):
    """Intercept an MPDU and forward it with one header field rewritten."""
    if not adv.can_channel or _attacker_budget(g) <= 0:
        return
    frag_segment = _one(g, "Defrag") is not None
    seqs = seq_candidates(g) if frag_segment else ()
    for f in _chan(g, Mpdu):
        m = f.args[0]
        uplink = not frag_segment and m.mac.dst_mac == AP
        downlink = not frag_segment and m.mac.dst_mac != AP
        for label, m2 in header_mutations(m, seqs, uplink, downlink):
            if not frag_segment and label not in ("pm", "md"):
                continue
            tx = _Tx(g)
            tx.spent = 1
            tx.drop(f)
            tx.emit(m2)
            yield RuleInstance("InjectMutated", ATTACKER, (ev("Inject", m2),)), tx.commit()


def r_inject_control(g, variant, adv):
    """Forge an ACK, or a PS-poll carrying the victim's address."""
    if not adv.can_channel or _attacker_budget(g) <= 0:
        return
    msgs = [AckMsg(STA_V)]
    if _one(g, "ApPsm") is not None:
        msgs.append(PsPoll(STA_V))
    for msg in msgs:
        tx = _Tx(g)
        tx.spent = 1
        tx.emit(msg)
        name = "InjectAck" if isinstance(msg, AckMsg) else "InjectPsPoll"
        yield RuleInstance(name, ATTACKER, (ev("Inject", msg),)), tx.commit()


# ---------------------------------------------------------------- fragmentation


def r_send_fragment(g, variant, adv):
    sender, sta = _one(g, "FragSender"), _keyed(g, "StaSA", STA_V)
    if sender is None or sta is None:
        return
    s = sender.args[0]
    tx = _Tx(g)
    if s.current_msdu is None:
        queue = _one(g, "SenderQueue")
        if not queue.args[0]:
            return
        count, rest = queue.args[0][0], queue.args[0][1:]
        chunks = tuple(tx.fresh() for _ in range(count))
        s = frag_start(s, Msdu(chunks, STA_V), tx.fresh())
        tx.swap(queue, rest)
    try:
        s2, sa2, m = frag_step(s, sta.args[1], variant)
    except NotEnabled:
        return
    tx.swap(sender, s2)
    tx.swap(sta, STA_V, sa2)
    tx.emit(m)
    chunk = s.current_msdu.chunks[m.mac.frag_num]
    act = ev("SenderSendFragment", STA_V, chunk, m.mac.frag_num, m.mac.seq_num, s.nonce, s.current_msdu)
    yield RuleInstance("SendFragment", STA_V, (act,)), tx.commit()


def r_sender_recv_ack(g, variant, adv):
    sender = _one(g, "FragSender")
    if sender is None or not sender.args[0].awaiting_ack:
        return
    for f in _chan(g, AckMsg):
        if f.args[0].dst != STA_V:
            continue
        s2, done = frag_ack(sender.args[0], f.args[0])
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(sender, s2)
        actions = [ev("SenderRecvAck", STA_V)]
        if done is not None:
            actions.append(ev("SenderMsduAcked", STA_V, done, sender.args[0].seq_num))
        yield RuleInstance("RecvAck", STA_V, tuple(actions)), tx.commit()


def r_frag_timeout(g, variant, adv):
    sender = _one(g, "FragSender")
    if sender is None:
        return
    try:
        s2 = frag_timeout(sender.args[0])
    except NotEnabled:
        return
    tx = _Tx(g)
    tx.swap(sender, s2)
    yield RuleInstance("SenderTimeout", STA_V, (ev("FragTimeout", STA_V, sender.args[0].seq_num),)), tx.commit()


def r_recv_fragment(g, variant, adv):
    d = _one(g, "Defrag")
    if d is None:
        return
    for f in _chan(g, Mpdu):
        m = f.args[0]
        if m.mac.dst_mac != AP:
            continue
        sa = _keyed(g, "ApSA", m.mac.src_mac)
        if sa is None:
            continue
        try:
            d2, sa2, out = defrag_receive(d.args[0], sa.args[1], m, variant)
        except Rejected:
            continue
        src, seq = out.key
        if out.kind in ("stored", "delivered", "discarded"):
            actions = [ev("ReceiverRecFrag", AP, out.chunk, out.frag_num, seq, out.nonce)]
            if out.kind == "delivered":
                actions.append(ev("ReceiverDeliverMsdu", AP, out.msdu))
            elif out.kind == "discarded":
                actions.append(ev("SeriesDiscarded", AP, src, seq))
        elif out.kind == "duplicate":
            actions = [ev("DuplicateDropped", AP, out.chunk, seq)]
        else:
            actions = [ev("ExpiredDropped", AP, src, seq)]
        actions.append(ev("AckSent", AP, src))
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(d, d2)
        tx.swap(sa, m.mac.src_mac, sa2)
        tx.emit(out.ack)
        yield RuleInstance("RecvFragment", AP, tuple(actions)), tx.commit()


def r_defrag_timeout(g, variant, adv):
    d = _one(g, "Defrag")
    if d is None:
        return
    for key in sorted(d.args[0].timer_armed):
        tx = _Tx(g)
        tx.swap(d, defrag_timeout(d.args[0], key))
        yield RuleInstance("DefragTimeout", AP, (ev("DefragTimeout", AP, key[0], key[1]),)), tx.commit()


# ---------------------------------------------------------------- power save


def r_sta_send_doze(g, variant, adv):
    psm, sta = _one(g, "StaPsm"), _keyed(g, "StaSA", STA_V)
    if psm is None or sta is None:
        return
    tx = _Tx(g)
    p = tx.fresh()
    try:
        s2, sa2, m = sta_request_doze(psm.args[0], sta.args[1], p, variant)
    except NotEnabled:
        return
    tx.swap(psm, s2)
    tx.swap(sta, STA_V, sa2)
    tx.emit(m)
    actions = (ev("STASendDozeMsg", "1", STA_V), ev("STASendFrame", STA_V, p, "1"))
    yield RuleInstance("StaSendDoze", STA_V, actions), tx.commit()


def r_sta_send_data(g, variant, adv):
    psm, sta, traffic = _one(g, "StaPsm"), _keyed(g, "StaSA", STA_V), _one(g, "PsmTraffic")
    if psm is None or sta is None or traffic.args[1] <= 0:
        return
    tx = _Tx(g)
    p = tx.fresh()
    try:
        sa2, m = sta_send_data(psm.args[0], sta.args[1], p, variant)
    except NotEnabled:
        return
    tx.swap(sta, STA_V, sa2)
    tx.swap(traffic, traffic.args[0], traffic.args[1] - 1)
    tx.emit(m)
    yield RuleInstance("StaSendData", STA_V, (ev("STASendFrame", STA_V, p, "0"),)), tx.commit()


def r_ap_recv_frame(g, variant, adv):
    a = _one(g, "ApPsm")
    if a is None:
        return
    for f in _chan(g, Mpdu):
        m = f.args[0]
        if m.mac.dst_mac != AP:
            continue
        sa = _keyed(g, "ApSA", m.mac.src_mac)
        if sa is None:
            continue
        try:
            a2, sa2, p, ack = ap_recv_doze(a.args[0], sa.args[1], m, variant)
        except Rejected:
            continue
        src = m.mac.src_mac
        actions = [ev("APRecvFrame", AP, src, p, str(m.mac.pwr_mgmt))]
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(a, a2)
        tx.swap(sa, src, sa2)
        if ack is not None:
            actions += [ev("APKnowDoze", AP, src), ev("AckSent", AP, src)]
            tx.emit(ack)
        yield RuleInstance("ApRecvFrame", AP, tuple(actions)), tx.commit()


def r_sta_recv_ack(g, variant, adv):
    psm = _one(g, "StaPsm")
    if psm is None:
        return
    for f in _chan(g, AckMsg):
        try:
            s2 = sta_recv_ack(psm.args[0], f.args[0])
        except NotEnabled:
            continue
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(psm, s2)
        actions = (ev("STARecvAck", STA_V), ev("STAEnterSleep", STA_V))
        yield RuleInstance("StaRecvAck", STA_V, actions), tx.commit()


def r_ap_incoming(g, variant, adv):
    """Downlink traffic for the victim arrives at the AP from the distribution system."""
    a, traffic = _one(g, "ApPsm"), _one(g, "PsmTraffic")
    if a is None or traffic.args[0] <= 0 or not _victim_holds(g):
        return
    ap = a.args[0]
    tx = _Tx(g)
    p = tx.fresh()
    tx.swap(traffic, traffic.args[0] - 1, traffic.args[1])
    actions = [ev("APRecvDownlink", AP, STA_V, p)]
    if ap.status(STA_V) == STA_ASLEEP:
        try:
            tx.swap(a, ap_buffer_frame(ap, STA_V, p))
        except NotEnabled:
            return
        actions.append(ev("APBufferUnit", AP, STA_V, p))
    else:
        sa = _keyed(g, "ApSA", STA_V)
        sa2, m = ap_send_direct(ap, sa.args[1], STA_V, p, variant)
        tx.swap(sa, STA_V, sa2)
        tx.emit(m)
        actions.append(ev("APSendDirect", AP, STA_V, p))
    yield RuleInstance("ApIncoming", AP, tuple(actions)), tx.commit()


def r_sta_wake_poll(g, variant, adv):
    psm = _one(g, "StaPsm")
    if psm is None or _keyed(g, "StaSA", STA_V) is None:
        return
    try:
        s2, poll = sta_wake_poll(psm.args[0])
    except NotEnabled:
        return
    tx = _Tx(g)
    tx.swap(psm, s2)
    tx.emit(poll)
    yield RuleInstance("StaWakePoll", STA_V, (ev("STAWake", STA_V), ev("PsPollSent", STA_V))), tx.commit()


def r_ap_deliver_buffered(g, variant, adv):
    a = _one(g, "ApPsm")
    if a is None:
        return
    for f in _chan(g, PsPoll):
        poll = f.args[0]
        sa = _keyed(g, "ApSA", poll.sta)
        if sa is None:
            continue
        try:
            a2, sa2, p, m = ap_deliver_buffered(a.args[0], sa.args[1], poll, variant)
        except NotEnabled:
            continue
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(a, a2)
        tx.swap(sa, poll.sta, sa2)
        tx.emit(m)
        act = ev("APDeliverBuffered", AP, poll.sta, p, str(m.mac.more_data))
        yield RuleInstance("ApDeliverBuffered", AP, (act,)), tx.commit()


def _downlink_frames(g):
    for f in _chan(g, Mpdu):
        if f.args[0].mac.dst_mac == STA_V:
            yield f


def r_sta_recv_buffered(g, variant, adv):
    psm, sta = _one(g, "StaPsm"), _keyed(g, "StaSA", STA_V)
    if psm is None or sta is None or not psm.args[0].polling:
        return
    for f in _downlink_frames(g):
        m = f.args[0]
        try:
            s2, sa2, p, poll = sta_recv_buffered(psm.args[0], sta.args[1], m, variant)
        except (Rejected, NotEnabled):
            continue
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(psm, s2)
        tx.swap(sta, STA_V, sa2)
        actions = [ev("STARecvBuffered", STA_V, p, str(m.mac.more_data))]
        if poll is not None:
            tx.emit(poll)
            actions.append(ev("PsPollSent", STA_V))
        else:
            actions.append(ev("STAReturnSleep", STA_V))
        yield RuleInstance("StaRecvBuffered", STA_V, tuple(actions)), tx.commit()


def r_sta_recv_direct(g, variant, adv):
    psm, sta = _one(g, "StaPsm"), _keyed(g, "StaSA", STA_V)
    if psm is None or sta is None or psm.args[0].polling:
        return
    for f in _downlink_frames(g):
        try:
            sa2, p = sta_recv_direct(psm.args[0], sta.args[1], f.args[0], variant)
        except (Rejected, NotEnabled):
            continue
        tx = _Tx(g)
        tx.drop(f)
        tx.swap(sta, STA_V, sa2)
        yield RuleInstance("StaRecvDirect", STA_V, (ev("STARecvData", STA_V, p),)), tx.commit()


RULES = (
    r_associate, r_rekey, r_disconnect,
    r_spoof_associate, r_tamper_bitmap, r_tamper_buffer,
    r_intercept, r_inject_mutated, r_inject_control,
    r_send_fragment, r_sender_recv_ack, r_frag_timeout, r_recv_fragment, r_defrag_timeout,
    r_sta_send_doze, r_sta_send_data, r_ap_recv_frame, r_sta_recv_ack, r_ap_incoming,
    r_sta_wake_poll, r_ap_deliver_buffered, r_sta_recv_buffered, r_sta_recv_direct,
)

# rule-instance name -> the rule that produces it
RULE_OF = {
    "Associate": r_associate, "Rekey": r_rekey, "Disconnect": r_disconnect,
    "SpoofAssociate": r_spoof_associate, "TamperBitmap": r_tamper_bitmap, "TamperBuffer": r_tamper_buffer,
    "Intercept": r_intercept, "InjectMutated": r_inject_mutated, "InjectAck": r_inject_control,
    "InjectPsPoll": r_inject_control, "SendFragment": r_send_fragment, "RecvAck": r_sender_recv_ack,
    "SenderTimeout": r_frag_timeout, "RecvFragment": r_recv_fragment, "DefragTimeout": r_defrag_timeout,
    "StaSendDoze": r_sta_send_doze, "StaSendData": r_sta_send_data, "ApRecvFrame": r_ap_recv_frame,
    "StaRecvAck": r_sta_recv_ack, "ApIncoming": r_ap_incoming, "StaWakePoll": r_sta_wake_poll,
    "ApDeliverBuffered": r_ap_deliver_buffered, "StaRecvBuffered": r_sta_recv_buffered,
    "StaRecvDirect": r_sta_recv_direct,
}

ATTACKER_RULES = frozenset({
    "Disconnect", "SpoofAssociate", "TamperBitmap", "TamperBuffer", "Intercept",
    "InjectMutated", "InjectAck", "InjectPsPoll",
})


def successors(g: GlobalState, variant: ModelVariant, adv: AdversaryConfig) -> list:
    """All enabled rule instances with their successor states, in canonical order.

    Instances with identical labels (e.g. two copies of one channel message)
    are the same transition; the first is kept.
    """
    out = {}
    for rule in RULES:
        for inst, nxt in rule(g, variant, adv):
            out.setdefault(inst.label, (inst, nxt))
    return sorted(out.values(), key=lambda p: p[0].sort_key)


def successor(g: GlobalState, variant: ModelVariant, adv: AdversaryConfig, name: str, label: str):
    """The (instance, successor) pair with this label, running only the rule that can produce it."""
    rule = RULE_OF.get(name)
    if rule is not None:
        for inst, nxt in rule(g, variant, adv):
            if inst.label == label:
                return inst, nxt
    return None
