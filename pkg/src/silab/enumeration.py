"""Exhaustive enumeration of execution graphs for litmus programs.

The search runs in three layers:

1. Skeleton.  Programs are straight-line, so the event shape of each
   thread is fixed up to values.
2. Values and rf together.  Threads are interleaved in a canonical order
   (the least topological order of po ∪ rf).  A read either takes its value
   from a same-location write already executed, or is deferred while some
   writer to that location is still pending; a deferred read may no longer
   pick any write that was executed before it was deferred, so each rf map
   is produced once.  Values are therefore exact and no domain is guessed.
   Writes are never read by more than one update, which RA atomicity forces.
3. mo and lo.  mo is a product of per-location linear extensions of a
   constraint order that all consistent graphs respect (po between writes,
   plus rf paths for SI and RA), with updates placed immediately after their
   source.  lo orders writer critical sections as atomic blocks and places
   every reader lock event at a section boundary (a cut); reader pairs at the
   same cut stay unordered.  Deleting reader-reader lo edges never breaks RA
   consistency, so no outcome is lost.

Every emitted graph is re-checked by the model's full predicate.
"""

from __future__ import annotations

import hashlib
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .consistency import ModelId, ModelMismatch, check
from .graph import (
    Event,
    ExecutionGraph,
    Kind,
    build_po,
    trans_closure,
)
from .litmus import (
    Assign,
    Assume,
    CasLoop,
    Expr,
    FaaBy,
    LockOp,
    Outcome,
    Program,
    ReadTo,
    TxBlock,
    WriteFrom,
    serialize,
)

DEFAULT_MAX_EVENTS = 64

_LOCK_KIND = {
    "lock_r": Kind.RL,
    "unlock_r": Kind.RU,
    "lock_w": Kind.WL,
    "unlock_w": Kind.WU,
    "promote": Kind.PL,
}


class EnumerationLimitError(RuntimeError):
    """The program exceeds the configured event ceiling."""


# ---------------------------------------------------------------------------
# Skeleton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Op:
    """One step of a thread: an event slot or a local action (``event`` is None)."""

    stmt: object
    event: int | None = None
    kind: Kind | None = None
    loc: str | None = None
    txid: int = 0


@dataclass(frozen=True)
class ThreadCode:
    tid: int
    name: str
    ops: tuple[Op, ...]
    registers: tuple[str, ...]  # observable registers, in first-assignment order

    @property
    def event_ids(self) -> tuple[int, ...]:
        return tuple(op.event for op in self.ops if op.event is not None)


@dataclass(frozen=True)
class Skeleton:
    """Value-free event structure of a program."""

    init: tuple[Event, ...]
    threads: tuple[ThreadCode, ...]
    po: frozenset
    kinds: dict = field(compare=False)  # event id -> (tid, txid, kind, loc)

    @property
    def event_count(self) -> int:
        return len(self.kinds)

    @property
    def locations(self) -> tuple[str, ...]:
        return tuple(e.loc for e in self.init)

    def ids_of(self, pred) -> list[int]:
        return [i for i, info in sorted(self.kinds.items()) if pred(*info)]


def skeleton(p: Program) -> Skeleton:
    """Events without values, po, and per-thread op lists."""
    locs = p.locations
    init = tuple(Event(i, 0, 0, Kind.W, loc, None, 0) for i, loc in enumerate(locs))
    kinds: dict[int, tuple[int, int, Kind, str]] = {e.id: (0, 0, Kind.W, e.loc) for e in init}
    next_id = len(init)
    next_tx = 1
    threads = []
    for index, t in enumerate(p.threads):
        tid = index + 1
        ops: list[Op] = []
        regs: list[str] = []

        def note(r: str) -> None:
            if not r.startswith("_") and r not in regs:
                regs.append(r)

        def emit(stmt, txid: int) -> None:
            nonlocal next_id
            kind: Kind | None = None
            if isinstance(stmt, ReadTo):
                kind = Kind.R
                note(stmt.reg)
            elif isinstance(stmt, WriteFrom):
                kind = Kind.W
            elif isinstance(stmt, (CasLoop, FaaBy)):
                kind = Kind.U
            elif isinstance(stmt, LockOp):
                kind = _LOCK_KIND[stmt.op]
            elif isinstance(stmt, Assign):
                note(stmt.reg)
            if kind is None:
                ops.append(Op(stmt))
                return
            ops.append(Op(stmt, next_id, kind, stmt.loc, txid))
            kinds[next_id] = (tid, txid, kind, stmt.loc)
            next_id += 1

        for s in t.body:
            if isinstance(s, TxBlock):
                for b in s.body:
                    emit(b, next_tx)
                next_tx += 1
            else:
                emit(s, 0)
        threads.append(ThreadCode(tid, t.name, tuple(ops), tuple(regs)))
    stub = [Event(i, tid, 0, Kind.RL, "_") for i, (tid, *_rest) in kinds.items()]
    return Skeleton(init, tuple(threads), trans_closure(build_po(stub)), kinds)


# ---------------------------------------------------------------------------
# Layers 1 and 2: values and rf
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RfExecution:
    """One rf choice (acyclic with po) together with the values it induces."""

    events: tuple[Event, ...]
    rf: frozenset
    outcome: Outcome


def _eval(e: Expr, regs: dict[str, int]) -> int:
    return e.eval(regs)


def enumerate_rf(sk: Skeleton) -> Iterator[RfExecution]:
    """Every value-consistent rf whose union with po is acyclic, each exactly once.

    Events execute in the least topological order of po ∪ rf that always
    advances the lowest-indexed enabled thread.  A pending read either takes a
    source among the writes executed so far or is deferred, in which case it
    must later read from a write executed after the deferral.  Every acyclic
    rf therefore has exactly one derivation.
    """
    threads = sk.threads
    n = len(threads)
    ops = [code.ops for code in threads]
    pcs = [0] * n
    regs: list[dict[str, int]] = [{} for _ in range(n)]
    values: dict[int, tuple[int | None, int | None]] = {e.id: (None, 0) for e in sk.init}
    executed: dict[str, list[int]] = {}
    for e in sk.init:
        executed.setdefault(e.loc, []).append(e.id)
    pending_writes: dict[str, int] = {}
    for eid, (tid, _, kind, loc) in sk.kinds.items():
        if tid and kind in (Kind.W, Kind.U):
            pending_writes[loc] = pending_writes.get(loc, 0) + 1
    forbidden: dict[int, frozenset[int]] = {}
    rf: list[tuple[int, int]] = []
    taken: set[int] = set()

    def run_locals(t: int) -> bool:
        """Advance thread ``t`` over local statements; False if an assume fails."""
        code = ops[t]
        while pcs[t] < len(code) and code[pcs[t]].event is None:
            s = code[pcs[t]].stmt
            if isinstance(s, Assign):
                regs[t] = {**regs[t], s.reg: _eval(s.expr, regs[t])}
            elif isinstance(s, Assume) and not s.holds(regs[t]):
                return False
            pcs[t] += 1
        return True

    def emit() -> RfExecution:
        evs = list(sk.init)
        items = {}
        for t, code in enumerate(threads):
            for op in code.ops:
                if op.event is not None:
                    r, w = values[op.event]
                    evs.append(Event(op.event, code.tid, op.txid, op.kind, op.loc, r, w))
            for name in code.registers:
                items[(code.name, name)] = regs[t][name]
        return RfExecution(tuple(evs), frozenset(rf), Outcome.of(items))

    def execute(t: int, rval: int | None, wval: int | None, src: int | None) -> Iterator[RfExecution]:
        op = ops[t][pcs[t]]
        saved_pc, saved_regs = pcs[t], regs[t]
        s = op.stmt
        if isinstance(s, ReadTo):
            regs[t] = {**regs[t], s.reg: rval}
        values[op.event] = (rval, wval)
        if src is not None:
            rf.append((src, op.event))
            if op.kind is Kind.U:
                taken.add(src)
        if wval is not None:
            executed.setdefault(op.loc, []).append(op.event)
            pending_writes[op.loc] -= 1
        pcs[t] += 1
        if run_locals(t):
            yield from step()
        pcs[t], regs[t] = saved_pc, saved_regs
        if wval is not None:
            executed[op.loc].pop()
            pending_writes[op.loc] += 1
        if src is not None:
            rf.pop()
            if op.kind is Kind.U:
                taken.discard(src)
        del values[op.event]

    def choose(t: int) -> Iterator[RfExecution]:
        while t < n and pcs[t] == len(ops[t]):
            t += 1
        if t == n:
            return
        op = ops[t][pcs[t]]
        s, r = op.stmt, regs[t]
        if op.kind not in (Kind.R, Kind.U):
            wval = _eval(s.expr, r) if isinstance(s, WriteFrom) else None
            yield from execute(t, None, wval, None)
            return
        banned = forbidden.get(op.event, frozenset())
        for w in list(executed.get(op.loc, ())):
            if w in banned or (op.kind is Kind.U and w in taken):
                continue
            v = values[w][1]
            if isinstance(s, CasLoop):
                if v != _eval(s.expect, r):
                    continue
                yield from execute(t, v, _eval(s.new, r), w)
            elif isinstance(s, FaaBy):
                yield from execute(t, v, v + s.delta, w)
            else:
                yield from execute(t, v, None, w)
        if pending_writes.get(op.loc, 0) > 0:
            forbidden[op.event] = banned | frozenset(executed.get(op.loc, ()))
            yield from choose(t + 1)
            if banned:
                forbidden[op.event] = banned
            else:
                del forbidden[op.event]

    def step() -> Iterator[RfExecution]:
        if all(pcs[t] == len(ops[t]) for t in range(n)):
            yield emit()
            return
        yield from choose(0)

    if all(run_locals(t) for t in range(n)):
        yield from step()


def evaluate(sk: Skeleton, rf: Iterable[tuple[int, int]]) -> dict[int, tuple[int | None, int | None]] | None:
    """Value assignment induced by ``rf`` over a topological order of po ∪ rf.

    Returns ``{event id: (rval, wval)}`` or None when the rf choice is cyclic
    with po, mismatches a CAS expectation, or violates an ``assume``.
    """
    src = {r: w for w, r in rf}
    values: dict[int, tuple[int | None, int | None]] = {e.id: (None, 0) for e in sk.init}
    state = [{"pc": 0, "regs": {}} for _ in sk.threads]
    progress = True
    while progress:
        progress = False
        for code, st in zip(sk.threads, state):
            ops = code.ops
            while st["pc"] < len(ops):
                op = ops[st["pc"]]
                s, regs = op.stmt, st["regs"]
                if op.event is not None and op.kind in (Kind.R, Kind.U):
                    w = src.get(op.event)
                    if w is None or w not in values:
                        break
                    v = values[w][1]
                    if isinstance(s, ReadTo):
                        regs[s.reg] = v
                        values[op.event] = (v, None)
                    elif isinstance(s, CasLoop):
                        if v != _eval(s.expect, regs):
                            return None
                        values[op.event] = (v, _eval(s.new, regs))
                    else:
                        values[op.event] = (v, v + s.delta)
                elif isinstance(s, WriteFrom):
                    values[op.event] = (None, _eval(s.expr, regs))
                elif isinstance(s, LockOp):
                    values[op.event] = (None, None)
                elif isinstance(s, Assign):
                    regs[s.reg] = _eval(s.expr, regs)
                elif isinstance(s, Assume):
                    if not s.holds(regs):
                        return None
                st["pc"] += 1
                progress = True
    if any(st["pc"] < len(code.ops) for code, st in zip(sk.threads, state)):
        return None
    return values


# ---------------------------------------------------------------------------
# Layer 3: mo and lo
# ---------------------------------------------------------------------------


def _linear_extensions(nodes: list, before: set[tuple]) -> Iterator[list]:
    preds = {n: {a for a, b in before if b == n} for n in nodes}
    placed: list = []
    remaining = set(nodes)

    def go() -> Iterator[list]:
        if not remaining:
            yield list(placed)
            return
        for n in sorted(remaining):
            if preds[n] & remaining:
                continue
            remaining.discard(n)
            placed.append(n)
            yield from go()
            placed.pop()
            remaining.add(n)

    yield from go()


def _order_pairs(order: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, b) for i, a in enumerate(order) for b in order[i + 1:]]


def enumerate_mo(
    events: Sequence[Event],
    rf: frozenset,
    po: frozenset,
    constraint: frozenset | None = None,
    exhaustive: bool = False,
) -> Iterator[frozenset]:
    """Products of per-location mo orders.

    ``exhaustive`` yields every per-location permutation.  Otherwise updates
    sit immediately after their rf source and each order extends
    ``constraint`` (defaults to po) on same-location writes.
    """
    by_loc: dict[str, list[int]] = {}
    by = {e.id: e for e in events}
    for e in events:
        if e.is_write:
            by_loc.setdefault(e.loc, []).append(e.id)
    per_loc: list[list[list[int]]] = []
    constraint = po if constraint is None else constraint
    src = {r: w for w, r in rf}
    for loc in sorted(by_loc):
        ws = by_loc[loc]
        if exhaustive:
            per_loc.append([list(p) for p in itertools.permutations(sorted(ws))])
            continue
        # chains: a plain write followed by the updates reading from it, transitively
        next_of = {src[u]: u for u in ws if by[u].kind is Kind.U and u in src}
        heads = [w for w in ws if not (by[w].kind is Kind.U and w in src)]
        chains = []
        for h in heads:
            chain = [h]
            while chain[-1] in next_of:
                chain.append(next_of[chain[-1]])
            chains.append(tuple(chain))
        if sum(len(c) for c in chains) != len(ws):
            per_loc.append([])  # an update whose chain is cyclic: no order exists
            continue
        owner = {w: c for c in chains for w in c}
        before = {
            (owner[a], owner[b])
            for a, b in constraint
            if a in owner and b in owner and owner[a] != owner[b]
        }
        exts = []
        for order in _linear_extensions(chains, before):
            flat = [w for c in order for w in c]
            pos = {w: i for i, w in enumerate(flat)}
            if all(pos[a] < pos[b] for a, b in constraint if a in pos and b in pos):
                exts.append(flat)
        per_loc.append(exts)
    for combo in itertools.product(*per_loc):
        yield frozenset(p for order in combo for p in _order_pairs(order))


def _lock_sections(events: Sequence[Event], po_rank: dict[int, int]) -> dict[str, tuple[list[list[list[int]]], list[int]]]:
    """Per lock location: per-thread writer sections (po order) and reader events."""
    out: dict[str, tuple[dict[int, list[list[int]]], list[int]]] = {}
    open_sections: set[tuple[str, int]] = set()
    for e in sorted((e for e in events if e.is_lock), key=lambda e: (e.tid, po_rank[e.id])):
        threads, readers = out.setdefault(e.loc, ({}, []))
        secs = threads.setdefault(e.tid, [])
        key = (e.loc, e.tid)
        if e.kind in (Kind.WL, Kind.PL):
            secs.append([e.id])
            open_sections.add(key)
        elif e.kind is Kind.WU:
            if key in open_sections:
                secs[-1].append(e.id)
                open_sections.discard(key)
            else:
                secs.append([e.id])
        else:
            readers.append(e.id)
    return {loc: ([s for _, s in sorted(th.items())], rd) for loc, (th, rd) in out.items()}


def _interleavings(seqs: list[list]) -> Iterator[list]:
    seqs = [s for s in seqs if s]
    if not seqs:
        yield []
        return
    for i, s in enumerate(seqs):
        rest = seqs[:i] + [s[1:]] + seqs[i + 1:]
        for tail in _interleavings(rest):
            yield [s[0]] + tail


def enumerate_lo(
    events: Sequence[Event], po: frozenset, total: bool = False, hb: frozenset | None = None
) -> Iterator[frozenset]:
    """lo candidates: ordered writer sections plus reader cuts (see module docs).

    With ``total`` readers sharing a cut are additionally ordered in every
    po-respecting way, giving per-location total orders.  Given ``hb`` (a
    closed relation such as ``(po ∪ rf)+``), candidates that would close a
    cycle with it are skipped: any hb cycle passes through a lock event and
    so breaks Acyc.
    """
    ids = [e.id for e in events]
    po_rank = {i: sum(1 for j in ids if (j, i) in po) for i in ids}
    by = {e.id: e for e in events}
    per_loc: list[list[frozenset]] = []
    for loc, (thread_secs, readers) in sorted(_lock_sections(events, po_rank).items()):
        options: list[frozenset] = []
        for sec_order in _interleavings(thread_secs):
            writers = [w for sec in sec_order for w in sec]
            wpos = {w: i for i, w in enumerate(writers)}
            bounds = [0]
            for sec in sec_order:
                bounds.append(bounds[-1] + len(sec))
            choices = []
            for r in readers:
                ok = []
                for c in bounds:
                    good = True
                    for w, i in wpos.items():
                        if by[w].tid != by[r].tid:
                            continue
                        if (r, w) in po and not c <= i:
                            good = False
                        if (w, r) in po and not c > i:
                            good = False
                    if good:
                        ok.append(c)
                choices.append(ok)
            for cuts in itertools.product(*choices):
                cut = dict(zip(readers, cuts))
                if any(
                    (a, b) in po and cut[a] > cut[b] for a in readers for b in readers if a != b
                ):
                    continue
                base = set(_order_pairs(writers))
                for r, c in cut.items():
                    base.update((w, r) for w in writers[:c])
                    base.update((r, w) for w in writers[c:])
                if not total:
                    base.update((a, b) for a in readers for b in readers if cut[a] < cut[b])
                    options.append(frozenset(base))
                    continue
                groups: dict[int, list[int]] = {}
                for r in readers:
                    groups.setdefault(cut[r], []).append(r)
                orders_per_group = []
                for c in sorted(groups):
                    members = groups[c]
                    by_thread: dict[int, list[int]] = {}
                    for r in sorted(members, key=lambda r: po_rank[r]):
                        by_thread.setdefault(by[r].tid, []).append(r)
                    orders_per_group.append(list(_interleavings(list(by_thread.values()))))
                for chosen in itertools.product(*orders_per_group):
                    seq = [r for grp in chosen for r in grp]
                    rel = set(base)
                    rel.update(_order_pairs(seq))
                    options.append(frozenset(rel))
        per_loc.append(options)
    if hb is None:
        for combo in itertools.product(*per_loc):
            yield frozenset().union(*combo) if combo else frozenset()
        return
    yield from _compatible(per_loc, 0, hb, frozenset())


def _compatible(per_loc: list[list[frozenset]], k: int, hb: frozenset, acc: frozenset) -> Iterator[frozenset]:
    if k == len(per_loc):
        yield acc
        return
    for option in per_loc[k]:
        if any((b, a) in hb for a, b in option):
            continue
        nxt = trans_closure(hb | option) if k + 1 < len(per_loc) else hb
        yield from _compatible(per_loc, k + 1, nxt, acc | option)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


@dataclass
class Stats:
    rf_candidates: int = 0
    graphs_checked: int = 0
    consistent: int = 0

    def merge(self, other: "Stats") -> None:
        for name in ("rf_candidates", "graphs_checked", "consistent"):
            setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass(frozen=True)
class OutcomeSet:
    outcomes: frozenset[Outcome]
    model: str
    program_hash: str
    graph_count: int

    def sorted(self) -> list[Outcome]:
        return sorted(self.outcomes)

    def __contains__(self, item) -> bool:
        if isinstance(item, Outcome):
            return item in self.outcomes
        return any(o.matches(item) for o in self.outcomes)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.outcomes)

    def contains(self, partial: dict) -> bool:
        return any(o.matches(partial) for o in self.outcomes)


def program_hash(p: Program) -> str:
    return hashlib.sha256(serialize(p).encode()).hexdigest()[:16]


def check_discipline(p: Program, model: ModelId) -> None:
    """Raise :class:`ModelMismatch` if ``p`` cannot produce graphs ``model`` speaks about."""
    model = _model(model)
    if model in (ModelId.SI_AXIOMATIC, ModelId.SI_HB):
        if p.has_locks:
            raise ModelMismatch("SI programs cannot use lock operations")
        if p.has_nt_accesses:
            raise ModelMismatch("SI programs must place every shared access inside a transaction; use rsi for mixed code")
    elif model is ModelId.RSI:
        if p.has_locks:
            raise ModelMismatch("RSI programs cannot use lock operations")
    else:
        if p.has_transactions:
            raise ModelMismatch("RA programs cannot contain transactions; translate them first")


def _model(m: ModelId | str) -> ModelId:
    return m if isinstance(m, ModelId) else ModelId.parse(m)


def _mo_constraint(model: ModelId | None, po: frozenset, rf: frozenset) -> frozenset:
    if model is ModelId.RSI:
        return po
    return trans_closure(po | rf)


@dataclass
class _Plan:
    sk: Skeleton
    model: ModelId | None
    exhaustive_mo: bool
    keep_graphs: bool
    filter_model: bool


def _run(plan: _Plan, executions: Iterable[RfExecution]) -> tuple[list, set, Stats]:
    sk = plan.sk
    graphs: list[ExecutionGraph] = []
    found: set[Outcome] = set()
    stats = Stats()
    has_locks = any(info[2] not in (Kind.R, Kind.W, Kind.U) for info in sk.kinds.values())
    total_lo = plan.model is ModelId.RA_RSYNC
    for ex in executions:
        stats.rf_candidates += 1
        constraint = None if plan.exhaustive_mo else _mo_constraint(plan.model, sk.po, ex.rf)
        hb = trans_closure(sk.po | ex.rf) if has_locks and plan.filter_model else None
        for mo in enumerate_mo(ex.events, ex.rf, sk.po, constraint, exhaustive=plan.exhaustive_mo):
            los = enumerate_lo(ex.events, sk.po, total=total_lo, hb=hb) if has_locks else [frozenset()]
            for lo in los:
                g = ExecutionGraph(ex.events, sk.po, ex.rf, mo, lo, {"outcome": ex.outcome})
                stats.graphs_checked += 1
                if plan.filter_model and not check(g, plan.model):
                    continue
                stats.consistent += 1
                found.add(ex.outcome)
                if plan.keep_graphs:
                    graphs.append(g)
    return graphs, found, stats


def _worker(args) -> tuple[list, set, Stats]:
    plan, executions = args
    return _run(plan, executions)


def workers_from_env(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("SILAB_WORKERS", default)))
    except ValueError:
        return default


def _prepare(p: Program, max_events: int) -> Skeleton:
    sk = skeleton(p)
    if sk.event_count > max_events:
        raise EnumerationLimitError(
            f"program has {sk.event_count} events, above the ceiling of {max_events}; raise --max-events"
        )
    return sk


def _execute(plan: _Plan, workers: int) -> tuple[list, set, Stats]:
    executions = list(enumerate_rf(plan.sk))
    if workers <= 1 or len(executions) < 2 * workers:
        return _run(plan, executions)
    chunks = [executions[i::workers] for i in range(workers)]
    graphs, found, stats = [], set(), Stats()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for g, o, s in pool.map(_worker, [(plan, c) for c in chunks]):
            graphs.extend(g)
            found |= o
            stats.merge(s)
    graphs.sort(key=_graph_key)
    return graphs, found, stats


def _graph_key(g: ExecutionGraph):
    return (
        tuple((e.id, e.rval, e.wval) for e in g.events),
        tuple(sorted(g.rf)),
        tuple(sorted(g.mo)),
        tuple(sorted(g.lo)),
    )


def enumerate_consistent(
    p: Program,
    model: ModelId | str,
    max_events: int = DEFAULT_MAX_EVENTS,
    workers: int | None = None,
    stats: Stats | None = None,
) -> list[ExecutionGraph]:
    """All graphs of ``p`` that ``model`` deems consistent, in a deterministic order."""
    model = _model(model)
    check_discipline(p, model)
    plan = _Plan(_prepare(p, max_events), model, False, True, True)
    graphs, _, s = _execute(plan, workers or workers_from_env())
    if stats is not None:
        stats.merge(s)
    return graphs


def outcomes(
    p: Program,
    model: ModelId | str,
    max_events: int = DEFAULT_MAX_EVENTS,
    workers: int | None = None,
    stats: Stats | None = None,
) -> OutcomeSet:
    model = _model(model)
    check_discipline(p, model)
    plan = _Plan(_prepare(p, max_events), model, False, False, True)
    _, found, s = _execute(plan, workers or workers_from_env())
    if stats is not None:
        stats.merge(s)
    return OutcomeSet(frozenset(found), model.value, program_hash(p), s.consistent)


def enumerate_candidates(p: Program, max_events: int = DEFAULT_MAX_EVENTS) -> list[ExecutionGraph]:
    """Every value-consistent rf (acyclic with po) times every mo permutation; unfiltered."""
    plan = _Plan(_prepare(p, max_events), None, True, True, False)
    graphs, _, _ = _execute(plan, 1)
    return graphs


__all__ = [
    "DEFAULT_MAX_EVENTS",
    "EnumerationLimitError",
    "OutcomeSet",
    "Skeleton",
    "Stats",
    "check_discipline",
    "enumerate_candidates",
    "enumerate_consistent",
    "enumerate_lo",
    "enumerate_mo",
    "enumerate_rf",
    "evaluate",
    "outcomes",
    "program_hash",
    "skeleton",
    "RfExecution",
]
