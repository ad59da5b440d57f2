"""MRSW lock implementations over plain RA accesses, derived lock orders, and axiom checks.

A client program uses abstract lock statements on some lock location ``l``.
Expansion replaces each statement with the implementation's reads, writes,
CAS and FAA on cells named after ``l``:

* ``FULL_SYNC`` keeps one integer cell ``l`` (0 free, 1 write-held, ``2n``
  held by ``n`` readers, odd while a promotion waits).
* ``WRITE_SYNC`` keeps one cell ``l[i]`` per client thread ``i`` (0 none,
  2 read-held, 1 write-involved).  Thread index 0 is the top-most thread.

Spin loops collapse to their successful iteration.  With ``spin_bound = k``
every loop may additionally be preceded by up to ``k - 1`` failed iterations,
modelled as reads whose negated exit condition is assumed.  Executions in
which some spin never succeeds simply do not exist in the expansion.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Iterator, Sequence

from .consistency import ra_hb, rshare_holds, rsync_holds, wex_holds, wsync_holds
from .enumeration import DEFAULT_MAX_EVENTS, Stats, enumerate_consistent, skeleton
from .graph import (
    Event,
    ExecutionGraph,
    READER_LOCK_KINDS,
    find_cycle,
    same_loc,
    trans_closure,
)
from .litmus import (
    Assume,
    CasLoop,
    Expr,
    FaaBy,
    LockOp,
    Program,
    ReadTo,
    Stmt,
    Thread,
    WriteFrom,
    with_declared,
)



class LockImplKind(str, Enum):
    FULL_SYNC = "FULL_SYNC"
    WRITE_SYNC = "WRITE_SYNC"

    @classmethod
    def parse(cls, name: str) -> "LockImplKind":
        return cls(name.strip().upper().replace("-", "_"))


@dataclass(frozen=True)
class LockImpl:
    kind: LockImplKind
    spin_bound: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LockImplKind(self.kind))
        if self.spin_bound < 1:
            raise ValueError("spin_bound must be at least 1")


FULL_SYNC = LockImpl(LockImplKind.FULL_SYNC)
WRITE_SYNC = LockImpl(LockImplKind.WRITE_SYNC)


class LockOrderError(RuntimeError):
    """The derived lock order is cyclic; impossible for RA-consistent inputs."""


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Span:
    """Where one abstract lock statement landed in the expanded thread."""

    thread: int  # client thread index
    stmt: int  # statement index in the client thread
    op: str
    lock: str
    body: tuple[int, ...]  # expanded statement indices of the successful iteration
    rep: int  # statement index of the representative event


@dataclass(frozen=True)
class Expansion:
    client: Program
    impl: LockImpl
    program: Program
    spans: tuple[Span, ...]
    stmt_map: tuple[tuple[int, ...], ...]  # per thread: client stmt index -> expanded index (-1 for lock ops)
    retries: tuple[int, ...] = ()


class _Builder:
    def __init__(self, t: int, n_threads: int, retries: Iterator[int]):
        self.t = t
        self.n = n_threads
        self.out: list[Stmt] = []
        self.retries = retries
        self.k = 0

    def reg(self, stem: str) -> str:
        self.k += 1
        return f"_m{self.k}_{stem}"

    def emit(self, s: Stmt) -> int:
        self.out.append(s)
        return len(self.out) - 1

    def fail(self, loc: str, cond: str, value: int | None = None) -> None:
        """Failed spin iterations: a read whose value keeps the loop spinning."""
        for _ in range(next(self.retries)):
            r = self.reg("f")
            self.emit(ReadTo(r, loc))
            self.emit(Assume(cond, r, None if value is None else Expr(None, value)))

    def cas(self, loc: str, expect: int, new: int, spins: bool = True) -> int:
        if spins:
            self.fail(loc, "!=", expect)
        return self.emit(CasLoop(loc, Expr(None, expect), Expr(None, new)))


def _full_sync(b: _Builder, op: str, lock: str) -> tuple[list[int], int]:
    cell = lock
    if op == "lock_r":
        b.fail(cell, "odd")
        a = b.reg("a")
        i1 = b.emit(ReadTo(a, cell))
        i2 = b.emit(Assume("even", a))
        i3 = b.emit(CasLoop(cell, Expr(a), Expr(a, 2)))
        return [i1, i2, i3], i3
    if op == "unlock_r":
        i = b.emit(FaaBy(cell, -2))
        return [i], i
    if op == "lock_w":
        i = b.cas(cell, 0, 1)
        return [i], i
    if op == "unlock_w":
        i = b.emit(WriteFrom(cell, Expr(None, 0)))
        return [i], i
    # promote: signal with a decrement to an odd value, then wait for the count to drain
    a = b.reg("a")
    i1 = b.emit(ReadTo(a, cell))
    i2 = b.emit(Assume("even", a))
    i3 = b.emit(CasLoop(cell, Expr(a), Expr(a, -1)))
    b.fail(cell, "!=", 1)
    p = b.reg("p")
    i4 = b.emit(ReadTo(p, cell))
    i5 = b.emit(Assume("==", p, Expr(None, 1)))
    return [i1, i2, i3, i4, i5], i4


def cell_of(lock: str, i: int) -> str:
    return f"{lock}[{i}]"


def _write_sync(b: _Builder, op: str, lock: str) -> tuple[list[int], int]:
    t, n = b.t, b.n
    if op == "lock_r":
        i = b.cas(cell_of(lock, t), 0, 2)
        return [i], i
    if op == "unlock_r":
        i = b.emit(WriteFrom(cell_of(lock, t), Expr(None, 0)))
        return [i], i
    if op == "lock_w":
        idx = [b.cas(cell_of(lock, i), 0, 1) for i in range(n)]
        return idx, idx[0]
    if op == "unlock_w":
        idx = [b.emit(WriteFrom(cell_of(lock, i), Expr(None, 0))) for i in range(n)]
        return idx, idx[0]
    idx: list[int] = []
    if t == 0:
        idx.append(b.emit(WriteFrom(cell_of(lock, 0), Expr(None, 1))))
    else:
        top = cell_of(lock, 0)
        b.fail(top, "!=", 0)
        a = b.reg("a")
        idx.append(b.emit(ReadTo(a, top)))
        idx.append(b.emit(Assume("!=", a, Expr(None, 1))))
        idx.append(b.cas(top, 0, 1, spins=False))
        idx.append(b.emit(WriteFrom(cell_of(lock, t), Expr(None, 1))))
    for i in range(n):
        if i not in (0, t):
            idx.append(b.cas(cell_of(lock, i), 0, 1))
    return idx, idx[0]


def spin_loops(client: Program, impl: LockImpl) -> int:
    """Number of spin loops the expansion of ``client`` contains."""
    n = len(client.threads)
    total = 0
    for t in client.threads:
        for s in t.body:
            if not isinstance(s, LockOp):
                continue
            if impl.kind is LockImplKind.FULL_SYNC:
                total += {"lock_r": 1, "lock_w": 1, "promote": 1}.get(s.op, 0)
            else:
                total += {"lock_r": 1, "lock_w": n, "promote": n - 1}.get(s.op, 0)
    return total


def expand_lock_ops(client: Program, impl: LockImpl | LockImplKind | str, retries: Sequence[int] = ()) -> Expansion:
    """Replace lock statements by ``impl``'s code; ``retries`` gives failed iterations per spin loop."""
    if not isinstance(impl, LockImpl):
        impl = LockImpl(LockImplKind.parse(impl) if isinstance(impl, str) else impl)
    if client.has_transactions:
        raise ValueError("lock clients cannot contain transactions")
    needed = spin_loops(client, impl)
    retries = tuple(retries) or (0,) * needed
    if len(retries) != needed:
        raise ValueError(f"expected {needed} retry counts, got {len(retries)}")
    it = iter(retries)
    n = len(client.threads)
    spans: list[Span] = []
    threads: list[Thread] = []
    stmt_maps = []
    for ti, t in enumerate(client.threads):
        b = _Builder(ti, n, it)
        smap = []
        for si, s in enumerate(t.body):
            if isinstance(s, LockOp):
                gen = _full_sync if impl.kind is LockImplKind.FULL_SYNC else _write_sync
                body, rep = gen(b, s.op, s.loc)
                spans.append(Span(ti, si, s.op, s.loc, tuple(body), rep))
                smap.append(-1)
            else:
                smap.append(b.emit(s))
        threads.append(Thread(t.name, tuple(b.out)))
        stmt_maps.append(tuple(smap))
    program = with_declared(Program(tuple(threads), ()))
    return Expansion(client, impl, program, tuple(spans), tuple(stmt_maps), retries)


def expansions(client: Program, impl: LockImpl) -> Iterator[Expansion]:
    """Every expansion with 0..spin_bound-1 failed iterations per spin loop."""
    loops = spin_loops(client, impl)
    for retries in itertools.product(range(impl.spin_bound), repeat=loops):
        yield expand_lock_ops(client, impl, retries)


# ---------------------------------------------------------------------------
# Derived lock order
# ---------------------------------------------------------------------------


def _event_index(exp: Expansion) -> list[list[int]]:
    """Per thread: expanded statement index -> event id (or -1)."""
    sk = skeleton(exp.program)
    out = []
    for code in sk.threads:
        out.append([op.event if op.event is not None else -1 for op in code.ops])
    return out


def _is_writer(op: str) -> bool:
    return op in ("lock_w", "unlock_w", "promote")


def derive_lo(g: ExecutionGraph, exp: Expansion) -> dict[tuple[int, int], bool]:
    """Order between abstract lock operations, keyed by span index pairs.

    FULL_SYNC orders representative events by ``(po ∪ rf)+`` on the lock cell.
    WRITE_SYNC orders same-thread pairs by po, and cross-thread pairs with a
    writer-class operation by ``(po ∪ rf)+`` on a cell both touch
    (the top-most entry for two writers, the reader's own entry otherwise).
    Reader pairs of distinct threads are ordered only through transitivity.
    """
    ev = _event_index(exp)
    by = g.by_id
    spans = exp.spans
    rep = [ev[s.thread][s.rep] for s in spans]
    body = [[ev[s.thread][i] for i in s.body if ev[s.thread][i] >= 0] for s in spans]
    cell_rel: dict[str, frozenset] = {}

    def on_cell(cell: str) -> frozenset:
        if cell not in cell_rel:
            ids = {e.id for e in g.events if e.loc == cell}
            base = {(a, b) for a, b in g.po | g.rf if a in ids and b in ids}
            cell_rel[cell] = trans_closure(base)
        return cell_rel[cell]

    pairs: set[tuple[int, int]] = set()
    for i, a in enumerate(spans):
        for j, b in enumerate(spans):
            if i == j or a.lock != b.lock:
                continue
            if exp.impl.kind is LockImplKind.FULL_SYNC:
                if (rep[i], rep[j]) in on_cell(a.lock):
                    pairs.add((i, j))
                continue
            if a.thread == b.thread:
                if a.stmt < b.stmt:
                    pairs.add((i, j))
                continue
            if not (_is_writer(a.op) or _is_writer(b.op)):
                continue
            if _is_writer(a.op) and _is_writer(b.op):
                cell = cell_of(a.lock, 0)
            else:
                reader = a if not _is_writer(a.op) else b
                cell = cell_of(a.lock, reader.thread)
            rel = on_cell(cell)
            ea = [e for e in body[i] if by[e].loc == cell]
            eb = [e for e in body[j] if by[e].loc == cell]
            if any((x, y) in rel for x in ea for y in eb):
                pairs.add((i, j))
    closed = trans_closure(pairs)
    cycle = find_cycle(closed)
    if cycle is not None:
        raise LockOrderError(f"derived lock order is cyclic over spans {cycle}")
    return {p: True for p in closed}


def abstract_graph(g: ExecutionGraph, exp: Expansion, lo_spans) -> ExecutionGraph:
    """The client-level graph: data events of ``g`` plus one lock event per span."""
    ev = _event_index(exp)
    client_sk = skeleton(exp.client)
    by = g.by_id
    data_loc = set(exp.client.locations)
    events: list[Event] = []
    to_client: dict[int, int] = {}
    span_event: dict[tuple[int, int], int] = {}
    for e in client_sk.init:
        orig = next(x for x in g.events if x.is_init and x.loc == e.loc)
        to_client[orig.id] = e.id
        events.append(e)
    for ti, code in enumerate(client_sk.threads):
        for si, op in enumerate(code.ops):
            if op.event is None:
                continue
            tid, txid, kind, loc = client_sk.kinds[op.event]
            if isinstance(op.stmt, LockOp):
                events.append(Event(op.event, tid, 0, kind, loc))
                span_event[(ti, si)] = op.event
            else:
                src = by[ev[ti][exp.stmt_map[ti][si]]]
                to_client[src.id] = op.event
                events.append(Event(op.event, tid, 0, kind, loc, src.rval, src.wval))
    rf = frozenset((to_client[a], to_client[b]) for a, b in g.rf if a in to_client and b in to_client)
    mo = frozenset((to_client[a], to_client[b]) for a, b in g.mo if a in to_client and b in to_client)
    ids = [span_event[(s.thread, s.stmt)] for s in exp.spans]
    lo = frozenset((ids[i], ids[j]) for i, j in lo_spans)
    assert all(e.loc in data_loc for e in events if not e.is_lock)
    return ExecutionGraph(tuple(events), client_sk.po, rf, mo, lo)


# ---------------------------------------------------------------------------
# Verification report
# ---------------------------------------------------------------------------

AXIOMS = ("WSync", "WEx", "RShare", "RSync", "Acyc")


@dataclass
class ExecutionVerdict:
    index: int
    axioms: dict[str, bool]
    unordered_readers: list[tuple[int, int]]


@dataclass
class LockReport:
    client: str
    impl: str
    spin_bound: int
    executions: int = 0
    expansions: int = 0
    dropped: int = 0
    holds: dict[str, int] = field(default_factory=lambda: {a: 0 for a in AXIOMS})
    reader_unordered_executions: int = 0
    per_execution: list[ExecutionVerdict] = field(default_factory=list)

    def all_hold(self, axiom: str) -> bool:
        return self.executions > 0 and self.holds[axiom] == self.executions

    @property
    def ok(self) -> bool:
        """Expected behaviour for the implementation."""
        base = all(self.all_hold(a) for a in ("WSync", "WEx", "RShare", "Acyc"))
        if self.impl == LockImplKind.FULL_SYNC.value:
            return base and self.all_hold("RSync")
        return base

    def to_json_obj(self, details: bool = True) -> dict:
        obj = asdict(self)
        if not details:
            obj.pop("per_execution")
        return obj

    def to_json(self, details: bool = True) -> str:
        return json.dumps(self.to_json_obj(details), indent=1)


def _unordered_readers(g: ExecutionGraph) -> list[tuple[int, int]]:
    out = []
    readers = sorted(g.of_kind(*READER_LOCK_KINDS))
    by = g.by_id
    for i, a in enumerate(readers):
        for b in readers[i + 1:]:
            if by[a].loc == by[b].loc and (a, b) not in g.lo and (b, a) not in g.lo:
                out.append((a, b))
    return out


def verify_lock_axioms(
    client: Program,
    impl: LockImpl | str,
    name: str = "",
    max_events: int = DEFAULT_MAX_EVENTS,
    keep_details: bool = True,
) -> LockReport:
    """Check the lock axioms on the derived lo of every RA-consistent execution."""
    if not isinstance(impl, LockImpl):
        impl = LockImpl(LockImplKind.parse(impl))
    report = LockReport(name, impl.kind.value, impl.spin_bound)
    index = 0
    for exp in expansions(client, impl):
        report.expansions += 1
        stats = Stats()
        graphs = enumerate_consistent(exp.program, "ra", max_events=max_events, workers=1, stats=stats)
        if not graphs:
            report.dropped += 1
        for g in graphs:
            lo = derive_lo(g, exp)
            ag = abstract_graph(g, exp, lo)
            verdicts = {
                "WSync": wsync_holds(ag),
                "WEx": wex_holds(ag),
                "RShare": rshare_holds(ag),
                "RSync": rsync_holds(ag),
                "Acyc": find_cycle(same_loc(ra_hb(ag), ag) | ag.mo | ag.fr) is None,
            }
            unordered = [(a, b) for a, b in _unordered_readers(ag) if ag.by_id[a].tid != ag.by_id[b].tid]
            report.executions += 1
            for k, v in verdicts.items():
                report.holds[k] += int(v)
            if unordered:
                report.reader_unordered_executions += 1
            if keep_details:
                report.per_execution.append(ExecutionVerdict(index, verdicts, unordered))
            index += 1
    return report


__all__ = [
    "AXIOMS",
    "Expansion",
    "FULL_SYNC",
    "LockImpl",
    "LockImplKind",
    "LockOrderError",
    "LockReport",
    "Span",
    "WRITE_SYNC",
    "abstract_graph",
    "cell_of",
    "derive_lo",
    "expand_lock_ops",
    "expansions",
    "spin_loops",
    "verify_lock_axioms",
]
