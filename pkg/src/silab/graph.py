"""Events, execution graphs and the relational algebra over them.

A relation is a plain ``frozenset`` of ``(event_id, event_id)`` pairs.  All
operations are pure functions; graphs are immutable once built.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import AbstractSet, Iterable, Iterator, Mapping, Sequence

Relation = frozenset  # frozenset[tuple[int, int]]

EMPTY: Relation = frozenset()


class Kind(str, Enum):
    R = "R"
    W = "W"
    U = "U"
    RL = "RL"
    RU = "RU"
    WL = "WL"
    WU = "WU"
    PL = "PL"

    def __str__(self) -> str:
        return self.value


READ_KINDS = frozenset({Kind.R, Kind.U})
WRITE_KINDS = frozenset({Kind.W, Kind.U})
LOCK_KINDS = frozenset({Kind.RL, Kind.RU, Kind.WL, Kind.WU, Kind.PL})
WRITER_LOCK_KINDS = frozenset({Kind.WL, Kind.WU, Kind.PL})
READER_LOCK_KINDS = frozenset({Kind.RL, Kind.RU})


class GraphError(ValueError):
    """Raised for malformed execution graphs."""


@dataclass(frozen=True, order=True)
class Event:
    id: int
    tid: int
    txid: int
    kind: Kind
    loc: str
    rval: int | None = None
    wval: int | None = None

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.txid and kind not in (Kind.R, Kind.W):
            raise GraphError(f"event {self.id}: transactional events must be R or W, got {kind}")
        if kind in LOCK_KINDS and (self.rval is not None or self.wval is not None):
            raise GraphError(f"event {self.id}: lock events carry no values")
        if kind in READ_KINDS and self.rval is None:
            raise GraphError(f"event {self.id}: {kind} needs a read value")
        if kind in WRITE_KINDS and self.wval is None:
            raise GraphError(f"event {self.id}: {kind} needs a written value")

    @property
    def is_read(self) -> bool:
        return self.kind in READ_KINDS

    @property
    def is_write(self) -> bool:
        return self.kind in WRITE_KINDS

    @property
    def is_lock(self) -> bool:
        return self.kind in LOCK_KINDS

    @property
    def is_init(self) -> bool:
        return self.tid == 0

    def label(self) -> str:
        if self.kind == Kind.R:
            return f"R {self.loc} {self.rval}"
        if self.kind == Kind.W:
            return f"W {self.loc} {self.wval}"
        if self.kind == Kind.U:
            return f"U {self.loc} {self.rval} {self.wval}"
        return f"{self.kind} {self.loc}"


# ---------------------------------------------------------------------------
# Relational algebra
# ---------------------------------------------------------------------------


def _index(nodes: Iterable[int]) -> tuple[list[int], dict[int, int]]:
    order = sorted(set(nodes))
    return order, {n: i for i, n in enumerate(order)}


def _nodes(r: AbstractSet[tuple[int, int]]) -> set[int]:
    out: set[int] = set()
    for a, b in r:
        out.add(a)
        out.add(b)
    return out


def _to_bits(r: AbstractSet[tuple[int, int]], pos: Mapping[int, int], n: int) -> list[int]:
    rows = [0] * n
    for a, b in r:
        rows[pos[a]] |= 1 << pos[b]
    return rows


def _close_bits(rows: list[int]) -> list[int]:
    rows = list(rows)
    n = len(rows)
    for k in range(n):
        bit = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return rows


def _from_bits(rows: Sequence[int], order: Sequence[int]) -> Relation:
    out = []
    for i, row in enumerate(rows):
        a = order[i]
        j = 0
        while row:
            if row & 1:
                out.append((a, order[j]))
            row >>= 1
            j += 1
    return frozenset(out)


def compose(r1: AbstractSet[tuple[int, int]], r2: AbstractSet[tuple[int, int]]) -> Relation:
    """Left composition ``r1 ; r2``."""
    succ: dict[int, list[int]] = {}
    for a, b in r2:
        succ.setdefault(a, []).append(b)
    return frozenset((a, c) for a, b in r1 for c in succ.get(b, ()))


def inverse(r: AbstractSet[tuple[int, int]]) -> Relation:
    return frozenset((b, a) for a, b in r)


def identity_on(ids: Iterable[int]) -> Relation:
    return frozenset((i, i) for i in ids)


def restrict(r: AbstractSet[tuple[int, int]], ids: AbstractSet[int]) -> Relation:
    """``r`` restricted to pairs with both endpoints in ``ids``."""
    return frozenset((a, b) for a, b in r if a in ids and b in ids)


def guard(dom: AbstractSet[int] | None, r: AbstractSet[tuple[int, int]], cod: AbstractSet[int] | None) -> Relation:
    """``[dom] ; r ; [cod]``; ``None`` means no restriction on that side."""
    return frozenset(
        (a, b) for a, b in r if (dom is None or a in dom) and (cod is None or b in cod)
    )


def trans_closure(r: AbstractSet[tuple[int, int]]) -> Relation:
    if not r:
        return EMPTY
    order, pos = _index(_nodes(r))
    return _from_bits(_close_bits(_to_bits(r, pos, len(order))), order)


def refl_closure(r: AbstractSet[tuple[int, int]], domain: Iterable[int]) -> Relation:
    return frozenset(r) | identity_on(domain)


def refl_trans_closure(r: AbstractSet[tuple[int, int]], domain: Iterable[int]) -> Relation:
    return trans_closure(r) | identity_on(domain)


def irreflexive(r: AbstractSet[tuple[int, int]]) -> bool:
    return all(a != b for a, b in r)


def acyclic(r: AbstractSet[tuple[int, int]]) -> bool:
    return find_cycle(r) is None


def find_cycle(r: AbstractSet[tuple[int, int]]) -> list[int] | None:
    """Return the node sequence of some cycle of ``r`` (first node not repeated), or None."""
    succ: dict[int, list[int]] = {}
    for a, b in sorted(r):
        succ.setdefault(a, []).append(b)
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict[int, int] = {}
    for root in sorted(succ):
        if colour.get(root, WHITE) != WHITE:
            continue
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(succ.get(root, ())))]
        path = [root]
        colour[root] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                colour[node] = BLACK
                continue
            c = colour.get(nxt, WHITE)
            if c == GREY:
                return path[path.index(nxt):]
            if c == WHITE:
                colour[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return None


def is_cycle_of(cycle: Sequence[int], r: AbstractSet[tuple[int, int]]) -> bool:
    """Re-check a witness: consecutive nodes (wrapping around) are related by ``r``."""
    if not cycle:
        return False
    return all((cycle[i], cycle[(i + 1) % len(cycle)]) in r for i in range(len(cycle)))


def imm(r: AbstractSet[tuple[int, int]]) -> Relation:
    """Immediate edges of a strict partial order."""
    if not acyclic(r):
        raise ValueError("imm is only defined for strict partial orders; relation is cyclic")
    r = trans_closure(r)
    return frozenset(r - compose(r, r))


def domain(r: AbstractSet[tuple[int, int]]) -> frozenset[int]:
    return frozenset(a for a, _ in r)


def codomain(r: AbstractSet[tuple[int, int]]) -> frozenset[int]:
    return frozenset(b for _, b in r)


# ---------------------------------------------------------------------------
# Execution graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExecutionGraph:
    events: tuple[Event, ...]
    po: Relation = EMPTY
    rf: Relation = EMPTY
    mo: Relation = EMPTY
    lo: Relation = EMPTY
    meta: Mapping[str, object] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.id)))
        for name in ("po", "rf", "mo", "lo"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))

    @cached_property
    def by_id(self) -> dict[int, Event]:
        return {e.id: e for e in self.events}

    @cached_property
    def ids(self) -> frozenset[int]:
        return frozenset(e.id for e in self.events)

    def ids_where(self, pred) -> frozenset[int]:
        return frozenset(e.id for e in self.events if pred(e))

    @cached_property
    def init(self) -> frozenset[int]:
        return self.ids_where(lambda e: e.tid == 0)

    @cached_property
    def reads(self) -> frozenset[int]:
        return self.ids_where(lambda e: e.is_read)

    @cached_property
    def writes(self) -> frozenset[int]:
        return self.ids_where(lambda e: e.is_write)

    @cached_property
    def updates(self) -> frozenset[int]:
        return self.reads & self.writes

    @cached_property
    def lock_events(self) -> frozenset[int]:
        return self.ids_where(lambda e: e.is_lock)

    def of_kind(self, *kinds: Kind) -> frozenset[int]:
        ks = set(kinds)
        return self.ids_where(lambda e: e.kind in ks)

    @cached_property
    def transactional(self) -> frozenset[int]:
        return self.ids_where(lambda e: e.txid != 0)

    @cached_property
    def nt(self) -> frozenset[int]:
        return self.ids - self.transactional

    def loc(self, eid: int) -> str:
        return self.by_id[eid].loc

    @cached_property
    def locations(self) -> tuple[str, ...]:
        return tuple(sorted({e.loc for e in self.events if not e.is_lock}))

    @cached_property
    def fr(self) -> Relation:
        return derived_fr(self)

    @cached_property
    def st(self) -> Relation:
        return same_transaction(self)

    def rf_source(self, read: int) -> int | None:
        for w, r in self.rf:
            if r == read:
                return w
        return None

    def describe(self) -> str:
        lines = [f"{e.id}: t{e.tid} tx{e.txid} {e.label()}" for e in self.events]
        for name in ("rf", "mo", "lo"):
            pairs = sorted(getattr(self, name))
            if pairs:
                lines.append(f"{name}: " + " ".join(f"{a}->{b}" for a, b in pairs))
        return "\n".join(lines)


def same_loc(r: AbstractSet[tuple[int, int]], g: ExecutionGraph) -> Relation:
    """Per-location projection ``r|loc``."""
    by = g.by_id
    return frozenset((a, b) for a, b in r if by[a].loc == by[b].loc)


restrict_same_loc = same_loc


restrict_same_loc = same_loc


def derived_fr(g: ExecutionGraph) -> Relation:
    """Reads-before: ``(rf^-1 ; mo) \\ id``."""
    return frozenset((a, b) for a, b in compose(inverse(g.rf), g.mo) if a != b)


def same_transaction(g: ExecutionGraph) -> Relation:
    """Equivalence pairing events with equal nonzero transaction ids."""
    classes: dict[int, list[int]] = {}
    for e in g.events:
        if e.txid:
            classes.setdefault(e.txid, []).append(e.id)
    return frozenset((a, b) for members in classes.values() for a in members for b in members)


def tlift(r: AbstractSet[tuple[int, int]], st: AbstractSet[tuple[int, int]]) -> Relation:
    """Lift ``r`` to transaction classes: ``st ; (r \\ st) ; st``."""
    return compose(compose(st, frozenset(r) - st), st)


def tin(r: AbstractSet[tuple[int, int]], st: AbstractSet[tuple[int, int]]) -> Relation:
    return frozenset(r) & st


def tout(r: AbstractSet[tuple[int, int]], st: AbstractSet[tuple[int, int]]) -> Relation:
    return frozenset(r) - st


def thread_order(g: ExecutionGraph, tid: int) -> list[int]:
    """Events of thread ``tid`` sorted by po."""
    ids = [e.id for e in g.events if e.tid == tid]
    return sorted(ids, key=lambda i: sum(1 for j in ids if (j, i) in g.po))


_LOCK_TRACE = re.compile(r"(?:(?:RL RU |WL WU |RL PL WU ))*")
_LOCK_PREFIXES = ("", "RL ", "WL ", "RL PL ")


def lock_sequence_wellformed(kinds: Sequence[Kind | str]) -> bool:
    """Whether ``kinds`` is a prefix of a word in ``(RL RU | WL WU | RL PL WU)*``."""
    text = "".join(f"{Kind(k).value} " for k in kinds)
    m = _LOCK_TRACE.match(text)
    rest = text[m.end():] if m else text
    return rest in _LOCK_PREFIXES


def lock_trace_wellformed(g: ExecutionGraph) -> bool:
    by_thread: dict[tuple[int, str], list[Event]] = {}
    for e in g.events:
        if e.is_lock:
            by_thread.setdefault((e.tid, e.loc), []).append(e)
    for (tid, _), evs in by_thread.items():
        order = thread_order(g, tid)
        evs.sort(key=lambda e: order.index(e.id))
        if not lock_sequence_wellformed([e.kind for e in evs]):
            return False
    return True


def wellformedness_issues(g: ExecutionGraph) -> list[str]:
    """List violations of the structural invariants of execution graphs."""
    issues: list[str] = []
    by = g.by_id
    if len(by) != len(g.events):
        issues.append("duplicate event ids")
    for name in ("po", "rf", "mo", "lo"):
        for a, b in getattr(g, name):
            if a not in by or b not in by:
                issues.append(f"{name} edge ({a},{b}) references unknown event")
    if issues:
        return issues

    # po: per-thread strict total orders plus init-before-all
    threads = sorted({e.tid for e in g.events if e.tid != 0})
    expected_po = set()
    for a in g.init:
        for e in g.events:
            if e.tid != 0:
                expected_po.add((a, e.id))
    for tid in threads:
        ids = [e.id for e in g.events if e.tid == tid]
        for a in ids:
            for b in ids:
                if a != b and (a, b) not in g.po and (b, a) not in g.po:
                    issues.append(f"po does not order events {a} and {b} of thread {tid}")
    intra = {(a, b) for a, b in g.po if by[a].tid == by[b].tid != 0}
    if not irreflexive(g.po) or not acyclic(g.po):
        issues.append("po is not a strict order")
    if trans_closure(g.po) != g.po:
        issues.append("po is not transitive")
    if set(g.po) - intra - expected_po:
        issues.append("po relates events of different threads")
    if expected_po - set(g.po):
        issues.append("initialisation events are not po-before all others")

    # rf: total, functional, same location, matching values
    sources: dict[int, list[int]] = {}
    for w, r in g.rf:
        ew, er = by[w], by[r]
        if not ew.is_write or not er.is_read:
            issues.append(f"rf edge ({w},{r}) is not write-to-read")
            continue
        if ew.loc != er.loc:
            issues.append(f"rf edge ({w},{r}) crosses locations")
        if ew.wval != er.rval:
            issues.append(f"rf edge ({w},{r}) has mismatched values")
        sources.setdefault(r, []).append(w)
    for r in g.reads:
        n = len(sources.get(r, ()))
        if n != 1:
            issues.append(f"read {r} has {n} rf sources")

    # mo: per-location strict total order over writes
    for a, b in g.mo:
        if a == b or by[a].loc != by[b].loc or not by[a].is_write or not by[b].is_write:
            issues.append(f"mo edge ({a},{b}) is not between distinct same-location writes")
    if trans_closure(g.mo) != g.mo:
        issues.append("mo is not transitive")
    ws = sorted(g.writes)
    for i, a in enumerate(ws):
        for b in ws[i + 1:]:
            if by[a].loc == by[b].loc and ((a, b) in g.mo) == ((b, a) in g.mo):
                issues.append(f"mo does not totally order writes {a} and {b}")

    # lo: per-location strict order over lock events
    for a, b in g.lo:
        if not by[a].is_lock or not by[b].is_lock or by[a].loc != by[b].loc:
            issues.append(f"lo edge ({a},{b}) is not between same-location lock events")
    if not acyclic(g.lo) or trans_closure(g.lo) != g.lo:
        issues.append("lo is not a strict (transitive, irreflexive) order")

    # transactions are po-contiguous
    for tid in threads:
        order = thread_order(g, tid)
        seen_closed: set[int] = set()
        current = None
        for eid in order:
            tx = by[eid].txid
            if tx != current:
                if current:
                    seen_closed.add(current)
                if tx and tx in seen_closed:
                    issues.append(f"transaction {tx} is not po-contiguous")
                current = tx
    tx_threads: dict[int, set[int]] = {}
    for e in g.events:
        if e.txid:
            tx_threads.setdefault(e.txid, set()).add(e.tid)
    for tx, tids in tx_threads.items():
        if len(tids) > 1:
            issues.append(f"transaction {tx} spans threads {sorted(tids)}")
    return issues


def check_wellformed(g: ExecutionGraph) -> None:
    issues = wellformedness_issues(g)
    if issues:
        raise GraphError("; ".join(issues))


def build_po(events: Iterable[Event]) -> Relation:
    """po from event ids: per-thread id order, with initialisation events first."""
    events = list(events)
    init = [e.id for e in events if e.tid == 0]
    by_thread: dict[int, list[int]] = {}
    for e in sorted(events, key=lambda e: e.id):
        if e.tid:
            by_thread.setdefault(e.tid, []).append(e.id)
    pairs = [(i, e.id) for i in init for e in events if e.tid]
    for ids in by_thread.values():
        pairs.extend((a, b) for k, a in enumerate(ids) for b in ids[k + 1:])
    return frozenset(pairs)


def to_dot(g: ExecutionGraph, cycle: Sequence[int] | None = None) -> str:
    """Graphviz rendering with immediate po/mo/lo edges; ``cycle`` edges drawn bold red."""
    on_cycle = set()
    if cycle:
        on_cycle = {(a, b) for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]])}
    lines = ["digraph execution {", "  node [shape=box, fontname=monospace];"]
    by_tx: dict[int, list[Event]] = {}
    for e in g.events:
        by_tx.setdefault(e.txid, []).append(e)
    for tx, evs in sorted(by_tx.items()):
        indent = "  "
        if tx:
            lines.append(f"  subgraph cluster_tx{tx} {{ label=\"T{tx}\"; style=dashed;")
            indent = "    "
        for e in evs:
            lines.append(f'{indent}e{e.id} [label="{e.id}: {e.label()}"];')
        if tx:
            lines.append("  }")
    styles = {"po": "black", "rf": "darkgreen", "mo": "blue", "fr": "orange", "lo": "purple"}
    for name, rel in (("po", imm(g.po)), ("rf", g.rf), ("mo", imm(g.mo)), ("fr", g.fr), ("lo", imm(g.lo))):
        for a, b in sorted(rel):
            extra = ", penwidth=2.5, color=red" if (a, b) in on_cycle else f", color={styles[name]}"
            lines.append(f'  e{a} -> e{b} [label="{name}"{extra}];')
    for a, b in sorted(on_cycle):
        lines.append(f'  e{a} -> e{b} [style=dashed, color=red, constraint=false];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON exchange format
# ---------------------------------------------------------------------------


def to_json_obj(g: ExecutionGraph) -> dict:
    return {
        "events": [
            {
                "id": e.id,
                "tid": e.tid,
                "txid": e.txid,
                "kind": e.kind.value,
                "loc": e.loc,
                "rval": e.rval,
                "wval": e.wval,
            }
            for e in g.events
        ],
        "po": sorted([a, b] for a, b in g.po),
        "rf": sorted([a, b] for a, b in g.rf),
        "mo": sorted([a, b] for a, b in g.mo),
        "lo": sorted([a, b] for a, b in g.lo),
    }


def to_json(g: ExecutionGraph, indent: int | None = 1) -> str:
    return json.dumps(to_json_obj(g), indent=indent)


def from_json_obj(obj: Mapping) -> ExecutionGraph:
    """Parse the exchange format; po/mo/lo may be given as generating edges and are closed."""
    try:
        events = tuple(
            Event(
                id=int(ev["id"]),
                tid=int(ev["tid"]),
                txid=int(ev.get("txid", 0)),
                kind=Kind(ev["kind"]),
                loc=str(ev["loc"]),
                rval=ev.get("rval"),
                wval=ev.get("wval"),
            )
            for ev in obj["events"]
        )

        def rel(name: str) -> Relation:
            return frozenset((int(a), int(b)) for a, b in obj.get(name, ()))

        po = rel("po")
        if not po:
            po = build_po(events)
        g = ExecutionGraph(
            events=events,
            po=trans_closure(po),
            rf=rel("rf"),
            mo=trans_closure(rel("mo")),
            lo=trans_closure(rel("lo")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc
    check_wellformed(g)
    return g


def from_json(text: str) -> ExecutionGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    return from_json_obj(obj)
