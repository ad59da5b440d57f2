"""Lock-based transaction implementations as program-to-program translations.

Each transaction block becomes plain accesses plus abstract MRSW lock
operations on ``<loc>.lock``.  Snapshot and commit bookkeeping lives in
thread-local registers prefixed ``_t<n>_`` (``n`` numbers transactions per
thread), so it never shows up in outcomes.  Lock acquisition order is
lexicographic on location names, and promotion is blocking.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .litmus import (
    Assign,
    Assume,
    Expr,
    LockOp,
    Program,
    ReadTo,
    Stmt,
    Thread,
    TxBlock,
    WriteFrom,
    with_declared,
)


class ImplVariant(str, Enum):
    EAGER_SI = "EAGER_SI"
    LAZY_SI = "LAZY_SI"
    EAGER_RSI = "EAGER_RSI"
    LAZY_RSI = "LAZY_RSI"
    CAND_A = "CAND_A"
    CAND_B = "CAND_B"
    CAND_C = "CAND_C"

    @classmethod
    def parse(cls, name: str) -> "ImplVariant":
        key = name.strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(v.value.lower().replace("_", "-") for v in cls)
            raise ValueError(f"unknown implementation {name!r}; expected one of {names}") from None

    @property
    def cli_name(self) -> str:
        return self.value.lower().replace("_", "-")


def lock_of(loc: str) -> str:
    return f"{loc}.lock"


@dataclass(frozen=True)
class AccessSets:
    read_set: tuple[str, ...]
    write_set: tuple[str, ...]

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.read_set) | set(self.write_set)))


def extract_access_sets(tx: TxBlock) -> AccessSets:
    """R holds locations read before any write to them in the block; W the written ones."""
    reads: set[str] = set()
    writes: set[str] = set()
    for s in tx.body:
        if isinstance(s, ReadTo) and s.loc not in writes:
            reads.add(s.loc)
        elif isinstance(s, WriteFrom):
            writes.add(s.loc)
    return AccessSets(tuple(sorted(reads)), tuple(sorted(writes)))


class _Names:
    def __init__(self, n: int):
        self.prefix = f"_t{n}_"
        self.k = 0

    def snap(self, loc: str) -> str:
        return f"{self.prefix}s_{_safe(loc)}"

    def check(self, loc: str) -> str:
        return f"{self.prefix}c_{_safe(loc)}"

    def first(self, loc: str) -> str:
        return f"{self.prefix}r_{_safe(loc)}"

    def fresh(self) -> str:
        self.k += 1
        return f"{self.prefix}w{self.k}"


def _safe(loc: str) -> str:
    return "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in loc)


def _locks(op: str, locs) -> list[Stmt]:
    return [LockOp(op, lock_of(x)) for x in locs]


def _snapshot(rs, names: _Names, twice: bool) -> list[Stmt]:
    out: list[Stmt] = [ReadTo(names.snap(x), x) for x in rs]
    if twice:
        for x in rs:
            out.append(ReadTo(names.check(x), x))
            out.append(Assume("==", names.check(x), Expr(names.snap(x))))
    return out


def _local_body(tx: TxBlock, names: _Names) -> list[Stmt]:
    """Reads served from the snapshot; writes in place and mirrored into it."""
    out: list[Stmt] = []
    for s in tx.body:
        if isinstance(s, ReadTo):
            out.append(Assign(s.reg, Expr(names.snap(s.loc))))
        else:
            out.append(s)
            out.append(Assign(names.snap(s.loc), s.expr))
    return out


def _eager(tx: TxBlock, names: _Names, rsi: bool) -> list[Stmt]:
    sets = extract_access_sets(tx)
    r, w = sets.read_set, sets.write_set
    out = _locks("lock_r", sets.order)
    out += _snapshot(r, names, twice=rsi)
    out += _locks("unlock_r", [x for x in r if x not in w])
    out += _locks("promote", w)
    out += _local_body(tx, names)
    out += _locks("unlock_w", w)
    return out


def _lazy_si(tx: TxBlock, names: _Names) -> list[Stmt]:
    seen: set[str] = set()
    reads: set[str] = set()
    writes: set[str] = set()
    out: list[Stmt] = []
    for s in tx.body:
        if s.loc not in seen:
            seen.add(s.loc)
            out.append(LockOp("lock_r", lock_of(s.loc)))
            if isinstance(s, ReadTo):
                reads.add(s.loc)
                out.append(ReadTo(names.snap(s.loc), s.loc))
        if isinstance(s, ReadTo):
            out.append(Assign(s.reg, Expr(names.snap(s.loc))))
        else:
            writes.add(s.loc)
            out.append(Assign(names.snap(s.loc), s.expr))
    w = sorted(writes)
    out += _locks("unlock_r", sorted(reads - writes))
    out += _locks("promote", w)
    out += [WriteFrom(x, Expr(names.snap(x))) for x in w]
    out += _locks("unlock_w", w)
    return out


def _lazy_rsi(tx: TxBlock, names: _Names) -> list[Stmt]:
    seen: set[str] = set()
    reads: set[str] = set()
    writes: set[str] = set()
    wseq: list[tuple[str, str]] = []
    out: list[Stmt] = []
    for s in tx.body:
        if s.loc not in seen:
            seen.add(s.loc)
            out.append(LockOp("lock_r", lock_of(s.loc)))
            if isinstance(s, ReadTo):
                reads.add(s.loc)
                out.append(ReadTo(names.first(s.loc), s.loc))
                out.append(Assign(names.check(s.loc), Expr(names.first(s.loc))))
        if isinstance(s, ReadTo):
            out.append(Assign(s.reg, Expr(names.check(s.loc))))
        else:
            writes.add(s.loc)
            out.append(Assign(names.check(s.loc), s.expr))
            slot = names.fresh()
            out.append(Assign(slot, s.expr))
            wseq.append((s.loc, slot))
    for x in sorted(reads):
        again = names.snap(x)
        out.append(ReadTo(again, x))
        out.append(Assume("==", again, Expr(names.first(x))))
    out += _locks("unlock_r", sorted(reads - writes))
    out += _locks("promote", sorted(writes))
    out += [WriteFrom(x, Expr(slot)) for x, slot in wseq]
    out += _locks("unlock_w", sorted(writes))
    return out


def _candidate(tx: TxBlock, names: _Names, which: str) -> list[Stmt]:
    sets = extract_access_sets(tx)
    r, w = sets.read_set, sets.write_set
    if which == "a":
        out = _locks("lock_r", r) + _snapshot(r, names, False) + _locks("unlock_r", r)
        out += _locks("lock_w", w)
    elif which == "b":
        r_only = [x for x in r if x not in w]
        out = _locks("lock_w", w) + _locks("lock_r", r_only)
        out += _snapshot(r, names, False) + _locks("unlock_r", r_only)
    else:
        out = _locks("lock_r", sets.order) + _snapshot(r, names, False)
        for x in sets.order:
            out.append(LockOp("promote" if x in w else "unlock_r", lock_of(x)))
    out += _local_body(tx, names)
    out += _locks("unlock_w", w)
    return out


def translate_tx(tx: TxBlock, v: ImplVariant, n: int = 1) -> list[Stmt]:
    names = _Names(n)
    if v is ImplVariant.EAGER_SI:
        return _eager(tx, names, rsi=False)
    if v is ImplVariant.EAGER_RSI:
        return _eager(tx, names, rsi=True)
    if v is ImplVariant.LAZY_SI:
        return _lazy_si(tx, names)
    if v is ImplVariant.LAZY_RSI:
        return _lazy_rsi(tx, names)
    return _candidate(tx, names, v.value[-1].lower())


def translate(p: Program, v: ImplVariant | str) -> Program:
    """Replace every transaction block by ``v``'s protocol; NT code is untouched."""
    if not isinstance(v, ImplVariant):
        v = ImplVariant.parse(v)
    if not p.has_transactions:
        return p
    threads = []
    for t in p.threads:
        body: list[Stmt] = []
        n = 0
        for s in t.body:
            if isinstance(s, TxBlock):
                n += 1
                body.extend(translate_tx(s, v, n))
            else:
                body.append(s)
        threads.append(Thread(t.name, tuple(body)))
    return with_declared(Program(tuple(threads), p.declared))


# ---------------------------------------------------------------------------
# Mixed-mode helpers
# ---------------------------------------------------------------------------


def maximal_nt_blocks(p: Program) -> Iterator[tuple[int, int, int]]:
    """``(thread index, start, end)`` spans of maximal runs of NT reads/writes."""
    for ti, t in enumerate(p.threads):
        start = None
        for i, s in enumerate(t.body):
            plain = isinstance(s, (ReadTo, WriteFrom))
            if plain and start is None:
                start = i
            if not plain and start is not None:
                yield ti, start, i
                start = None
        if start is not None:
            yield ti, start, len(t.body)


def wrap(p: Program, thread_index: int, start: int, end: int) -> Program:
    """Wrap ``body[start:end]`` of one thread in a transaction."""
    threads = list(p.threads)
    t = threads[thread_index]
    body = t.body[:start] + (TxBlock(tuple(t.body[start:end])),) + t.body[end:]
    threads[thread_index] = Thread(t.name, body)
    return Program(tuple(threads), p.declared)


def check_rsi_side_condition(p: Program, max_events: int = 64) -> bool:
    """NT writes of one value to one location are unique or hb-ordered with every transaction touching it.

    Decided by enumerating the RSI-consistent graphs of ``p``.  A transaction
    counts as ordered with a write when all of its events are rsi-hb-before
    the write or the write is rsi-hb-before all of them.
    """
    from .consistency import rsi_hb
    from .enumeration import enumerate_consistent

    for g in enumerate_consistent(p, "rsi", max_events=max_events, workers=1):
        hb = rsi_hb(g)
        groups: dict[tuple[str, int], list[int]] = {}
        for e in g.events:
            if e.is_write and e.txid == 0 and not e.is_init:
                groups.setdefault((e.loc, e.wval), []).append(e.id)
        txs: dict[int, list[int]] = {}
        for e in g.events:
            if e.txid:
                txs.setdefault(e.txid, []).append(e.id)
        for (loc, _), ws in groups.items():
            if len(ws) < 2:
                continue
            for members in txs.values():
                if not any(g.by_id[m].loc == loc for m in members):
                    continue
                for w in ws:
                    before = all((m, w) in hb for m in members)
                    after = all((w, m) in hb for m in members)
                    if not (before or after):
                        return False
    return True


__all__ = [
    "AccessSets",
    "ImplVariant",
    "check_rsi_side_condition",
    "extract_access_sets",
    "lock_of",
    "maximal_nt_blocks",
    "translate",
    "translate_tx",
    "wrap",
]
