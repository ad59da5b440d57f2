from __future__ import annotations

import json

import pytest

from silab import corpus
from silab.enumeration import enumerate_consistent, skeleton
from silab.graph import Kind, lock_trace_wellformed
from silab.litmus import CasLoop, FaaBy, LockOp, Program, ReadTo, Thread, WriteFrom, parse_program
from silab.mrsw import (
    AXIOMS,
    LockImpl,
    LockImplKind,
    abstract_graph,
    cell_of,
    derive_lo,
    expand_lock_ops,
    expansions,
    spin_loops,
    verify_lock_axioms,
)


def client(name):
    return corpus.load("locks", name).program


def single(*ops):
    return Program((Thread("A", tuple(LockOp(op, "l") for op in ops)),), ("l",))


def graphs_of(p, impl):
    for exp in expansions(p, impl):
        for g in enumerate_consistent(exp.program, "ra", workers=1):
            yield exp, g


# --- expansion ---------------------------------------------------------------


def test_full_sync_lock_w_is_one_cas():
    exp = expand_lock_ops(single("lock_w", "unlock_w"), "full-sync")
    (a, b) = exp.program.threads[0].body
    assert isinstance(a, CasLoop) and (a.loc, a.expect.const, a.new.const) == ("l", 0, 1)
    assert isinstance(b, WriteFrom) and b.expr.const == 0 and b.expr.reg is None
    sk = skeleton(exp.program)
    kinds = [sk.kinds[i][2] for i in sk.threads[0].event_ids]
    assert kinds == [Kind.U, Kind.W]


def test_full_sync_unlock_r_is_faa():
    exp = expand_lock_ops(single("lock_r", "unlock_r"), "full-sync")
    assert isinstance(exp.program.threads[0].body[-1], FaaBy)


def test_write_sync_readers_touch_disjoint_cells():
    exp = expand_lock_ops(client("two_readers"), "write-sync")
    touched = []
    for t in exp.program.threads:
        touched.append({s.loc for s in t.body if isinstance(s, (CasLoop, WriteFrom, ReadTo)) and s.loc.startswith("l[")})
    assert touched == [{cell_of("l", 0)}, {cell_of("l", 1)}]


def test_spin_bound_adds_failed_iterations():
    p = client("two_writers")
    assert spin_loops(p, LockImpl("FULL_SYNC")) == 2
    assert len(list(expansions(p, LockImpl("FULL_SYNC", 2)))) == 4
    longest = max(expansions(p, LockImpl("FULL_SYNC", 2)), key=lambda e: sum(len(t.body) for t in e.program.threads))
    assert sum(len(t.body) for t in longest.program.threads) > sum(
        len(t.body) for t in expand_lock_ops(p, "full-sync").program.threads
    )


def test_spin_bound_validated():
    with pytest.raises(ValueError):
        LockImpl("FULL_SYNC", 0)


def test_transactional_client_rejected():
    with pytest.raises(ValueError):
        expand_lock_ops(corpus.load("fig1", "lu").program, "full-sync")


# --- derived lock order ----------------------------------------------------------


@pytest.mark.parametrize("kind", list(LockImplKind))
def test_sequential_writer_sections_follow_po(kind):
    p = single("lock_w", "unlock_w", "lock_w", "unlock_w")
    for exp, g in graphs_of(p, LockImpl(kind)):
        lo = derive_lo(g, exp)
        assert set(lo) == {(i, j) for i in range(4) for j in range(4) if i < j}


def test_writer_then_reader_ordered_by_release():
    # thread A reads under lock_r, thread B writes under lock_w
    p = client("reader_writer")
    seen = 0
    for exp, g in graphs_of(p, LockImpl("FULL_SYNC")):
        ops = [s.op for s in exp.spans]
        rl, wl, wu = ops.index("lock_r"), ops.index("lock_w"), ops.index("unlock_w")
        (release,) = [e.id for e in g.events if e.tid == 2 and e.kind is Kind.W and e.loc == "l"]
        # lock_r's CAS comes before unlock_r's FAA
        acquire = min(e.id for e in g.events if e.tid == 1 and e.kind is Kind.U and e.loc == "l")
        if (release, acquire) in g.rf:
            seen += 1
            lo = derive_lo(g, exp)
            assert (wl, rl) in lo and (wu, rl) in lo
    assert seen


@pytest.mark.parametrize("name", [e.name for e in corpus.entries("locks")])
def test_full_sync_lo_total_per_lock(name):
    p = client(name)
    for exp, g in graphs_of(p, LockImpl("FULL_SYNC")):
        lo = derive_lo(g, exp)
        spans = exp.spans
        for i, a in enumerate(spans):
            for j, b in enumerate(spans):
                if i < j and a.lock == b.lock:
                    assert (i, j) in lo or (j, i) in lo


@pytest.mark.parametrize("name", [e.name for e in corpus.entries("locks")])
def test_write_sync_lo_total_over_writer_pairs(name):
    p = client(name)
    for exp, g in graphs_of(p, LockImpl("WRITE_SYNC")):
        lo = derive_lo(g, exp)
        assert not any((j, i) in lo for i, j in lo)
        spans = exp.spans
        for i, a in enumerate(spans):
            for j, b in enumerate(spans):
                writerish = a.op in ("lock_w", "unlock_w", "promote") or b.op in ("lock_w", "unlock_w", "promote")
                if i < j and a.lock == b.lock and writerish:
                    assert (i, j) in lo or (j, i) in lo


@pytest.mark.parametrize("kind", list(LockImplKind))
def test_abstract_graphs_have_wellformed_lock_traces(kind):
    for name in ("promote_reader", "three_threads", "two_locks"):
        for exp, g in graphs_of(client(name), LockImpl(kind)):
            ag = abstract_graph(g, exp, derive_lo(g, exp))
            assert lock_trace_wellformed(ag)


# --- verification ------------------------------------------------------------------


def test_two_writers_full_sync_mutual_exclusion():
    rep = verify_lock_axioms(client("two_writers"), LockImpl("FULL_SYNC", 2))
    assert rep.executions and rep.all_hold("WEx")


def test_two_readers_write_sync_unordered():
    rep = verify_lock_axioms(client("two_readers"), LockImpl("WRITE_SYNC", 1))
    assert rep.reader_unordered_executions > 0
    assert not rep.all_hold("RSync")
    assert rep.ok


@pytest.mark.parametrize("kind", list(LockImplKind))
def test_single_promote_all_axioms(kind):
    p = parse_program("locations l\nthread A\n  lock_r l\n  promote l\n  unlock_w l\n")
    rep = verify_lock_axioms(p, LockImpl(kind, 2))
    assert rep.executions
    assert all(rep.all_hold(a) for a in AXIOMS)


def _keys(p, impl):
    out = set()
    for exp, g in graphs_of(p, impl):
        ag = abstract_graph(g, exp, derive_lo(g, exp))
        out.add((ag.events, ag.rf, ag.mo, ag.lo))
    return out


@pytest.mark.parametrize("kind", list(LockImplKind))
def test_stable_under_larger_spin_bound(kind):
    p = client("reader_writer")
    low, high = _keys(p, LockImpl(kind, 1)), _keys(p, LockImpl(kind, 2))
    assert low <= high
    r1 = verify_lock_axioms(p, LockImpl(kind, 1))
    r2 = verify_lock_axioms(p, LockImpl(kind, 2))
    assert r1.executions <= r2.executions
    assert all(r1.holds[a] <= r2.holds[a] for a in AXIOMS)


def test_report_json():
    rep = verify_lock_axioms(client("two_readers"), LockImpl("WRITE_SYNC", 1))
    obj = json.loads(rep.to_json())
    assert obj["impl"] == "WRITE_SYNC" and obj["executions"] == rep.executions
    assert len(obj["per_execution"]) == rep.executions
    assert set(obj["holds"]) == set(AXIOMS)
    assert "per_execution" not in rep.to_json_obj(details=False)
