from __future__ import annotations

import random

import pytest

from silab import corpus
from silab.consistency import (
    ModelId,
    ModelMismatch,
    check,
    ra_consistent,
    rsi_consistent,
    rsync_holds,
    si_consistent_axiomatic,
    si_consistent_hb,
    witness_relation_of,
)
from silab.enumeration import enumerate_candidates, enumerate_consistent
from silab.graph import Event, ExecutionGraph, Kind, build_po, is_cycle_of, trans_closure
from silab.litmus import parse_program
from silab.stm import translate


def ev(i, tid, kind, loc, val=None, tx=0):
    k = Kind(kind)
    if k is Kind.R:
        return Event(i, tid, tx, k, loc, val, None)
    if k is Kind.W:
        return Event(i, tid, tx, k, loc, None, val)
    return Event(i, tid, tx, k, loc)


def graph(events, rf=(), mo=(), lo=()):
    events = tuple(events)
    return ExecutionGraph(events, trans_closure(build_po(events)), frozenset(rf), trans_closure(mo), trans_closure(lo))


def outcome_graphs(suite, name, partial):
    p = corpus.load(suite, name).program
    return [g for g in enumerate_candidates(p) if g.meta["outcome"].matches(partial)]


LU_WEAK = {("T1", "a"): 0, ("T2", "b"): 0}
WS_WEAK = {("T1", "a"): 0, ("T2", "b"): 0}


# --- SI --------------------------------------------------------------------


def test_lost_update_graphs_are_si_inconsistent():
    gs = outcome_graphs("fig1", "lu", LU_WEAK)
    assert gs
    for g in gs:
        assert not si_consistent_axiomatic(g)
        assert not si_consistent_hb(g)


def test_write_skew_has_si_consistent_graph():
    gs = outcome_graphs("fig1", "ws", WS_WEAK)
    assert any(si_consistent_axiomatic(g) for g in gs)
    assert any(si_consistent_hb(g) for g in gs)


def test_write_skew_variant_has_si_consistent_graph():
    lf = corpus.load("fig1", "ws2")
    exp = next(x for x in lf.expectations if x.model == "si")
    gs = [g for g in enumerate_candidates(lf.program) if g.meta["outcome"].matches(exp.partial)]
    assert any(si_consistent_hb(g) for g in gs)


def test_single_transaction_reading_own_write():
    g = graph([ev(0, 0, "W", "x", 0), ev(1, 1, "W", "x", 1, tx=1), ev(2, 1, "R", "x", 1, tx=1)],
              rf={(1, 2)}, mo={(0, 1)})
    assert si_consistent_axiomatic(g) and si_consistent_hb(g)


def test_internal_read_from_outside_breaks_int():
    # reads the initial value despite its own earlier write
    g = graph([ev(0, 0, "W", "x", 0), ev(1, 1, "W", "x", 1, tx=1), ev(2, 1, "R", "x", 0, tx=1)],
              rf={(0, 2)}, mo={(0, 1)})
    v = si_consistent_axiomatic(g)
    assert not v and "int" in v.violated_axioms


def test_si_rejects_nt_events_and_updates():
    g = graph([ev(0, 0, "W", "x", 0), ev(1, 1, "W", "x", 1)], mo={(0, 1)})
    with pytest.raises(ModelMismatch):
        si_consistent_hb(g)


@pytest.mark.parametrize("model", list(ModelId))
def test_init_only_graph_consistent_everywhere(model):
    assert check(corpus.load_graph("init_only"), model)


def test_empty_transaction_set_consistent():
    g = graph([ev(0, 0, "W", "x", 0)])
    assert si_consistent_hb(g)


# --- RA and lock axioms -----------------------------------------------------


def test_interleaved_write_sections_violate_wex():
    g = graph(
        [ev(0, 1, "WL", "l"), ev(1, 1, "WU", "l"), ev(2, 2, "WL", "l"), ev(3, 2, "WU", "l")],
        lo={(0, 2), (2, 1), (1, 3)},
    )
    v = ra_consistent(g)
    assert not v and "WEx" in v.violated_axioms


def test_unordered_writer_violates_wsync():
    g = graph([ev(0, 1, "WL", "l"), ev(1, 1, "WU", "l"), ev(2, 2, "RL", "l"), ev(3, 2, "RU", "l")])
    assert "WSync" in ra_consistent(g).violated_axioms


def test_message_passing_violates_acyc():
    g = graph(
        [ev(0, 0, "W", "x", 0), ev(1, 0, "W", "y", 0), ev(2, 1, "W", "x", 1), ev(3, 1, "W", "y", 1),
         ev(4, 2, "R", "y", 1), ev(5, 2, "R", "x", 0)],
        rf={(3, 4), (0, 5)}, mo={(0, 2), (1, 3)},
    )
    v = ra_consistent(g)
    assert v.violated_axioms == ("Acyc",)
    assert is_cycle_of(list(v.witness_cycle), witness_relation_of(g, ModelId.RA))


def test_store_buffering_consistent():
    g = graph(
        [ev(0, 0, "W", "x", 0), ev(1, 0, "W", "y", 0), ev(2, 1, "W", "x", 1), ev(3, 1, "R", "y", 0),
         ev(4, 2, "W", "y", 1), ev(5, 2, "R", "x", 0)],
        rf={(1, 3), (0, 5)}, mo={(0, 2), (1, 4)},
    )
    assert ra_consistent(g)


def _readers(lo):
    return graph([ev(0, 1, "RL", "l"), ev(1, 1, "RU", "l"), ev(2, 2, "RL", "l"), ev(3, 2, "RU", "l")], lo=lo)


def test_rsync_unordered_readers():
    g = _readers(())
    assert not rsync_holds(g)
    assert ra_consistent(g)
    assert "RSync" in ra_consistent(g, rsync=True).violated_axioms


def test_rsync_total_order():
    assert rsync_holds(_readers({(0, 1), (1, 2), (2, 3)}))


def test_sbt_weak_outcome_needs_unsynchronised_readers():
    p = translate(corpus.load("fig1", "sbt").program, "eager-rsi")
    weak = {("T1", "b"): 0, ("T2", "d"): 0}
    gs = [g for g in enumerate_consistent(p, "ra") if g.meta["outcome"].matches(weak)]
    assert gs
    assert not any(rsync_holds(g) for g in gs)


def test_ra_rejects_transactions():
    g = graph([ev(0, 0, "W", "x", 0), ev(1, 1, "W", "x", 1, tx=1)], mo={(0, 1)})
    with pytest.raises(ModelMismatch):
        ra_consistent(g)


# --- RSI ---------------------------------------------------------------------


@pytest.mark.parametrize("name", ["fig6a", "fig6b", "fig6c"])
def test_example_graphs_are_rsi_inconsistent(name):
    g = corpus.load_graph(name)
    v = rsi_consistent(g)
    assert not v
    assert v.witness_cycle and is_cycle_of(list(v.witness_cycle), witness_relation_of(g, ModelId.RSI))


def test_sbt_weak_graph_rsi_consistent():
    gs = outcome_graphs("fig1", "sbt", {("T1", "b"): 0, ("T2", "d"): 0})
    assert any(rsi_consistent(g) for g in gs)


def test_mpt_weak_graph_rsi_inconsistent():
    gs = outcome_graphs("fig1", "mpt", {("T2", "a"): 1, ("T2", "b"): 0})
    assert gs and not any(rsi_consistent(g) for g in gs)


def test_rsi_rejects_locks():
    with pytest.raises(ModelMismatch):
        rsi_consistent(_readers(()))


# --- properties ---------------------------------------------------------------


def _load_buffering(tx: bool):
    t1, t2 = (1, 2) if tx else (0, 0)
    return graph(
        [ev(0, 0, "W", "x", 0), ev(1, 0, "W", "y", 0),
         ev(2, 1, "R", "x", 1, tx=t1), ev(3, 1, "W", "y", 1, tx=t1),
         ev(4, 2, "R", "y", 1, tx=t2), ev(5, 2, "W", "x", 1, tx=t2)],
        rf={(5, 2), (3, 4)}, mo={(0, 5), (1, 3)},
    )


@pytest.mark.parametrize("model", list(ModelId))
def test_po_rf_cycles_rejected(model):
    g = _load_buffering(tx=model in (ModelId.SI_AXIOMATIC, ModelId.SI_HB))
    v = check(g, model)
    assert not v
    assert is_cycle_of(list(v.witness_cycle), witness_relation_of(g, model))


@pytest.mark.parametrize("model", ["si", "si-axiomatic", "rsi"])
def test_witness_cycles_reverify_on_corpus(model):
    m = ModelId.parse(model)
    progs = corpus.si_programs()[:5] if m is not ModelId.RSI else corpus.mixed_programs()[:4]
    seen = 0
    for e in progs:
        for g in enumerate_candidates(e.load().program):
            v = check(g, m)
            assert bool(v) == (not v.violated_axioms)
            if v.witness_cycle:
                seen += 1
                assert is_cycle_of(list(v.witness_cycle), witness_relation_of(g, m))
    assert seen


def _lock_candidates():
    p = translate(corpus.load("fig1", "ws").program, "eager-si")
    return enumerate_candidates(p)


def test_witness_cycles_reverify_on_lock_graphs():
    seen = 0
    for g in _lock_candidates()[:400]:
        for m in (ModelId.RA, ModelId.RA_RSYNC):
            v = check(g, m)
            assert bool(v) == (not v.violated_axioms)
            if v.witness_cycle:
                seen += 1
                assert is_cycle_of(list(v.witness_cycle), witness_relation_of(g, m))
    assert seen


def _with_lo(g, lo):
    return ExecutionGraph(g.events, g.po, g.rf, g.mo, trans_closure(lo), g.meta)


def _random_lo_extension(g, rng):
    """Add a few same-lock pairs that keep lo acyclic."""
    by_loc: dict[str, list[int]] = {}
    for e in g.events:
        if e.is_lock:
            by_loc.setdefault(e.loc, []).append(e.id)
    lo = set(g.lo)
    for ids in by_loc.values():
        if len(ids) < 2:
            continue
        for _ in range(3):
            trial = trans_closure(lo | {tuple(rng.sample(ids, 2))})
            if all(x != y for x, y in trial):
                lo = set(trial)
    return lo


def test_adding_lo_never_repairs_acyc():
    rng = random.Random(7)
    broken = [g for g in _lock_candidates() if "Acyc" in ra_consistent(g).violated_axioms]
    assert broken
    for g in broken[:300]:
        h = _with_lo(g, _random_lo_extension(g, rng))
        assert "Acyc" in ra_consistent(h).violated_axioms


def test_dropping_reader_reader_lo_preserves_ra_consistency():
    p = parse_program(corpus.entry("locks", "two_readers").text)
    checked = 0
    for g in enumerate_consistent(p, "ra-rsync"):
        by = g.by_id
        kept = {(a, b) for a, b in g.lo if not (by[a].kind in (Kind.RL, Kind.RU) and by[b].kind in (Kind.RL, Kind.RU))}
        assert ra_consistent(_with_lo(g, kept))
        checked += 1
    assert checked


def test_adding_reader_reader_lo_never_repairs_ra():
    rng = random.Random(11)
    p = parse_program(corpus.entry("locks", "reader_writer").text)
    for g in enumerate_candidates(p)[:300]:
        if ra_consistent(g):
            continue
        readers = [e.id for e in g.events if e.kind in (Kind.RL, Kind.RU)]
        if len(readers) < 2:
            continue
        a, b = rng.sample(readers, 2)
        lo = trans_closure(g.lo | {(a, b)})
        if any(x == y for x, y in lo):
            continue
        assert not ra_consistent(_with_lo(g, lo))
