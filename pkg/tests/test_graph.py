from __future__ import annotations

import json

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from silab import corpus
from silab.enumeration import enumerate_consistent
from silab.graph import (
    Event,
    ExecutionGraph,
    GraphError,
    Kind,
    acyclic,
    build_po,
    compose,
    derived_fr,
    find_cycle,
    from_json,
    identity_on,
    imm,
    inverse,
    irreflexive,
    is_cycle_of,
    lock_sequence_wellformed,
    lock_trace_wellformed,
    refl_trans_closure,
    restrict,
    restrict_same_loc,
    same_transaction,
    tin,
    tlift,
    to_dot,
    to_json,
    tout,
    trans_closure,
    wellformedness_issues,
)
from silab.stm import ImplVariant, translate


def W(i, tid, loc, v, tx=0):
    return Event(i, tid, tx, Kind.W, loc, None, v)


def R(i, tid, loc, v, tx=0):
    return Event(i, tid, tx, Kind.R, loc, v, None)


def graph(events, rf=(), mo=(), lo=()):
    return ExecutionGraph(tuple(events), trans_closure(build_po(events)), frozenset(rf), trans_closure(mo), trans_closure(lo))


relations = st.frozensets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=18)


# --- relation algebra -------------------------------------------------------


def test_trans_closure_example():
    assert trans_closure({(1, 2), (2, 3)}) == {(1, 2), (2, 3), (1, 3)}


def test_acyclic_two_cycle():
    assert not acyclic({(1, 2), (2, 1)})
    assert acyclic({(1, 2), (2, 3)})


def test_irreflexive():
    assert irreflexive({(1, 2)})
    assert not irreflexive({(1, 1)})


def test_restrict_same_loc_drops_cross_location_pairs_only():
    evs = [W(0, 0, "x", 0), W(1, 0, "y", 0), W(2, 1, "x", 1), R(3, 1, "y", 0), R(4, 1, "x", 1)]
    g = graph(evs)
    po = {(a, b) for a, b in g.po if a >= 2}
    by_hand = {(2, 4)}
    assert restrict_same_loc(po, g) == by_hand


def test_identity_inverse_restrict():
    assert identity_on([1, 2]) == {(1, 1), (2, 2)}
    assert inverse({(1, 2)}) == {(2, 1)}
    assert restrict({(1, 2), (2, 3)}, {1, 2}) == {(1, 2)}


def test_imm_of_chain():
    assert imm(trans_closure({(1, 2), (2, 3)})) == {(1, 2), (2, 3)}


def test_imm_rejects_cycles():
    with pytest.raises(ValueError):
        imm({(1, 2), (2, 1)})


@given(relations)
def test_trans_closure_matches_networkx(r):
    g = nx.DiGraph(list(r))
    # one-or-more steps, so a node on a cycle reaches itself
    expected = {(a, b) for a in g for s in g.successors(a) for b in {s} | nx.descendants(g, s)}
    assert trans_closure(r) == expected


@given(relations)
def test_trans_closure_idempotent(r):
    c = trans_closure(r)
    assert trans_closure(c) == c


@given(relations, relations, relations)
def test_compose_associative(a, b, c):
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@given(relations)
def test_find_cycle_agrees_with_networkx(r):
    cyc = find_cycle(r)
    has = not nx.is_directed_acyclic_graph(nx.DiGraph(list(r))) if r else False
    assert (cyc is not None) == has
    if cyc is not None:
        assert is_cycle_of(cyc, r)


@given(relations)
def test_refl_trans_closure_contains_identity(r):
    nodes = {a for p in r for a in p}
    assert identity_on(nodes) <= refl_trans_closure(r, nodes)


@given(relations, st.lists(st.integers(0, 3), min_size=7, max_size=7))
def test_lifting_laws(r, classes):
    st_rel = frozenset((a, b) for a in range(7) for b in range(7) if classes[a] and classes[a] == classes[b])
    assert not (tlift(r, st_rel) & st_rel)
    assert tin(r, st_rel) | tout(r, st_rel) == r
    assert not (tin(r, st_rel) & tout(r, st_rel))


def test_tlift_examples():
    st_rel = frozenset({(1, 1), (1, 2), (2, 1), (2, 2), (3, 3), (3, 4), (4, 3), (4, 4)})
    inside = {(1, 2)}
    assert tlift(inside, st_rel) == frozenset()
    assert tin(inside, st_rel) == inside
    assert tlift({(2, 3)}, st_rel) == {(a, b) for a in (1, 2) for b in (3, 4)}


# --- derived relations ------------------------------------------------------


def test_fr_minimal():
    g = graph([W(0, 0, "x", 0), R(1, 1, "x", 0), W(2, 2, "x", 1)], rf={(0, 1)}, mo={(0, 2)})
    assert derived_fr(g) == {(1, 2)}


def test_fr_empty_without_rf():
    g = graph([W(0, 0, "x", 0), W(1, 1, "x", 1)], mo={(0, 1)})
    assert derived_fr(g) == frozenset()


def test_fr_lost_update_graph():
    # both transactions read the initial x, T1's write is mo-first
    evs = [W(0, 0, "x", 0), R(1, 1, "x", 0, 1), W(2, 1, "x", 1, 1), R(3, 2, "x", 0, 2), W(4, 2, "x", 1, 2)]
    g = graph(evs, rf={(0, 1), (0, 3)}, mo={(0, 2), (2, 4)})
    rf_inv_mo = {(r, w2) for (w, r) in g.rf for (w1, w2) in g.mo if w1 == w and r != w2}
    assert derived_fr(g) == rf_inv_mo
    assert (1, 4) in g.fr and (3, 2) in g.fr


def test_same_transaction_classes():
    evs = [W(0, 0, "x", 0), R(1, 1, "x", 0, 1), W(2, 1, "x", 1, 1), R(3, 2, "x", 0, 2), W(4, 2, "x", 1, 2), R(5, 2, "x", 1)]
    g = graph(evs, rf={(0, 1), (0, 3), (2, 5)}, mo={(0, 2), (2, 4)})
    s = same_transaction(g)
    assert (1, 2) in s and (1, 5) not in s and (4, 5) not in s
    classes = {frozenset(b for a2, b in s if a2 == a) for a, _ in s}
    assert len(classes) == 2


def test_tlift_rf_on_write_skew_graph():
    lf = corpus.load("fig1", "ws")
    for g in enumerate_consistent(lf.program, "si"):
        external = [(w, r) for w, r in g.rf if g.by_id[w].txid and g.by_id[w].txid != g.by_id[r].txid]
        if len(external) == 1:
            w, r = external[0]
            sizes = [sum(1 for e in g.events if e.txid == g.by_id[x].txid) for x in (w, r)]
            assert len(tlift(g.rf, g.st)) == sizes[0] * sizes[1]
            break
    else:
        pytest.fail("no write-skew graph with one external rf edge")


# --- well-formedness and lock traces ---------------------------------------


@pytest.mark.parametrize(
    "seq, ok",
    [
        ("RL PL WU", True),
        ("RU", False),
        ("RL RU WL WU", True),
        ("RL", True),
        ("WL RU", False),
        ("RL PL", True),
        ("WU", False),
    ],
)
def test_lock_sequence_wellformed(seq, ok):
    assert lock_sequence_wellformed([Kind(k) for k in seq.split()]) is ok


@pytest.mark.parametrize("variant", list(ImplVariant))
def test_translations_have_wellformed_lock_traces(variant):
    for entry in corpus.si_programs()[:6]:
        p = translate(entry.load().program, variant)
        for g in enumerate_consistent(p, "ra"):
            assert lock_trace_wellformed(g)


def test_transactional_update_is_ill_formed():
    with pytest.raises(GraphError):
        Event(1, 1, 1, Kind.U, "x", 0, 1)


def test_rf_value_mismatch_is_ill_formed():
    g = graph([W(0, 0, "x", 0), R(1, 1, "x", 1)], rf={(0, 1)})
    assert wellformedness_issues(g)


def test_cross_location_lo_is_ill_formed():
    evs = [Event(0, 1, 0, Kind.WL, "l"), Event(1, 1, 0, Kind.WU, "l"), Event(2, 2, 0, Kind.WL, "m"), Event(3, 2, 0, Kind.WU, "m")]
    g = graph(evs, lo={(0, 1), (1, 2)})
    assert wellformedness_issues(g)


# --- exchange format ---------------------------------------------------------


def test_json_round_trip_over_enumerated_graphs():
    for name in ("lu", "sbt"):
        lf = corpus.load("fig1", name)
        model = "si" if name == "lu" else "rsi"
        for g in enumerate_consistent(lf.program, model):
            back = from_json(to_json(g))
            assert back == g


def test_json_round_trip_with_locks():
    p = translate(corpus.load("fig1", "ws").program, "eager-si")
    g = enumerate_consistent(p, "ra")[0]
    assert from_json(to_json(g)) == g


@pytest.mark.parametrize(
    "text",
    ["{", "[]", json.dumps({"events": [{"id": 0}]}), json.dumps({"events": [{"id": 0, "tid": 0, "kind": "Q", "loc": "x"}]})],
)
def test_malformed_json_rejected(text):
    with pytest.raises(GraphError):
        from_json(text)


def test_dot_marks_cycle():
    g = corpus.load_graph("fig6a")
    text = to_dot(g, [3, 6])
    assert text.startswith("digraph") and "color=red" in text
