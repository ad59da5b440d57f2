"""Checks run by ``silab corpus``: figure tests, theorem suite, lock clients."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from . import corpus
from .consistency import rsi_consistent, si_consistent_axiomatic, si_consistent_hb
from .enumeration import DEFAULT_MAX_EVENTS, enumerate_candidates, outcomes
from .litmus import Outcome, Program
from .mrsw import AXIOMS, LockImpl, LockImplKind, verify_lock_axioms
from .stm import ImplVariant, check_rsi_side_condition, maximal_nt_blocks, translate, wrap


@dataclass
class Row:
    suite: str
    test: str
    check: str
    passed: bool | None
    detail: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "N/A" if self.passed is None else "PASS" if self.passed else "FAIL"

    def to_json_obj(self) -> dict:
        obj = asdict(self)
        obj["status"] = self.status
        return obj


def _fmt(outs) -> str:
    return "; ".join(o.format() for o in sorted(outs)) or "-"


def _outs(p: Program, model, max_events: int) -> frozenset[Outcome]:
    return outcomes(p, model, max_events=max_events).outcomes


def fig1_rows(max_events: int = DEFAULT_MAX_EVENTS) -> list[Row]:
    rows = []
    for e in corpus.entries("fig1"):
        lf = e.load()
        for x in lf.expectations:
            t = time.perf_counter()
            outs = _outs(lf.program, x.model, max_events)
            rows.append(
                Row("fig1", e.name, f"{x.model} {x.describe()}", x.met_by(outs), _fmt(outs), time.perf_counter() - t)
            )
    return rows


def three_way(p: Program, model: str, variants: tuple[ImplVariant, ...], base: str, max_events: int):
    reference = _outs(p, model, max_events)
    impls = {v.cli_name: _outs(translate(p, v), base, max_events) for v in variants}
    return reference, impls


def _equality_row(name: str, label: str, p: Program, model: str, variants, base: str, max_events: int) -> Row:
    t = time.perf_counter()
    reference, impls = three_way(p, model, variants, base, max_events)
    diffs = []
    for v, outs in impls.items():
        if outs != reference:
            diffs.append(f"{v}: missing {_fmt(reference - outs)}, extra {_fmt(outs - reference)}")
    return Row(
        "theorems",
        name,
        label,
        not diffs,
        "; ".join(diffs) or f"{len(reference)} outcomes agree",
        time.perf_counter() - t,
        {"reference": sorted(o.format() for o in reference), **{v: sorted(o.format() for o in o_) for v, o_ in impls.items()}},
    )


def _candidate_rows(name: str, p: Program, max_events: int) -> list[Row]:
    t = time.perf_counter()
    graphs = enumerate_candidates(p, max_events=max_events)
    si_bad = sum(1 for g in graphs if bool(si_consistent_axiomatic(g)) != bool(si_consistent_hb(g)))
    rsi_bad = sum(1 for g in graphs if bool(rsi_consistent(g)) != bool(si_consistent_hb(g)))
    dt = time.perf_counter() - t
    return [
        Row("theorems", name, "axiomatic SI = hb SI on candidates", si_bad == 0, f"{si_bad}/{len(graphs)} disagree", dt),
        Row("theorems", name, "RSI = SI without NT events", rsi_bad == 0, f"{rsi_bad}/{len(graphs)} disagree", dt),
    ]


def theorem_rows(max_events: int = DEFAULT_MAX_EVENTS, rsync: bool = True) -> list[Row]:
    rows: list[Row] = []
    si_pair = (ImplVariant.EAGER_SI, ImplVariant.LAZY_SI)
    rsi_pair = (ImplVariant.EAGER_RSI, ImplVariant.LAZY_RSI)
    for e in corpus.si_programs():
        p = e.load().program
        rows.extend(_candidate_rows(e.name, p, max_events))
        rows.append(_equality_row(e.name, "SI = eager-si = lazy-si under RA", p, "si", si_pair, "ra", max_events))
        if rsync:
            rows.append(
                _equality_row(e.name, "SI = eager-si under RA+RSync", p, "si", si_pair[:1], "ra-rsync", max_events)
            )
    for e in corpus.mixed_programs():
        p = e.load().program
        t = time.perf_counter()
        side = check_rsi_side_condition(p, max_events=max_events)
        if side:
            rows.append(
                _equality_row(e.name, "RSI = eager-rsi = lazy-rsi under RA", p, "rsi", rsi_pair, "ra", max_events)
            )
        else:
            rows.append(
                Row("theorems", e.name, "RSI = eager-rsi = lazy-rsi under RA", None,
                    "side condition fails; not applicable", time.perf_counter() - t)
            )
        base = _outs(p, "rsi", max_events)
        for ti, start, end in maximal_nt_blocks(p):
            t = time.perf_counter()
            wrapped = _outs(wrap(p, ti, start, end), "rsi", max_events)
            extra = wrapped - base
            rows.append(
                Row("theorems", e.name, f"wrap {p.threads[ti].name}[{start}:{end}] refines RSI",
                    not extra, f"new outcomes {_fmt(extra)}" if extra else f"{len(wrapped)} <= {len(base)}",
                    time.perf_counter() - t)
            )
    rows.append(sbt_sensitivity_row(max_events))
    return rows


SBT_WEAK = {("T1", "b"): 0, ("T2", "d"): 0}


def sbt_sensitivity_row(max_events: int = DEFAULT_MAX_EVENTS) -> Row:
    t = time.perf_counter()
    lf = corpus.load("fig1", "sbt")
    impl = translate(lf.program, ImplVariant.EAGER_RSI)
    ra = any(o.matches(SBT_WEAK) for o in _outs(impl, "ra", max_events))
    rs = any(o.matches(SBT_WEAK) for o in _outs(impl, "ra-rsync", max_events))
    return Row(
        "theorems", "sbt", "eager-rsi: weak outcome under RA, not under RA+RSync",
        ra and not rs, f"RA {'has' if ra else 'lacks'} it, RA+RSync {'has' if rs else 'lacks'} it",
        time.perf_counter() - t,
    )


def lock_rows(spin_bound: int = 2, max_events: int = DEFAULT_MAX_EVENTS) -> tuple[list[Row], list]:
    rows: list[Row] = []
    reports = []
    witnesses = 0
    for e in corpus.entries("locks"):
        p = e.load().program
        for kind in LockImplKind:
            t = time.perf_counter()
            rep = verify_lock_axioms(p, LockImpl(kind, spin_bound), e.name, max_events=max_events, keep_details=False)
            reports.append(rep)
            if kind is LockImplKind.WRITE_SYNC:
                witnesses += rep.reader_unordered_executions
            held = ", ".join(f"{a} {rep.holds[a]}/{rep.executions}" for a in AXIOMS)
            rows.append(
                Row("locks", e.name, kind.value, rep.ok,
                    f"{held}; reader-unordered {rep.reader_unordered_executions}; dropped {rep.dropped}",
                    time.perf_counter() - t, rep.to_json_obj(details=False))
            )
    rows.append(
        Row("locks", "*", "WRITE_SYNC reader-unordered witness", witnesses > 0, f"{witnesses} executions")
    )
    return rows, reports


__all__ = [
    "Row",
    "fig1_rows",
    "lock_rows",
    "sbt_sensitivity_row",
    "theorem_rows",
    "three_way",
]
