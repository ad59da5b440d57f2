"""Declarative consistency predicates: SI (two formulations), RA with locks, RSI.

SI graphs contain only transactional reads and writes besides the
initialisation writes.  For the SI predicates the initialisation writes are
treated as one extra transaction class that precedes every other class: the
lifted relations would otherwise never mention them, and a graph whose
initial write is mo-after a transactional write would slip through.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .graph import (
    ExecutionGraph,
    Kind,
    Relation,
    codomain,
    compose,
    find_cycle,
    guard,
    same_loc,
    tin,
    tlift,
    trans_closure,
)


class ModelId(str, Enum):
    SI_AXIOMATIC = "SI_AXIOMATIC"
    SI_HB = "SI_HB"
    RA = "RA"
    RA_RSYNC = "RA_RSYNC"
    RSI = "RSI"

    @classmethod
    def parse(cls, name: str) -> "ModelId":
        key = name.strip().lower().replace("_", "-")
        try:
            return _MODEL_ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown model {name!r}; expected one of {sorted(_MODEL_ALIASES)}") from None

    @property
    def short(self) -> str:
        return _MODEL_SHORT[self]


_MODEL_ALIASES = {
    "si": ModelId.SI_HB,
    "si-hb": ModelId.SI_HB,
    "si-axiomatic": ModelId.SI_AXIOMATIC,
    "ra": ModelId.RA,
    "ra-rsync": ModelId.RA_RSYNC,
    "rsi": ModelId.RSI,
}
_MODEL_SHORT = {
    ModelId.SI_HB: "si",
    ModelId.SI_AXIOMATIC: "si-axiomatic",
    ModelId.RA: "ra",
    ModelId.RA_RSYNC: "ra-rsync",
    ModelId.RSI: "rsi",
}


class ModelMismatch(ValueError):
    """The graph does not belong to the class of executions the model speaks about."""


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    violated_axioms: tuple[str, ...] = ()
    witness_cycle: tuple[int, ...] | None = None
    witness_relation: str | None = None

    def __bool__(self) -> bool:
        return self.consistent

    def summary(self) -> str:
        if self.consistent:
            return "consistent"
        text = "inconsistent (" + ", ".join(self.violated_axioms) + ")"
        if self.witness_cycle:
            path = list(self.witness_cycle) + [self.witness_cycle[0]]
            text += f" cycle in {self.witness_relation}: " + " -> ".join(map(str, path))
        return text


def _verdict(failures: list[tuple[str, list[int] | None, str | None]]) -> Verdict:
    if not failures:
        return Verdict(True)
    witness = next(((c, rel) for _, c, rel in failures if c), (None, None))
    return Verdict(
        False,
        tuple(name for name, _, _ in failures),
        tuple(witness[0]) if witness[0] else None,
        witness[1],
    )


# ---------------------------------------------------------------------------
# SI
# ---------------------------------------------------------------------------


def _require_si_graph(g: ExecutionGraph) -> None:
    for e in g.events:
        if e.tid == 0:
            continue
        if e.txid == 0:
            raise ModelMismatch(f"SI graphs are transactional only; event {e.id} is non-transactional")
        if e.kind not in (Kind.R, Kind.W):
            raise ModelMismatch(f"SI graphs contain reads and writes only; event {e.id} is {e.kind}")


def si_classes(g: ExecutionGraph) -> Relation:
    """Same-transaction relation with the initialisation writes as one extra class."""
    return g.st | frozenset((a, b) for a in g.init for b in g.init)


def internal_holds(g: ExecutionGraph) -> bool:
    """``rf_i ∪ mo_i ∪ fr_i ⊆ po``."""
    st = g.st
    inner = tin(g.rf, st) | tin(g.mo, st) | tin(g.fr, st)
    return inner <= g.po


def _si_base(g: ExecutionGraph, st: Relation) -> Relation:
    return tlift(g.po, st) | tlift(g.rf, st) | tlift(g.mo, st)


def si_rb(g: ExecutionGraph, st: Relation) -> Relation:
    """``[R_ext] ; tlift(fr) ; [W]`` with ``R_ext`` the targets of external rf edges."""
    r_ext = codomain(g.rf - st)
    return guard(r_ext, tlift(g.fr, st), g.writes)


def si_consistent_axiomatic(g: ExecutionGraph) -> Verdict:
    _require_si_graph(g)
    st = si_classes(g)
    failures = []
    if not internal_holds(g):
        failures.append(("int", None, None))
    base = _si_base(g, st)
    ext = base | compose(base, tlift(g.fr, st))
    cycle = find_cycle(ext)
    if cycle is not None:
        failures.append(("ext", cycle, "(tlift(po) ∪ tlift(rf) ∪ tlift(mo)) ; tlift(fr)?"))
    return _verdict(failures)


def si_hb(g: ExecutionGraph) -> Relation:
    st = si_classes(g)
    return trans_closure(_si_base(g, st) | si_rb(g, st))


def si_consistent_hb(g: ExecutionGraph) -> Verdict:
    _require_si_graph(g)
    st = si_classes(g)
    failures = []
    if not internal_holds(g):
        failures.append(("int", None, None))
    base = _si_base(g, st) | si_rb(g, st)
    cycle = find_cycle(base)
    if cycle is not None:
        failures.append(("si-hb irreflexive", cycle, "tlift(po) ∪ tlift(rf) ∪ tlift(mo) ∪ si-rb"))
    return _verdict(failures)


# ---------------------------------------------------------------------------
# RA with lock axioms
# ---------------------------------------------------------------------------


def _require_impl_graph(g: ExecutionGraph) -> None:
    for e in g.events:
        if e.txid:
            raise ModelMismatch(f"implementation graphs have no transactions; event {e.id} has txid {e.txid}")


def ra_hb(g: ExecutionGraph) -> Relation:
    return trans_closure(g.po | g.rf | g.lo)


def _lock_groups(g: ExecutionGraph) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for e in g.events:
        if e.is_lock:
            groups.setdefault(e.loc, []).append(e.id)
    return groups


def wsync_holds(g: ExecutionGraph) -> bool:
    by = g.by_id
    for ids in _lock_groups(g).values():
        for a in ids:
            if by[a].kind not in (Kind.WL, Kind.WU, Kind.PL):
                continue
            for b in ids:
                if a != b and (a, b) not in g.lo and (b, a) not in g.lo:
                    return False
    return True


def wex_holds(g: ExecutionGraph) -> bool:
    """``[WL ∪ PL] ; (lo \\ po) ; [L] ⊆ po ; [WU] ; lo``."""
    acq = g.of_kind(Kind.WL, Kind.PL)
    lhs = guard(acq, g.lo - g.po, g.lock_events)
    rhs = compose(guard(None, g.po, g.of_kind(Kind.WU)), g.lo)
    return lhs <= rhs


def rshare_holds(g: ExecutionGraph) -> bool:
    """``[RL] ; (lo \\ po) ; [WL ∪ PL] ⊆ po ; [RU ∪ PL] ; lo``."""
    lhs = guard(g.of_kind(Kind.RL), g.lo - g.po, g.of_kind(Kind.WL, Kind.PL))
    rhs = compose(guard(None, g.po, g.of_kind(Kind.RU, Kind.PL)), g.lo)
    return lhs <= rhs


def rsync_holds(g: ExecutionGraph) -> bool:
    """Every two same-location reader lock events are lo-comparable."""
    by = g.by_id
    for ids in _lock_groups(g).values():
        readers = [i for i in ids if by[i].kind in (Kind.RL, Kind.RU)]
        for k, a in enumerate(readers):
            for b in readers[k + 1:]:
                if (a, b) not in g.lo and (b, a) not in g.lo:
                    return False
    return True


def ra_consistent(g: ExecutionGraph, rsync: bool = False) -> Verdict:
    _require_impl_graph(g)
    failures = []
    if not wsync_holds(g):
        failures.append(("WSync", None, None))
    if not wex_holds(g):
        failures.append(("WEx", None, None))
    if not rshare_holds(g):
        failures.append(("RShare", None, None))
    if rsync and not rsync_holds(g):
        failures.append(("RSync", None, None))
    acyc = same_loc(ra_hb(g), g) | g.mo | g.fr
    cycle = find_cycle(acyc)
    if cycle is not None:
        failures.append(("Acyc", cycle, "hb|loc ∪ mo ∪ fr"))
    return _verdict(failures)


# ---------------------------------------------------------------------------
# RSI
# ---------------------------------------------------------------------------


def _require_rsi_graph(g: ExecutionGraph) -> None:
    for e in g.events:
        if e.is_lock:
            raise ModelMismatch(f"RSI graphs have no lock events; event {e.id} is {e.kind}")
        if e.txid and e.kind not in (Kind.R, Kind.W):
            raise ModelMismatch(f"transactional event {e.id} is {e.kind}")


def rsi_po(g: ExecutionGraph) -> Relation:
    poi = tin(g.po, g.st)
    return (g.po - poi) | guard(g.writes, poi, g.writes)


def rsi_rf(g: ExecutionGraph) -> Relation:
    st, nt = g.st, g.nt
    return (
        guard(None, g.rf, nt)
        | compose(guard(nt, g.rf, None), st)
        | tlift(g.rf, st)
        | tlift(compose(g.mo, g.rf), st)
    )


def _rsi_base(g: ExecutionGraph) -> Relation:
    return rsi_po(g) | rsi_rf(g) | tlift(g.mo, g.st) | si_rb(g, g.st)


def rsi_hb(g: ExecutionGraph) -> Relation:
    return trans_closure(_rsi_base(g))


def rsi_consistent(g: ExecutionGraph) -> Verdict:
    _require_rsi_graph(g)
    failures = []
    if not internal_holds(g):
        failures.append(("int", None, None))
    acyc = same_loc(rsi_hb(g), g) | g.mo | g.fr
    cycle = find_cycle(acyc)
    if cycle is not None:
        failures.append(("rsi-acyclic", cycle, "rsi-hb|loc ∪ mo ∪ fr"))
    return _verdict(failures)


def check(g: ExecutionGraph, model: ModelId | str) -> Verdict:
    if isinstance(model, str) and not isinstance(model, ModelId):
        model = ModelId.parse(model)
    if model is ModelId.SI_AXIOMATIC:
        return si_consistent_axiomatic(g)
    if model is ModelId.SI_HB:
        return si_consistent_hb(g)
    if model is ModelId.RA:
        return ra_consistent(g)
    if model is ModelId.RA_RSYNC:
        return ra_consistent(g, rsync=True)
    if model is ModelId.RSI:
        return rsi_consistent(g)
    raise ValueError(f"unknown model {model!r}")


def witness_relation_of(g: ExecutionGraph, model: ModelId) -> Relation:
    """The relation a verdict's witness cycle lives in, for re-checking."""
    if model is ModelId.SI_AXIOMATIC:
        st = si_classes(g)
        base = _si_base(g, st)
        return base | compose(base, tlift(g.fr, st))
    if model is ModelId.SI_HB:
        st = si_classes(g)
        return _si_base(g, st) | si_rb(g, st)
    if model in (ModelId.RA, ModelId.RA_RSYNC):
        return same_loc(ra_hb(g), g) | g.mo | g.fr
    return same_loc(rsi_hb(g), g) | g.mo | g.fr


__all__ = [
    "ModelId",
    "ModelMismatch",
    "Verdict",
    "check",
    "internal_holds",
    "ra_consistent",
    "ra_hb",
    "rshare_holds",
    "rsi_consistent",
    "rsi_hb",
    "rsi_po",
    "rsi_rf",
    "rsync_holds",
    "si_classes",
    "si_consistent_axiomatic",
    "si_consistent_hb",
    "si_hb",
    "si_rb",
    "wex_holds",
    "witness_relation_of",
    "wsync_holds",
]
