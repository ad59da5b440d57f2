"""Bundled litmus programs, lock clients and graph files."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .graph import ExecutionGraph, from_json
from .litmus import LitmusFile, parse_litmus

SUITES = ("fig1", "theorems", "locks")


@dataclass(frozen=True)
class Entry:
    suite: str
    name: str
    text: str

    def load(self) -> LitmusFile:
        return parse_litmus(self.text, self.name)


def _dir(sub: str):
    return resources.files("silab").joinpath("corpus_data", sub)


def entries(suite: str) -> list[Entry]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    out = []
    for f in sorted(_dir(suite).iterdir(), key=lambda f: f.name):
        if f.name.endswith(".litmus"):
            out.append(Entry(suite, f.name[: -len(".litmus")], f.read_text(encoding="utf-8")))
    return out


def entry(suite: str, name: str) -> Entry:
    for e in entries(suite):
        if e.name == name:
            return e
    raise KeyError(f"no entry {name!r} in suite {suite!r}")


def load(suite: str, name: str) -> LitmusFile:
    return entry(suite, name).load()


def graph_names() -> list[str]:
    return sorted(f.name[:-5] for f in _dir("graphs").iterdir() if f.name.endswith(".json"))


def graph_text(name: str) -> str:
    return _dir("graphs").joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_graph(name: str) -> ExecutionGraph:
    return from_json(graph_text(name))


def si_programs() -> list[Entry]:
    """Transaction-only theorem programs."""
    return [e for e in entries("theorems") if not e.load().program.has_nt_accesses]


def mixed_programs() -> list[Entry]:
    return [e for e in entries("theorems") if e.load().program.has_nt_accesses]


__all__ = [
    "Entry",
    "SUITES",
    "entries",
    "entry",
    "graph_names",
    "graph_text",
    "load",
    "load_graph",
    "mixed_programs",
    "si_programs",
]
