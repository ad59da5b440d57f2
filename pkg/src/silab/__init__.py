"""Model checking toolkit for snapshot isolation over a release/acquire base model."""

from .consistency import ModelId, Verdict, check
from .graph import Event, ExecutionGraph, Kind
from .litmus import Outcome, Program, parse_litmus, serialize

__version__ = "0.1.0"

__all__ = [
    "Event",
    "ExecutionGraph",
    "Kind",
    "ModelId",
    "Outcome",
    "Program",
    "Verdict",
    "check",
    "parse_litmus",
    "serialize",
]
