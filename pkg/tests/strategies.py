"""Hypothesis strategies for small straight-line litmus programs."""

from __future__ import annotations

from hypothesis import strategies as st

from silab.litmus import Assign, Assume, Program, ReadTo, Thread, TxBlock, WriteFrom, const, reg

LOCS = ("x", "y")


@st.composite
def _thread(draw, index: int, mode: str, budget: int, locals_ok: bool):
    """``mode``: "tx" (every access in a transaction), "nt" (none), "mixed"."""
    regs: list[str] = []
    body = []
    n = draw(st.integers(1, budget))
    stmts = []
    for _ in range(n):
        loc = draw(st.sampled_from(LOCS))
        if draw(st.booleans()):
            r = f"r{index}{len(regs)}"
            regs.append(r)
            stmts.append(ReadTo(r, loc))
        else:
            if regs and draw(st.booleans()):
                e = reg(draw(st.sampled_from(regs)), draw(st.integers(0, 1)))
            else:
                e = const(draw(st.integers(1, 2)))
            stmts.append(WriteFrom(loc, e))
        if locals_ok and regs and draw(st.integers(0, 5)) == 0:
            r = draw(st.sampled_from(regs))
            stmts.append(Assume("==", r, const(draw(st.integers(0, 1)))) if mode == "nt" else Assign(f"q{index}", reg(r, 1)))
    if mode == "nt":
        return Thread(f"T{index}", tuple(stmts))
    # split into chunks, each either a transaction or plain code
    i = 0
    while i < len(stmts):
        size = draw(st.integers(1, len(stmts) - i))
        chunk = stmts[i:i + size]
        as_tx = mode == "tx" or draw(st.booleans())
        if as_tx and not any(isinstance(s, Assume) for s in chunk):
            body.append(TxBlock(tuple(chunk)))
        else:
            body.extend(chunk)
        i += size
    if mode == "tx":
        # plain Assign statements between transactions are fine; accesses are not
        body = [s for s in body if isinstance(s, (TxBlock, Assign))]
    return Thread(f"T{index}", tuple(body))


@st.composite
def programs(draw, mode: str = "mixed", max_threads: int = 3, max_accesses: int = 6, locals_ok: bool = True):
    k = draw(st.integers(1, max_threads))
    per = max(1, max_accesses // k)
    threads = tuple(draw(_thread(i + 1, mode, per, locals_ok)) for i in range(k))
    return Program(threads, LOCS)
