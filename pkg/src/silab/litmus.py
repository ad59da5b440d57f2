"""Loop-free litmus programs mixing transactions and plain accesses.

Grammar (line oriented; ``;`` also separates statements, ``#`` starts a comment)::

    locations x, y, z          # required header; every other name is a register
    thread T1
      x = 1                    # write
      a = x                    # read
      tx {
        b = y
        y = b + 1
      }
    expect si forbidden: a=0, b=0
    expect rsi allowed: T1:a=1

Implementation programs additionally use ``lock_r x``, ``unlock_r x``,
``lock_w x``, ``unlock_w x``, ``promote x``, ``cas x <expect> <new>``,
``faa x <delta>``, local assignments ``r = s + 1`` and
``assume r == e`` / ``assume r != e`` / ``assume even r`` / ``assume odd r``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

LOCK_OPS = ("lock_r", "unlock_r", "lock_w", "unlock_w", "promote")
ASSUME_OPS = ("==", "!=", "even", "odd")
VERDICTS = ("allowed", "forbidden")
KEYWORDS = frozenset(
    {"locations", "thread", "tx", "expect", "assume", "cas", "faa", "even", "odd", *LOCK_OPS, *VERDICTS}
)


class LitmusError(ValueError):
    """Syntax or semantic error in a litmus source, with position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col, self.message = line, col, message
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    """``const`` or ``reg + const``."""

    reg: str | None = None
    const: int = 0

    def eval(self, regs: Mapping[str, int]) -> int:
        return (regs[self.reg] if self.reg is not None else 0) + self.const

    def registers(self) -> tuple[str, ...]:
        return (self.reg,) if self.reg is not None else ()

    def __str__(self) -> str:
        if self.reg is None:
            return str(self.const)
        if self.const == 0:
            return self.reg
        sign = "+" if self.const > 0 else "-"
        return f"{self.reg} {sign} {abs(self.const)}"


def const(v: int) -> Expr:
    return Expr(None, v)


def reg(name: str, plus: int = 0) -> Expr:
    return Expr(name, plus)


@dataclass(frozen=True)
class ReadTo:
    reg: str
    loc: str


@dataclass(frozen=True)
class WriteFrom:
    loc: str
    expr: Expr


@dataclass(frozen=True)
class Assign:
    """Thread-local assignment; generates no event."""

    reg: str
    expr: Expr


@dataclass(frozen=True)
class Assume:
    """Thread-local constraint; executions violating it are discarded."""

    op: str
    reg: str
    expr: Expr | None = None

    def holds(self, regs: Mapping[str, int]) -> bool:
        v = regs[self.reg]
        if self.op == "==":
            return v == self.expr.eval(regs)
        if self.op == "!=":
            return v != self.expr.eval(regs)
        if self.op == "even":
            return v % 2 == 0
        if self.op == "odd":
            return v % 2 == 1
        raise ValueError(self.op)


@dataclass(frozen=True)
class CasLoop:
    """Successful compare-and-set (spin collapsed to its final iteration)."""

    loc: str
    expect: Expr
    new: Expr


@dataclass(frozen=True)
class FaaBy:
    loc: str
    delta: int


@dataclass(frozen=True)
class LockOp:
    op: str
    loc: str


@dataclass(frozen=True)
class TxBlock:
    body: tuple["Stmt", ...]


Stmt = Union[ReadTo, WriteFrom, Assign, Assume, CasLoop, FaaBy, LockOp, TxBlock]
ACCESS_STMTS = (ReadTo, WriteFrom, CasLoop, FaaBy)


@dataclass(frozen=True)
class Thread:
    name: str
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class Program:
    threads: tuple[Thread, ...] = ()
    declared: tuple[str, ...] = ()

    @property
    def locations(self) -> tuple[str, ...]:
        """Data locations accessed by the program, sorted."""
        locs = set()
        for stmt in iter_stmts(self):
            if isinstance(stmt, ACCESS_STMTS):
                locs.add(stmt.loc)
        return tuple(sorted(locs))

    @property
    def all_locations(self) -> tuple[str, ...]:
        locs = set(self.declared) | set(self.locations)
        for stmt in iter_stmts(self):
            if isinstance(stmt, LockOp):
                locs.add(stmt.loc)
        return tuple(sorted(locs))

    @property
    def values(self) -> frozenset[int]:
        return value_domain(self)

    def thread(self, name: str) -> Thread:
        for t in self.threads:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def has_transactions(self) -> bool:
        return any(isinstance(s, TxBlock) for t in self.threads for s in t.body)

    @property
    def has_locks(self) -> bool:
        return any(isinstance(s, LockOp) for s in iter_stmts(self))

    @property
    def has_nt_accesses(self) -> bool:
        return any(isinstance(s, ACCESS_STMTS) for t in self.threads for s in t.body)


def iter_stmts(p: Program | Thread | Sequence[Stmt]) -> Iterator[Stmt]:
    if isinstance(p, Program):
        for t in p.threads:
            yield from iter_stmts(t.body)
        return
    body = p.body if isinstance(p, Thread) else p
    for s in body:
        yield s
        if isinstance(s, TxBlock):
            yield from iter_stmts(s.body)


def value_domain(p: Program) -> frozenset[int]:
    """Constants of ``p`` plus 0, closed under one pass of ``reg + c`` evaluation."""
    consts = {0}
    offsets = set()
    for s in iter_stmts(p):
        exprs: list[Expr] = []
        if isinstance(s, (WriteFrom, Assign)):
            exprs = [s.expr]
        elif isinstance(s, CasLoop):
            exprs = [s.expect, s.new]
        elif isinstance(s, Assume) and s.expr is not None:
            exprs = [s.expr]
        elif isinstance(s, FaaBy):
            offsets.add(s.delta)
        for e in exprs:
            if e.reg is None:
                consts.add(e.const)
            else:
                offsets.add(e.const)
    return frozenset(consts | {c + d for c in consts for d in offsets})


# ---------------------------------------------------------------------------
# Expectations and outcomes
# ---------------------------------------------------------------------------

OutcomeKey = tuple[str, str]  # (thread name, register)


@dataclass(frozen=True, order=True)
class Outcome:
    """Final register valuation, as sorted ((thread, register), value) items."""

    items: tuple[tuple[OutcomeKey, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[OutcomeKey, int]) -> "Outcome":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[OutcomeKey, int]:
        return dict(self.items)

    def matches(self, partial: Mapping[OutcomeKey, int]) -> bool:
        d = self.as_dict()
        return all(d.get(k) == v for k, v in partial.items())

    def format(self, qualify: bool = False) -> str:
        names = [r for (_, r), _ in self.items]
        ambiguous = qualify or len(names) != len(set(names))
        parts = []
        for (t, r), v in self.items:
            parts.append(f"{t}:{r}={v}" if ambiguous else f"{r}={v}")
        return ", ".join(parts)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class Expectation:
    model: str
    verdict: str
    outcome: tuple[tuple[OutcomeKey, int], ...]
    line: int = 0

    @property
    def partial(self) -> dict[OutcomeKey, int]:
        return dict(self.outcome)

    def describe(self) -> str:
        names = [r for (_, r), _ in self.outcome]
        ambiguous = len(names) != len(set(names))
        body = ", ".join(f"{t}:{r}={v}" if ambiguous else f"{r}={v}" for (t, r), v in self.outcome)
        return f"{self.verdict} {body}"

    def met_by(self, outcomes: Iterable[Outcome]) -> bool:
        present = any(o.matches(self.partial) for o in outcomes)
        return present if self.verdict == "allowed" else not present


@dataclass(frozen=True)
class LitmusFile:
    program: Program
    expectations: tuple[Expectation, ...] = ()
    name: str = ""


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<nl>[\n;])"
    r"|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_.\[\]]*)"
    r"|(?P<op>==|!=|[=+\-{}:,])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LitmusError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            tokens.append(Token("nl", m.group(), line, col))
            if m.group() == "\n":
                line += 1
                line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.locations: set[str] = set()
        self.declared: list[str] = []

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> LitmusError:
        tok = tok or self.peek()
        return LitmusError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {t.text or t.kind!r}")
        return self.next()

    def skip_nl(self) -> None:
        while self.peek().kind == "nl":
            self.next()

    def end_stmt(self) -> None:
        t = self.peek()
        if t.kind in ("nl", "eof") or (t.kind == "op" and t.text == "}"):
            return
        raise self.error(f"unexpected {t.text!r} after statement")

    # grammar
    def parse(self) -> LitmusFile:
        self.skip_nl()
        if self.peek().kind == "eof":
            raise self.error("empty litmus source")
        t = self.peek()
        if t.kind != "ident" or t.text != "locations":
            raise self.error("litmus source must start with a 'locations' header")
        self.next()
        while self.peek().kind not in ("nl", "eof"):
            tok = self.expect("ident")
            if tok.text in KEYWORDS:
                raise self.error(f"keyword {tok.text!r} cannot name a location", tok)
            if tok.text in self.locations:
                raise self.error(f"location {tok.text!r} declared twice", tok)
            self.locations.add(tok.text)
            self.declared.append(tok.text)
            if self.peek().kind == "op" and self.peek().text == ",":
                self.next()
        threads: list[Thread] = []
        expectations: list[Expectation] = []
        self.skip_nl()
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "ident" and t.text == "thread":
                threads.append(self.thread(threads))
            elif t.kind == "ident" and t.text == "expect":
                expectations.append(self.expectation())
            else:
                raise self.error(f"expected 'thread' or 'expect', found {t.text!r}")
            self.skip_nl()
        program = Program(tuple(threads), tuple(self.declared))
        for exp in expectations:
            _check_expectation(program, exp)
        return LitmusFile(program, tuple(expectations))

    def thread(self, existing: list[Thread]) -> Thread:
        self.expect("ident", "thread")
        name_tok = self.expect("ident")
        if any(t.name == name_tok.text for t in existing):
            raise self.error(f"duplicate thread name {name_tok.text!r}", name_tok)
        body: list[Stmt] = []
        self.skip_nl()
        while True:
            t = self.peek()
            if t.kind == "eof" or (t.kind == "ident" and t.text in ("thread", "expect")):
                break
            body.append(self.statement(in_tx=False))
            self.end_stmt()
            self.skip_nl()
        return Thread(name_tok.text, tuple(body))

    def statement(self, in_tx: bool) -> Stmt:
        t = self.peek()
        if t.kind == "op" and t.text == "}":
            raise self.error("unbalanced '}'")
        if t.kind != "ident":
            raise self.error(f"expected a statement, found {t.text!r}")
        word = t.text
        if word == "tx":
            if in_tx:
                raise self.error("nested transactions are not allowed")
            return self.tx_block()
        if word in LOCK_OPS:
            self.next()
            return LockOp(word, self.location())
        if word == "cas":
            self.next()
            loc = self.location()
            return CasLoop(loc, self.expr(), self.expr())
        if word == "faa":
            self.next()
            loc = self.location()
            return FaaBy(loc, self.signed_int())
        if word == "assume":
            return self.assume()
        if word in KEYWORDS:
            raise self.error(f"unexpected keyword {word!r}")
        self.next()
        self.expect("op", "=")
        if word in self.locations:
            return WriteFrom(word, self.expr())
        rhs = self.peek()
        if rhs.kind == "ident" and rhs.text in self.locations:
            self.next()
            return ReadTo(word, rhs.text)
        return Assign(word, self.expr())

    def tx_block(self) -> TxBlock:
        self.expect("ident", "tx")
        self.expect("op", "{")
        body: list[Stmt] = []
        self.skip_nl()
        while not (self.peek().kind == "op" and self.peek().text == "}"):
            if self.peek().kind == "eof":
                raise self.error("unterminated transaction block")
            body.append(self.statement(in_tx=True))
            self.end_stmt()
            self.skip_nl()
        self.expect("op", "}")
        return TxBlock(tuple(body))

    def assume(self) -> Assume:
        self.expect("ident", "assume")
        t = self.peek()
        if t.kind == "ident" and t.text in ("even", "odd"):
            self.next()
            return Assume(t.text, self.register())
        r = self.register()
        op = self.peek()
        if op.kind != "op" or op.text not in ("==", "!="):
            raise self.error("expected '==' or '!=' in assume")
        self.next()
        return Assume(op.text, r, self.expr())

    def location(self) -> str:
        t = self.expect("ident")
        if t.text not in self.locations:
            raise self.error(f"undeclared location {t.text!r}", t)
        return t.text

    def register(self) -> str:
        t = self.expect("ident")
        if t.text in self.locations:
            raise self.error(f"{t.text!r} is a location, expected a register", t)
        if t.text in KEYWORDS:
            raise self.error(f"keyword {t.text!r} cannot name a register", t)
        return t.text

    def signed_int(self) -> int:
        sign = 1
        if self.peek().kind == "op" and self.peek().text in "+-":
            sign = -1 if self.next().text == "-" else 1
        return sign * int(self.expect("num").text)

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "num" or (t.kind == "op" and t.text in "+-"):
            return Expr(None, self.signed_int())
        if t.kind == "ident":
            if t.text in self.locations:
                raise self.error(f"location {t.text!r} cannot appear in an expression", t)
            name = self.register()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text in "+-":
                self.next()
                c = int(self.expect("num").text)
                return Expr(name, c if nxt.text == "+" else -c)
            return Expr(name, 0)
        raise self.error(f"expected an expression, found {t.text!r}")

    def expectation(self) -> Expectation:
        start = self.expect("ident", "expect")
        model = self.expect("ident").text
        from .consistency import ModelId  # local import: litmus stays dependency-free otherwise

        try:
            ModelId.parse(model)
        except ValueError as exc:
            raise self.error(str(exc)) from None
        verdict = self.expect("ident")
        if verdict.text not in VERDICTS:
            raise self.error("expected 'allowed' or 'forbidden'", verdict)
        self.expect("op", ":")
        items: list[tuple[tuple[str | None, str], int]] = []
        while True:
            name = self.expect("ident").text
            thread = None
            if self.peek().kind == "op" and self.peek().text == ":":
                self.next()
                thread, name = name, self.expect("ident").text
            self.expect("op", "=")
            items.append(((thread, name), self.signed_int()))
            if self.peek().kind == "op" and self.peek().text == ",":
                self.next()
                continue
            break
        self.end_stmt()
        return Expectation(model.lower(), verdict.text, tuple(items), start.line)  # resolved later


def _check_expectation(program: Program, exp: Expectation) -> None:
    """Resolve unqualified registers in place; raise if ambiguous or unknown."""
    owners: dict[str, list[str]] = {}
    for t in program.threads:
        for r in sorted(assigned_registers(t)):
            owners.setdefault(r, []).append(t.name)
    resolved = []
    for (thread, name), v in exp.outcome:
        if thread is None:
            ts = owners.get(name, [])
            if len(ts) != 1:
                what = "unknown" if not ts else "ambiguous"
                raise LitmusError(f"{what} register {name!r} in expectation", exp.line)
            thread = ts[0]
        elif not _has_thread(program, thread) or name not in assigned_registers(program.thread(thread)):
            raise LitmusError(f"unknown register {thread}:{name} in expectation", exp.line)
        resolved.append(((thread, name), v))
    object.__setattr__(exp, "outcome", tuple(sorted(resolved)))


def _has_thread(p: Program, name: str) -> bool:
    return any(t.name == name for t in p.threads)


def assigned_registers(t: Thread) -> set[str]:
    out = set()
    for s in iter_stmts(t.body):
        if isinstance(s, (ReadTo, Assign)):
            out.add(s.reg)
    return out


def parse_litmus(text: str, name: str = "") -> LitmusFile:
    """Parse a litmus source; the result is guaranteed to pass :func:`validate`."""
    lf = _Parser(text).parse()
    diags = validate(lf.program)
    if diags:
        raise LitmusError(diags[0])
    return LitmusFile(lf.program, lf.expectations, name)


def parse_program(text: str) -> Program:
    return parse_litmus(text).program


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------


def _stmt_text(s: Stmt) -> str:
    if isinstance(s, ReadTo):
        return f"{s.reg} = {s.loc}"
    if isinstance(s, WriteFrom):
        return f"{s.loc} = {s.expr}"
    if isinstance(s, Assign):
        return f"{s.reg} = {s.expr}"
    if isinstance(s, Assume):
        if s.op in ("even", "odd"):
            return f"assume {s.op} {s.reg}"
        return f"assume {s.reg} {s.op} {s.expr}"
    if isinstance(s, CasLoop):
        return f"cas {s.loc} {_compact(s.expect)} {_compact(s.new)}"
    if isinstance(s, FaaBy):
        return f"faa {s.loc} {s.delta}"
    if isinstance(s, LockOp):
        return f"{s.op} {s.loc}"
    raise TypeError(s)


def _compact(e: Expr) -> str:
    return str(e).replace(" ", "")


def serialize(p: Program, expectations: Sequence[Expectation] = ()) -> str:
    """Canonical text; ``parse_litmus(serialize(p)).program == p``."""
    lines = ["locations " + ", ".join(p.declared or p.all_locations) if (p.declared or p.all_locations) else "locations"]
    for t in p.threads:
        lines.append(f"thread {t.name}")
        for s in t.body:
            if isinstance(s, TxBlock):
                lines.append("  tx {")
                lines.extend(f"    {_stmt_text(b)}" for b in s.body)
                lines.append("  }")
            else:
                lines.append(f"  {_stmt_text(s)}")
    for e in expectations:
        body = ", ".join(f"{t}:{r}={v}" for (t, r), v in e.outcome)
        lines.append(f"expect {e.model} {e.verdict}: {body}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(p: Program) -> list[str]:
    """Structural diagnostics; empty iff the program meets every assumption."""
    from .graph import lock_sequence_wellformed

    diags: list[str] = []
    declared = set(p.declared) if p.declared else None
    names = [t.name for t in p.threads]
    if len(names) != len(set(names)):
        diags.append("duplicate thread names")
    for t in p.threads:
        defined: set[str] = set()
        lock_seq: dict[str, list[str]] = {}

        def use(regs: Iterable[str], where: str) -> None:
            for r in regs:
                if r not in defined:
                    diags.append(f"thread {t.name}: register {r!r} used before assignment in {where}")

        def visit(s: Stmt, in_tx: bool) -> None:
            loc = getattr(s, "loc", None)
            if declared is not None and loc is not None and loc not in declared:
                diags.append(f"thread {t.name}: undeclared location {loc!r}")
            if isinstance(s, TxBlock):
                if in_tx:
                    diags.append(f"thread {t.name}: nested transactions are not allowed")
                for b in s.body:
                    visit(b, True)
                return
            if in_tx and isinstance(s, (CasLoop, FaaBy)):
                diags.append(f"thread {t.name}: updates forbidden in transactions")
            if in_tx and isinstance(s, LockOp):
                diags.append(f"thread {t.name}: lock operations forbidden in transactions")
            if in_tx and isinstance(s, Assume):
                diags.append(f"thread {t.name}: assume forbidden in transactions")
            if isinstance(s, ReadTo):
                defined.add(s.reg)
            elif isinstance(s, (WriteFrom, Assign)):
                use(s.expr.registers(), _stmt_text(s))
                if isinstance(s, Assign):
                    defined.add(s.reg)
            elif isinstance(s, Assume):
                use([s.reg, *(s.expr.registers() if s.expr else ())], _stmt_text(s))
            elif isinstance(s, CasLoop):
                use([*s.expect.registers(), *s.new.registers()], _stmt_text(s))
            elif isinstance(s, LockOp):
                lock_seq.setdefault(s.loc, []).append(_LOCK_KIND[s.op])

        for s in t.body:
            visit(s, False)
        for loc, seq in lock_seq.items():
            if not lock_sequence_wellformed(seq):
                diags.append(f"thread {t.name}: ill-formed lock usage on {loc!r}: {' '.join(seq)}")
    return diags


_LOCK_KIND = {"lock_r": "RL", "unlock_r": "RU", "lock_w": "WL", "unlock_w": "WU", "promote": "PL"}


# ---------------------------------------------------------------------------
# Program construction helpers
# ---------------------------------------------------------------------------


def program(*threads: Thread, declared: Sequence[str] | None = None) -> Program:
    p = Program(tuple(threads))
    return Program(p.threads, tuple(declared) if declared is not None else p.all_locations)


def with_declared(p: Program, extra: Iterable[str] = ()) -> Program:
    locs = set(p.declared) | set(p.locations) | set(extra)
    for s in iter_stmts(p):
        if isinstance(s, LockOp):
            locs.add(s.loc)
    return Program(p.threads, tuple(sorted(locs)))
