"""``silab`` command line: run, compare, corpus, check.

Exit codes: 0 when every expectation or equality holds, 1 when one fails,
2 on usage, parse or model/program mismatch errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .consistency import ModelId, ModelMismatch, check
from .enumeration import DEFAULT_MAX_EVENTS, EnumerationLimitError, outcomes, workers_from_env
from .graph import GraphError, from_json, to_dot
from .litmus import LitmusError, LitmusFile, Program, parse_litmus
from .stm import ImplVariant, translate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class ExpectationResult:
    model: str
    verdict: str
    outcome: str
    line: int
    status: str  # met | violated | skipped


@dataclass
class RunReport:
    program: str
    model: str
    outcomes: list[str]
    expectations: list[ExpectationResult] = field(default_factory=list)
    graph_count: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(e.status != "violated" for e in self.expectations)

    def to_json_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RunReport":
        exps = [ExpectationResult(**e) for e in obj.get("expectations", [])]
        return cls(obj["program"], obj["model"], list(obj["outcomes"]), exps, obj["graph_count"], obj["seconds"])


def _compact(text: str) -> str:
    return text.replace(", ", ",")


def _load(path: str) -> LitmusFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_litmus(text, Path(path).stem)
    except LitmusError as exc:
        raise UsageError(f"{path}:{exc}") from exc


def default_model(p: Program) -> ModelId:
    if not p.has_transactions:
        return ModelId.RA
    return ModelId.RSI if p.has_nt_accesses else ModelId.SI_HB


def run_file(lf: LitmusFile, model: ModelId | None, max_events: int, workers: int) -> list[RunReport]:
    """One report per model; expectations for other models are marked skipped."""
    if model is not None:
        models = [model]
    else:
        models = sorted({ModelId.parse(x.model) for x in lf.expectations}, key=lambda m: m.value)
        models = models or [default_model(lf.program)]
    reports = []
    for m in models:
        t = time.perf_counter()
        outs = outcomes(lf.program, m, max_events=max_events, workers=workers)
        rep = RunReport(lf.name, m.short, [o.format() for o in outs], graph_count=outs.graph_count)
        for x in lf.expectations:
            if ModelId.parse(x.model) is not m:
                status = "skipped"
            else:
                status = "met" if x.met_by(outs.outcomes) else "violated"
            rep.expectations.append(ExpectationResult(x.model, x.verdict, _compact(x.describe().split(" ", 1)[1]), x.line, status))
        rep.seconds = round(time.perf_counter() - t, 4)
        reports.append(rep)
    if model is None and len(reports) > 1:
        _merge_skips(reports)
    return reports


def _merge_skips(reports: list[RunReport]) -> None:
    """When every model runs, an expectation is addressed by its own model only."""
    for rep in reports:
        rep.expectations = [e for e in rep.expectations if e.status != "skipped"]


def _specifier(text: str) -> tuple[str, ModelId | ImplVariant]:
    try:
        return "model", ModelId.parse(text)
    except ValueError:
        pass
    try:
        return "impl", ImplVariant.parse(text)
    except ValueError:
        raise UsageError(f"{text!r} is neither a model nor an implementation") from None


def side_outcomes(p: Program, side: str, base: ModelId, max_events: int, workers: int):
    kind, what = _specifier(side)
    if kind == "model":
        return outcomes(p, what, max_events=max_events, workers=workers)
    if not p.has_transactions:
        raise UsageError(f"{side}: program has no transactions to implement")
    return outcomes(translate(p, what), base, max_events=max_events, workers=workers)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    lf = _load(args.file)
    model = ModelId.parse(args.model) if args.model else None
    reports = run_file(lf, model, args.max_events, args.workers)
    if args.json:
        print(json.dumps({"reports": [r.to_json_obj() for r in reports]}, indent=1))
    else:
        for rep in reports:
            print(f"{rep.program} [{rep.model}] {len(rep.outcomes)} outcomes, {rep.graph_count} graphs, {rep.seconds:.2f} s")
            for o in rep.outcomes:
                print(f"  {o}")
            for e in rep.expectations:
                if e.status != "skipped":
                    print(f"{e.verdict} {e.outcome}: {'PASS' if e.status == 'met' else 'FAIL'}")
    if args.report:
        _report_run(Path(args.report), reports)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_compare(args) -> int:
    lf = _load(args.file)
    base = ModelId.parse(args.base)
    t = time.perf_counter()
    left = side_outcomes(lf.program, args.left, base, args.max_events, args.workers).outcomes
    right = side_outcomes(lf.program, args.right, base, args.max_events, args.workers).outcomes
    only_left = sorted(o.format() for o in left - right)
    only_right = sorted(o.format() for o in right - left)
    result = {
        "program": lf.name,
        "left": args.left,
        "right": args.right,
        "equal": left == right,
        "left_outcomes": sorted(o.format() for o in left),
        "right_outcomes": sorted(o.format() for o in right),
        "left_only": only_left,
        "right_only": only_right,
        "seconds": round(time.perf_counter() - t, 4),
    }
    if args.json:
        print(json.dumps(result, indent=1))
    else:
        print(f"{lf.name}: {args.left} ({len(left)}) vs {args.right} ({len(right)})")
        if left == right:
            print("equal")
        for o in only_left:
            print(f"{args.right} misses {_compact(o)}")
        for o in only_right:
            print(f"{args.left} misses {_compact(o)}")
    if args.report:
        _report_compare(Path(args.report), result)
    return EXIT_OK if left == right else EXIT_FAIL


def cmd_corpus(args) -> int:
    from . import suites

    reports = []
    if args.suite == "fig1":
        rows = suites.fig1_rows(args.max_events)
    elif args.suite == "theorems":
        rows = suites.theorem_rows(args.max_events, rsync=not args.skip_rsync)
    else:
        rows, reports = suites.lock_rows(args.spin_bound, args.max_events)
    passed = all(r.passed is not False for r in rows)
    if args.json:
        print(json.dumps({"suite": args.suite, "passed": passed, "rows": [r.to_json_obj() for r in rows]}, indent=1))
    else:
        width = max(len(r.test) for r in rows)
        for r in rows:
            print(f"{r.status:4}  {r.test:<{width}}  {r.check}  ({r.detail})")
        ok = sum(1 for r in rows if r.passed)
        total = sum(1 for r in rows if r.passed is not None)
        print(f"{args.suite}: {ok}/{total} pass")
    if args.report:
        _report_corpus(Path(args.report), args.suite, rows, reports)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_check(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
    try:
        g = from_json(text)
    except GraphError as exc:
        raise UsageError(f"{args.file}: {exc}") from exc
    models = [ModelId.parse(args.model)] if args.model else list(ModelId)
    results = []
    for m in models:
        try:
            v = check(g, m)
        except ModelMismatch as exc:
            if args.model:
                raise UsageError(str(exc)) from exc
            continue
        results.append((m, v))
    out = [
        {
            "model": m.short,
            "consistent": v.consistent,
            "violated_axioms": list(v.violated_axioms),
            "witness_cycle": list(v.witness_cycle) if v.witness_cycle else None,
            "witness_relation": v.witness_relation,
        }
        for m, v in results
    ]
    if args.json:
        print(json.dumps({"graph": args.file, "verdicts": out}, indent=1))
    else:
        for m, v in results:
            print(f"{m.value}: {v.summary()}")
    if args.dot:
        cycle = next((v.witness_cycle for _, v in results if v.witness_cycle), None)
        Path(args.dot).write_text(to_dot(g, cycle), encoding="utf-8")
    if args.report:
        from .report import write_tsv

        write_tsv(
            Path(args.report) / "verdicts.tsv",
            ["model", "consistent", "violated_axioms", "witness_cycle"],
            [[o["model"], o["consistent"], ",".join(o["violated_axioms"]), " ".join(map(str, o["witness_cycle"] or []))] for o in out],
        )
    if args.expect:
        want = args.expect == "consistent"
        return EXIT_OK if all(v.consistent == want for _, v in results) else EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------


def _report_run(d: Path, reports: list[RunReport]) -> None:
    from .report import plot_outcome_sets, write_tsv

    write_tsv(d / "outcomes.tsv", ["program", "model", "outcome"],
              [[r.program, r.model, o] for r in reports for o in r.outcomes])
    write_tsv(d / "expectations.tsv", ["program", "model", "verdict", "outcome", "status"],
              [[r.program, e.model, e.verdict, e.outcome, e.status] for r in reports for e in r.expectations])
    violated = {e.outcome.replace(",", ", ") for r in reports for e in r.expectations if e.status == "violated"}
    name = reports[0].program if reports else "run"
    plot_outcome_sets(f"{name}: outcomes", {r.model: r.outcomes for r in reports}, d / "outcomes.png", violated)


def _report_compare(d: Path, result: dict) -> None:
    from .report import plot_outcome_sets, write_tsv

    rows = [[o, "both"] for o in sorted(set(result["left_outcomes"]) & set(result["right_outcomes"]))]
    rows += [[o, "left"] for o in result["left_only"]] + [[o, "right"] for o in result["right_only"]]
    write_tsv(d / "compare.tsv", ["outcome", "side"], rows)
    plot_outcome_sets(
        f"{result['program']}: {result['left']} vs {result['right']}",
        {result["left"]: result["left_outcomes"], result["right"]: result["right_outcomes"]},
        d / "compare.png",
        result["left_only"] + result["right_only"],
    )


def _report_corpus(d: Path, suite: str, rows, reports) -> None:
    from .mrsw import AXIOMS
    from .report import plot_axiom_rates, plot_pass_fail, write_tsv

    write_tsv(d / f"{suite}.tsv", ["test", "check", "status", "detail", "seconds"],
              [[r.test, r.check, r.status, r.detail, f"{r.seconds:.3f}"] for r in rows])
    plot_pass_fail(suite, [f"{r.test}: {r.check}" for r in rows], [r.passed for r in rows], d / f"{suite}.png")
    if reports:
        rates = [
            (f"{r.client} {r.impl}", {a: (r.holds[a] / r.executions if r.executions else 0.0) for a in AXIOMS})
            for r in reports
        ]
        plot_axiom_rates(rates, AXIOMS, d / "axioms.png")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--report", metavar="DIR", help="write TSV tables and PNG figures to DIR")
    common.add_argument("--max-events", type=int, default=DEFAULT_MAX_EVENTS,
                        help=f"event ceiling per program (default {DEFAULT_MAX_EVENTS})")
    common.add_argument("--workers", type=int, default=None,
                        help="parallel enumeration workers (default: $SILAB_WORKERS or 1)")

    p = argparse.ArgumentParser(prog="silab", description="Snapshot isolation litmus checker")
    p.add_argument("--version", action="version", version=f"silab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="enumerate outcomes and check expectations")
    run.add_argument("file")
    run.add_argument("--model", choices=["si", "si-hb", "si-axiomatic", "ra", "ra-rsync", "rsi"])
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", parents=[common], help="compare outcome sets of two models or implementations")
    cmp_.add_argument("file")
    cmp_.add_argument("--left", required=True, help="model (si, rsi, ...) or implementation (eager-si, cand-b, ...)")
    cmp_.add_argument("--right", required=True)
    cmp_.add_argument("--base", default="ra", choices=["ra", "ra-rsync"], help="model for implementation sides")
    cmp_.set_defaults(func=cmd_compare)

    corp = sub.add_parser("corpus", parents=[common], help="run a bundled suite")
    corp.add_argument("--suite", required=True, choices=["fig1", "theorems", "locks"])
    corp.add_argument("--spin-bound", type=int, default=2, help="maximum iterations per spin loop for lock clients")
    corp.add_argument("--skip-rsync", action="store_true", help="omit the RA+RSync rows of the theorem suite")
    corp.set_defaults(func=cmd_corpus)

    chk = sub.add_parser("check", parents=[common], help="check a graph JSON file")
    chk.add_argument("file")
    chk.add_argument("--model", choices=["si", "si-hb", "si-axiomatic", "ra", "ra-rsync", "rsi"])
    chk.add_argument("--dot", metavar="FILE", help="write a DOT rendering with the witness cycle")
    chk.add_argument("--expect", choices=["consistent", "inconsistent"], help="exit 1 unless every verdict matches")
    chk.set_defaults(func=cmd_check)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is None:
        args.workers = workers_from_env()
    try:
        return args.func(args)
    except (UsageError, ModelMismatch, EnumerationLimitError, ValueError) as exc:
        print(f"silab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
