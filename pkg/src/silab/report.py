"""TSV tables and matplotlib figures for CLI reports."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PASS_COLOR = "#4c956c"
FAIL_COLOR = "#d1495b"
NEUTRAL_COLOR = "#8d99ae"


def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
    return path


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_outcome_sets(title: str, columns: dict[str, Sequence[str]], path: Path, highlight: Iterable[str] = ()) -> Path:
    """Membership grid: one row per outcome, one column per model or implementation."""
    every = sorted({o for outs in columns.values() for o in outs})
    names = list(columns)
    marked = set(highlight)
    height = max(2.0, 0.35 * len(every) + 1.2)
    fig, ax = plt.subplots(figsize=(1.6 * len(names) + 3.5, height))
    for j, name in enumerate(names):
        present = set(columns[name])
        for i, o in enumerate(every):
            color = PASS_COLOR if o in present else "#edf2f4"
            ax.add_patch(plt.Rectangle((j, i), 0.92, 0.86, color=color))
    ax.set_xlim(0, len(names))
    ax.set_ylim(0, max(1, len(every)))
    ax.set_xticks([j + 0.46 for j in range(len(names))])
    ax.set_xticklabels(names)
    ax.set_yticks([i + 0.43 for i in range(len(every))])
    ax.set_yticklabels(every, fontsize=8)
    for label in ax.get_yticklabels():
        if label.get_text() in marked:
            label.set_color(FAIL_COLOR)
            label.set_fontweight("bold")
    ax.invert_yaxis()
    ax.set_title(title)
    ax.tick_params(length=0)
    for side in ax.spines.values():
        side.set_visible(False)
    return _save(fig, path)


def plot_pass_fail(title: str, labels: Sequence[str], passed: Sequence[bool | None], path: Path) -> Path:
    """One horizontal bar per check; ``None`` marks checks that did not apply."""
    fig, ax = plt.subplots(figsize=(7.5, max(2.0, 0.3 * len(labels) + 1.0)))
    colors = [NEUTRAL_COLOR if p is None else PASS_COLOR if p else FAIL_COLOR for p in passed]
    ax.barh(range(len(labels)), [1] * len(labels), color=colors)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xticks([])
    ok = sum(1 for p in passed if p)
    total = sum(1 for p in passed if p is not None)
    ax.set_title(f"{title}: {ok}/{total} pass")
    return _save(fig, path)


def plot_axiom_rates(rows: Sequence[tuple[str, dict[str, float]]], axioms: Sequence[str], path: Path) -> Path:
    """Grouped bars of the fraction of executions on which each axiom holds."""
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(rows) + 2), 4.2))
    width = 0.8 / max(1, len(axioms))
    for k, axiom in enumerate(axioms):
        xs = [i + k * width for i in range(len(rows))]
        ax.bar(xs, [r[axiom] for _, r in rows], width=width, label=axiom)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(rows))])
    ax.set_xticklabels([name for name, _ in rows], rotation=45, ha="right", fontsize=7)
    ax.set_ylim(0, 1.25)
    ax.set_yticks([0, 0.25, 0.5, 0.75, 1.0])
    ax.set_ylabel("fraction of executions")
    ax.legend(fontsize=7, ncol=len(axioms), loc="upper center")
    return _save(fig, path)


__all__ = ["plot_axiom_rates", "plot_outcome_sets", "plot_pass_fail", "write_tsv"]
