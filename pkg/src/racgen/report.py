"""Figures and a TSV summary for a dataset stats report.

Outputs land next to the stats JSON: one bar chart of answer frequencies per
(split, question type), a paragraph-length histogram when the split files are
given, and ``<stem>_summary.tsv``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

MAX_BARS = 40


def _answer_key(answer: str) -> tuple:
    return (0, int(answer), "") if answer.isdigit() else (1, 0, answer)


def _bar_chart(hist: dict[str, int], title: str, path: Path) -> None:
    items = sorted(hist.items(), key=lambda kv: _answer_key(kv[0]))
    if len(items) > MAX_BARS:
        items = sorted(items, key=lambda kv: (-kv[1], _answer_key(kv[0])))[:MAX_BARS]
        title += f" (top {MAX_BARS})"
    fig, ax = plt.subplots(figsize=(max(4.0, 0.3 * len(items) + 2), 3.2))
    ax.bar([k for k, _ in items], [v for _, v in items], color="#4c72b0")
    ax.set_title(title)
    ax.set_ylabel("examples")
    ax.tick_params(axis="x", labelrotation=60 if len(items) > 8 else 0, labelsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def _length_histogram(lengths: dict[str, list[int]], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for side, values in sorted(lengths.items()):
        if values:
            ax.hist(values, bins=30, alpha=0.6, label=side)
    ax.set_xlabel("paragraph tokens (whitespace)")
    ax.set_ylabel("examples")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def summary_rows(stats: dict) -> list[dict]:
    rows = []
    for side, s in sorted(stats.get("splits", {}).items()):
        for qtype, n in s["counts"].items():
            hist = s["answer_histogram"].get(qtype, {})
            rows.append({
                "split": side,
                "qtype": qtype,
                "examples": n,
                "distinct_answers": len(hist),
                "label_balance": "" if qtype != "verify" or s["label_balance"] is None else f"{s['label_balance']:.4f}",
                "worlds": s["worlds"],
                "mean_paragraph_tokens": f"{s['mean_paragraph_tokens']:.2f}",
                "over_budget": s["over_budget"],
            })
    return rows


def write_report(stats_path: str | Path, datasets: dict[str, str | Path] | None = None,
                 figures: bool = True) -> list[Path]:
    """Render the report for ``stats_path``; returns the files written."""
    stats_path = Path(stats_path)
    stats = json.loads(stats_path.read_text("utf-8"))
    out_dir, stem = stats_path.parent, stats_path.stem
    written: list[Path] = []

    tsv = out_dir / f"{stem}_summary.tsv"
    rows = summary_rows(stats)
    with open(tsv, "w", newline="", encoding="utf-8") as fh:
        fields = ["split", "qtype", "examples", "distinct_answers", "label_balance", "worlds",
                  "mean_paragraph_tokens", "over_budget"]
        writer = csv.DictWriter(fh, fieldnames=fields, delimiter="\t", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    written.append(tsv)
    if not figures:
        return written

    for side, s in sorted(stats.get("splits", {}).items()):
        for qtype, hist in sorted(s["answer_histogram"].items()):
            if not hist:
                continue
            path = out_dir / f"{stem}_{side}_{qtype}_answers.png"
            _bar_chart(hist, f"{side} / {qtype} answers", path)
            written.append(path)

    if datasets:
        lengths: dict[str, list[int]] = {}
        for side, p in datasets.items():
            with open(p, encoding="utf-8") as fh:
                lengths[side] = [len(json.loads(line)["paragraph"].split()) for line in fh if line.strip()]
        path = out_dir / f"{stem}_paragraph_tokens.png"
        _length_histogram(lengths, path)
        written.append(path)
    return written


def print_rows(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    lines = ["\t".join(keys)] + ["\t".join(str(r[k]) for k in keys) for r in rows]
    return "\n".join(lines)
