"""Figure rendering for evaluation, fidelity, and study reports.

Every function writes a PNG next to the delimited report output and
returns the path. Rendering uses the Agg backend so it works headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .fidelity import FidelityTable  # noqa: E402
from .humaneval import EloState, LikertSummary  # noqa: E402
from .metrics import CorpusReport  # noqa: E402


def save_eval_figure(report: CorpusReport, path: str | Path) -> Path:
    """Bar chart of macro F1 / BS / P_k with per-document scatter."""
    path = Path(path)
    metrics = ("f1", "boundary_similarity", "pk")
    display = ("F1", "BS", "Pk")
    means = [getattr(report.overall, name) for name in metrics]
    fig, ax = plt.subplots(figsize=(6, 4))
    positions = range(len(metrics))
    ax.bar(positions, means, color=["#4c72b0", "#55a868", "#c44e52"], zorder=2)
    for x, name in zip(positions, metrics):
        values = [getattr(doc_report, name) for _, doc_report in report.per_document]
        ax.scatter([x] * len(values), values, color="black", s=12, alpha=0.5, zorder=3)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(display)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"Segmentation scores over {len(report.per_document)} documents")
    ax.grid(axis="y", alpha=0.3, zorder=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_fidelity_figure(table: FidelityTable, path: str | Path) -> Path:
    """Bar chart of pass proportions at the four relaxation levels."""
    path = Path(path)
    labels = ("exact", "whitespace", "punct/case", "length 5%")
    values = (table.exact, table.whitespace, table.punct_case, table.length_5pct)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(4), values, color="#4c72b0", zorder=2)
    ax.set_xticks(range(4))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("proportion passing")
    ax.set_title(f"Fidelity over {table.n} documents")
    ax.grid(axis="y", alpha=0.3, zorder=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_elo_figure(state: EloState, path: str | Path) -> Path:
    """Horizontal bars of ratings, best system on top."""
    path = Path(path)
    rows = sorted(state.ratings.items(), key=lambda kv: kv[1])
    systems = [s for s, _ in rows]
    ratings = [r for _, r in rows]
    fig, ax = plt.subplots(figsize=(6, max(2.5, 0.5 * len(rows) + 1)))
    ax.barh(range(len(rows)), ratings, color="#4c72b0", zorder=2)
    ax.axvline(state.initial, color="gray", linestyle="--", linewidth=1)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(systems)
    ax.set_xlabel("rating")
    ax.set_title("Pairwise preference ratings")
    ax.grid(axis="x", alpha=0.3, zorder=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_likert_figure(summaries: Mapping[str, LikertSummary], path: str | Path) -> Path:
    """Mean ratings with sample standard deviation bars."""
    path = Path(path)
    rows = sorted(summaries.items(), key=lambda kv: kv[1].mean)
    systems = [s for s, _ in rows]
    means = [v.mean for _, v in rows]
    stds = [v.std for _, v in rows]
    fig, ax = plt.subplots(figsize=(6, max(2.5, 0.5 * len(rows) + 1)))
    ax.barh(range(len(rows)), means, xerr=stds, color="#55a868", capsize=4, zorder=2)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(systems)
    ax.set_xlim(0, 5.5)
    ax.set_xlabel("mean rating (1-5)")
    ax.set_title("Direct quality ratings")
    ax.grid(axis="x", alpha=0.3, zorder=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
