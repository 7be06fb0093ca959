"""Render a build's artifacts as figures plus delimited summaries.

The report directory gets one PNG per view (citation degrees, relevance
heatmap, one diagram per forest, classifier metrics when an eval report
exists) and CSV files carrying the same numbers for spreadsheet use.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # render to files; no display in service environments

import matplotlib.pyplot as plt
import numpy as np

from .corpus import in_citation_counts
from .pipeline import ARTIFACTS, KgStore
from .trees import Forest

log = logging.getLogger(__name__)

MAX_BAR_PAPERS = 20
_FIG_DPI = 150


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)
    return path


def _short(title: str, limit: int = 28) -> str:
    return title if len(title) <= limit else title[: limit - 1] + "…"


def citation_report(store: KgStore, out_dir: Path) -> list[Path]:
    counts = in_citation_counts(store.subset)
    papers = store.subset.by_id()
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))

    csv_path = out_dir / "citations.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["paper_id", "title", "cited_by"])
        for paper_id, count in ranked:
            writer.writerow([paper_id, papers[paper_id].title, count])

    top = ranked[:MAX_BAR_PAPERS]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.35 * len(top))))
    labels = [f"{pid}: {_short(papers[pid].title)}" for pid, _ in top]
    ax.barh(range(len(top)), [c for _, c in top], color="#4878d0")
    ax.set_yticks(range(len(top)))
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("citations within subset")
    ax.set_title(f"Most cited papers ({store.config.topic!r} subset)")
    return [csv_path, _save(fig, out_dir / "citations.png")]


def matrix_report(store: KgStore, out_dir: Path) -> list[Path]:
    matrix = store.matrix
    csv_path = out_dir / "relevance_matrix.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["finding_paper"] + [str(p) for p in matrix.paper_ids])
        for i, paper_id in enumerate(matrix.paper_ids):
            row = [
                f"{matrix.scores[i, j]:.6f}" if matrix.valid[i, j] else ""
                for j in range(len(matrix.paper_ids))
            ]
            writer.writerow([paper_id] + row)

    display = np.where(matrix.valid, matrix.scores, np.nan)
    fig, ax = plt.subplots(figsize=(7, 6))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad(color="#dddddd")  # masked entries
    image = ax.imshow(display, cmap=cmap, vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(len(matrix.paper_ids)))
    ax.set_xticklabels(matrix.paper_ids, rotation=90, fontsize=6)
    ax.set_yticks(range(len(matrix.paper_ids)))
    ax.set_yticklabels(matrix.paper_ids, fontsize=6)
    ax.set_xlabel("resolved side")
    ax.set_ylabel("finding side")
    ax.set_title("Relevance chain values")
    fig.colorbar(image, ax=ax, shrink=0.8)
    return [csv_path, _save(fig, out_dir / "relevance_matrix.png")]


def _tree_positions(forest: Forest) -> dict[int, tuple[float, float]]:
    """Leaves get consecutive x slots, parents center over their children."""
    pos: dict[int, tuple[float, float]] = {}
    next_x = [0.0]

    def place(node_id: int) -> float:
        node = forest.nodes[node_id]
        if node.children:
            xs = [place(child) for child in node.children]
            x = sum(xs) / len(xs)
        else:
            x = next_x[0]
            next_x[0] += 1.0
        pos[node_id] = (x, float(-node.depth))
        return x

    for root in forest.roots:
        place(root)
        next_x[0] += 0.5  # gap between trees
    return pos


def forest_report(store: KgStore, out_dir: Path) -> list[Path]:
    papers = store.subset.by_id()
    csv_path = out_dir / "forests.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "parent_id", "paper_id", "depth", "edge_value", "rank_score"])
        for kind in ("inheritance", "relevance"):
            for node in store.forests[kind].nodes.values():
                writer.writerow([
                    kind,
                    "" if node.parent_id is None else node.parent_id,
                    node.paper_id,
                    node.depth,
                    "" if node.edge_value is None else f"{node.edge_value:.4f}",
                    f"{node.rank_score:.4f}",
                ])

    paths = [csv_path]
    for kind in ("inheritance", "relevance"):
        forest = store.forests[kind]
        fig, ax = plt.subplots(figsize=(9, 5))
        ax.set_title(f"{kind.capitalize()} forest (N={forest.params.N}, "
                     f"M={forest.params.M}, T={forest.params.T})")
        ax.axis("off")
        if forest.nodes:
            pos = _tree_positions(forest)
            for parent_id, child_id, value in forest.edges():
                x0, y0 = pos[parent_id]
                x1, y1 = pos[child_id]
                ax.plot([x0, x1], [y0, y1], color="#888888", linewidth=1, zorder=1)
                if value is not None:
                    ax.text((x0 + x1) / 2, (y0 + y1) / 2, f"{value:.2f}",
                            fontsize=6, color="#555555", ha="center")
            for node_id, (x, y) in pos.items():
                ax.scatter([x], [y], s=320, color="#4878d0", zorder=2)
                ax.text(x, y, str(node_id), ha="center", va="center",
                        fontsize=7, color="white", zorder=3)
                ax.annotate(_short(papers[node_id].title, 22), (x, y),
                            textcoords="offset points", xytext=(0, -16),
                            fontsize=5.5, ha="center", color="#333333")
        else:
            ax.text(0.5, 0.5, "empty forest", ha="center", va="center",
                    transform=ax.transAxes, color="#777777")
        paths.append(_save(fig, out_dir / f"forest_{kind}.png"))
    return paths


def metrics_report(store: KgStore, out_dir: Path) -> list[Path]:
    eval_path = Path(store.config.out_dir) / ARTIFACTS["eval"]
    if not eval_path.is_file():
        return []
    with open(eval_path, "r", encoding="utf-8") as fh:
        report = json.load(fh)

    classes = report["classes"]
    csv_path = out_dir / "metrics.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "f1"])
        for name in classes:
            metrics = report["per_class"][name]
            writer.writerow([name] + [f"{metrics[k]:.4f}" for k in ("precision", "recall", "f1")])
        writer.writerow(["macro_f1", "", "", f"{report['macro_f1']:.4f}"])

    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.arange(len(classes))
    width = 0.26
    for offset, key, color in ((-width, "precision", "#4878d0"),
                               (0.0, "recall", "#ee854a"),
                               (width, "f1", "#6acc64")):
        ax.bar(x + offset, [report["per_class"][c][key] for c in classes],
               width=width, label=key, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels(classes)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Held-out metrics (macro-F1 {report['macro_f1']:.2f})")
    ax.legend(fontsize=8)
    return [csv_path, _save(fig, out_dir / "metrics.png")]


def build_report(store: KgStore, report_dir: str | Path) -> list[Path]:
    """Write every report artifact; returns the paths in creation order."""
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    written += citation_report(store, out)
    written += matrix_report(store, out)
    written += forest_report(store, out)
    written += metrics_report(store, out)
    log.info("report: wrote %d files to %s", len(written), out)
    return written
