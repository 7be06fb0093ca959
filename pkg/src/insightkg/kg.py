"""Decorate forests into renderable knowledge graphs.

Nodes carry the paper title as their display label plus a three-field hover
block (keywords, issue-resolved text, issue-finding text, the latter two
truncated). Edge direction depends on the forest kind: inheritance edges run
citing paper -> cited paper (child -> parent, since children are the citers),
relevance edges run finding -> resolved (parent -> child). Exports are
canonical JSON so identical graphs always serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .classifier import InsightBundle
from .corpus import PaperRecord, TopicSubset
from .embedding import DocumentFrequencyTable
from .errors import AssemblyError, InvalidArgument
from .textutil import tokenize, truncate
from .trees import Forest, TreeParams

KEYWORD_COUNT = 5
EDGE_KEYWORD_COUNT = 3
TOOLTIP_CHAR_LIMIT = 600
CITATION_EDGE_NOTE = "cites"


def _term_scores(text: str, df_table: DocumentFrequencyTable) -> dict[str, float]:
    tf: dict[str, int] = {}
    for token in tokenize(text):
        tf[token] = tf.get(token, 0) + 1
    return {term: count * df_table.idf(term) for term, count in tf.items()}


def keyword_text(paper: PaperRecord) -> str:
    return paper.title + "\n" + paper.insight_text


def extract_keywords(
    paper: PaperRecord, df_table: DocumentFrequencyTable, k: int = KEYWORD_COUNT
) -> list[str]:
    """Top-k TF-IDF terms of the paper's title plus insight text.

    Ranked by weight descending with alphabetical tie-break; returns fewer
    than k terms when the vocabulary is smaller.
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    scores = _term_scores(keyword_text(paper), df_table)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [term for term, _ in ranked[:k]]


def co_occurring_vocabulary(
    a: PaperRecord,
    b: PaperRecord,
    df_table: DocumentFrequencyTable,
    k: int = EDGE_KEYWORD_COUNT,
) -> list[str]:
    """Shared terms of two papers' top-2k keyword sets, by summed weight."""
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    scores_a = _term_scores(keyword_text(a), df_table)
    scores_b = _term_scores(keyword_text(b), df_table)
    top_a = set(extract_keywords(a, df_table, k=2 * k))
    top_b = set(extract_keywords(b, df_table, k=2 * k))
    shared = top_a & top_b
    ranked = sorted(shared, key=lambda term: (-(scores_a[term] + scores_b[term]), term))
    return ranked[:k]


@dataclass
class KgNode:
    id: int
    label: str
    keywords: list[str]
    issue_resolved: str
    issue_finding: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "title": {
                "keywords": list(self.keywords),
                "issue_resolved": self.issue_resolved,
                "issue_finding": self.issue_finding,
            },
        }


@dataclass
class KgEdge:
    from_id: int
    to_id: int
    label: str
    title: str

    def to_dict(self) -> dict:
        return {
            "from": self.from_id,
            "to": self.to_id,
            "label": self.label,
            "title": self.title,
            "arrows": "to",
        }


@dataclass
class KnowledgeGraph:
    kind: str
    params: TreeParams
    topic: str
    nodes: list[KgNode] = field(default_factory=list)
    edges: list[KgEdge] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": {
                "N": self.params.N,
                "M": self.params.M,
                "T": self.params.T,
                "topic": self.topic,
            },
            "nodes": [n.to_dict() for n in sorted(self.nodes, key=lambda n: n.id)],
            "edges": [
                e.to_dict()
                for e in sorted(self.edges, key=lambda e: (e.from_id, e.to_id))
            ],
        }


def assemble_kg(
    forest: Forest,
    subset: TopicSubset,
    bundles: Sequence[InsightBundle],
    df_table: DocumentFrequencyTable,
    keyword_count: int = KEYWORD_COUNT,
    edge_keyword_count: int = EDGE_KEYWORD_COUNT,
) -> KnowledgeGraph:
    """Turn a forest into the export graph.

    Every forest node must resolve to a subset paper and an insight bundle.
    Inheritance edges flip parent/child so the arrow shows who cites whom;
    relevance edges keep parent -> child (finding -> resolved) and carry the
    chain value to 4 decimals as their hover text.
    """
    papers = subset.by_id()
    bundle_map = {b.paper_id: b for b in bundles}
    graph = KnowledgeGraph(kind=forest.kind, params=forest.params, topic=subset.topic_keyword)

    for paper_id in forest.nodes:
        paper = papers.get(paper_id)
        if paper is None:
            raise AssemblyError(f"forest node {paper_id} is not in the subset")
        bundle = bundle_map.get(paper_id)
        if bundle is None:
            raise AssemblyError(f"no insight bundle for paper {paper_id}")
        # A blank title would make the node unreadable; fall back to the id.
        label = paper.title if paper.title else f"paper {paper_id}"
        graph.nodes.append(
            KgNode(
                id=paper_id,
                label=label,
                keywords=extract_keywords(paper, df_table, k=keyword_count),
                issue_resolved=truncate(bundle.resolved_text, TOOLTIP_CHAR_LIMIT),
                issue_finding=truncate(bundle.finding_text, TOOLTIP_CHAR_LIMIT),
            )
        )

    for parent_id, child_id, value in forest.edges():
        shared = co_occurring_vocabulary(
            papers[parent_id], papers[child_id], df_table, k=edge_keyword_count
        )
        label = ", ".join(shared)
        if forest.kind == "inheritance":
            # The child is the citing paper; arrows follow the citation.
            graph.edges.append(KgEdge(child_id, parent_id, label, CITATION_EDGE_NOTE))
        else:
            graph.edges.append(KgEdge(parent_id, child_id, label, f"{value:.4f}"))
    return graph


def export_kg(kg: KnowledgeGraph) -> str:
    """Canonical JSON text: sorted keys, nodes by id, edges by (from, to)."""
    return json.dumps(
        kg.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ) + "\n"


def save_kg(kg: KnowledgeGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(export_kg(kg))
