"""Hierarchical forest construction over the topic subset.

Two forests share one skeleton and differ only in how candidates are scored:

* inheritance: roots and leaves rank by subset-internal in-citation count,
  and a node's candidates are the papers that cite it;
* relevance: roots rank by the mean of their valid outgoing chain values,
  leaves by the chain value itself, and a node's candidates are the targets
  of its valid outgoing entries.

Selection rules, applied identically in both: at most N roots, at most M
children per node, no node deeper than T (roots sit at depth 1), and a paper
selected anywhere is consumed for the entire forest. All ties break by
corpus_id ascending. Expansion is breadth-first within each tree, one tree
at a time.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvalidArgument
from .relevance import RelevanceMatrix, average_chain_score

FOREST_KINDS = ("inheritance", "relevance")


@dataclass(frozen=True)
class TreeParams:
    """N = max roots, M = max children per node, T = max depth (root = 1)."""

    N: int
    M: int
    T: int

    def __post_init__(self):
        for name in ("N", "M", "T"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise InvalidArgument(f"{name} must be an integer >= 1")

    def to_dict(self) -> dict:
        return {"N": self.N, "M": self.M, "T": self.T}


@dataclass
class TreeNode:
    paper_id: int
    depth: int
    parent_id: int | None
    edge_value: float | None  # chain value from parent (relevance only)
    rank_score: float  # score that ranked this node when it was chosen
    children: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "depth": self.depth,
            "parent_id": self.parent_id,
            "edge_value": self.edge_value,
            "rank_score": self.rank_score,
            "children": list(self.children),
        }


@dataclass
class Forest:
    kind: str
    params: TreeParams
    roots: list[int] = field(default_factory=list)
    nodes: dict[int, TreeNode] = field(default_factory=dict)  # construction order

    def __post_init__(self):
        if self.kind not in FOREST_KINDS:
            raise InvalidArgument(f"unknown forest kind: {self.kind!r}")

    def edges(self) -> list[tuple[int, int, float | None]]:
        """(parent, child, edge_value) triples in construction order."""
        return [
            (node.parent_id, node.paper_id, node.edge_value)
            for node in self.nodes.values()
            if node.parent_id is not None
        ]

    def max_depth(self) -> int:
        return max((node.depth for node in self.nodes.values()), default=0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "roots": list(self.roots),
            "nodes": [node.to_dict() for node in self.nodes.values()],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Forest":
        params = obj["params"]
        forest = cls(obj["kind"], TreeParams(params["N"], params["M"], params["T"]))
        forest.roots = [int(r) for r in obj["roots"]]
        for raw in obj["nodes"]:
            node = TreeNode(
                paper_id=int(raw["paper_id"]),
                depth=int(raw["depth"]),
                parent_id=None if raw["parent_id"] is None else int(raw["parent_id"]),
                edge_value=None if raw["edge_value"] is None else float(raw["edge_value"]),
                rank_score=float(raw["rank_score"]),
                children=[int(c) for c in raw["children"]],
            )
            forest.nodes[node.paper_id] = node
        return forest

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "Forest":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TraceStep:
    """One selection decision: which candidates were seen, which were taken.

    ``parent_id`` is None for root selection. ``chosen`` pairs each pick with
    its 1-based leaf sequence m (always 1 for roots).
    """

    n: int  # 1-based root sequence
    t: int  # depth of the nodes being chosen
    parent_id: int | None
    candidates: list[tuple[int, float]]
    chosen: list[tuple[int, int, float]]  # (m, paper_id, score)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "parent_id": self.parent_id,
            "candidates": [[i, s] for i, s in self.candidates],
            "chosen": [[m, i, s] for m, i, s in self.chosen],
        }


def write_trace(steps: Sequence[TraceStep], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for step in steps:
            fh.write(json.dumps(step.to_dict(), sort_keys=True))
            fh.write("\n")


def _ranked(candidates: Iterable[tuple[int, float]]) -> list[tuple[int, float]]:
    # Descending score; corpus_id ascending on equal scores.
    return sorted(candidates, key=lambda pair: (-pair[1], pair[0]))


def _grow_forest(
    kind: str,
    params: TreeParams,
    root_candidates,
    child_candidates,
    edge_value,
) -> tuple[Forest, list[TraceStep]]:
    """Shared construction skeleton.

    ``root_candidates(consumed)`` and ``child_candidates(node_id, consumed)``
    yield (paper_id, score) pairs for eligible papers only;
    ``edge_value(parent_id, child_id)`` annotates the edge or returns None.
    """
    forest = Forest(kind, params)
    trace: list[TraceStep] = []
    consumed: set[int] = set()

    for n in range(1, params.N + 1):
        roots = _ranked(root_candidates(consumed))
        if not roots:
            break
        root_id, root_score = roots[0]
        consumed.add(root_id)
        forest.roots.append(root_id)
        forest.nodes[root_id] = TreeNode(root_id, 1, None, None, root_score)
        trace.append(TraceStep(n, 1, None, roots, [(1, root_id, root_score)]))

        queue = deque([root_id])
        while queue:
            node_id = queue.popleft()
            node = forest.nodes[node_id]
            if node.depth >= params.T:
                continue  # depth bound: children would sit at T+1
            candidates = _ranked(child_candidates(node_id, consumed))
            if not candidates:
                continue  # branch terminates: nothing eligible to attach
            chosen = candidates[: params.M]
            trace.append(
                TraceStep(
                    n,
                    node.depth + 1,
                    node_id,
                    candidates,
                    [(m, i, s) for m, (i, s) in enumerate(chosen, start=1)],
                )
            )
            for child_id, score in chosen:
                consumed.add(child_id)
                node.children.append(child_id)
                forest.nodes[child_id] = TreeNode(
                    child_id,
                    node.depth + 1,
                    node_id,
                    edge_value(node_id, child_id),
                    score,
                )
                queue.append(child_id)
    return forest, trace


def build_inheritance_forest(
    paper_ids: Sequence[int],
    citation_edges: Iterable[tuple[int, int]],
    params: TreeParams,
) -> tuple[Forest, list[TraceStep]]:
    """Forest over the citation graph; edges are (citing, cited) pairs.

    Roots and children both rank by subset-internal in-citation count. A
    node's candidates are its citers, so every tree edge means "child cites
    parent". Papers without citations still qualify as roots (a tree may be
    a single node).
    """
    ids = sorted(set(int(p) for p in paper_ids))
    id_set = set(ids)
    citers: dict[int, set[int]] = {p: set() for p in ids}
    in_degree: dict[int, int] = {p: 0 for p in ids}
    for citing, cited in citation_edges:
        if citing not in id_set or cited not in id_set:
            raise InvalidArgument(f"citation edge ({citing}, {cited}) references unknown paper")
        if citing not in citers[cited]:
            citers[cited].add(citing)
            in_degree[cited] += 1

    def root_candidates(consumed: set[int]):
        return [(p, float(in_degree[p])) for p in ids if p not in consumed]

    def child_candidates(node_id: int, consumed: set[int]):
        return [(p, float(in_degree[p])) for p in citers[node_id] if p not in consumed]

    return _grow_forest(
        "inheritance", params, root_candidates, child_candidates, lambda a, b: None
    )


def build_relevance_forest(
    matrix: RelevanceMatrix,
    params: TreeParams,
) -> tuple[Forest, list[TraceStep]]:
    """Forest over the relevance matrix.

    Roots rank by average valid outgoing chain value (papers with fully
    masked rows are ineligible as roots); a node's candidates are the targets
    of its valid outgoing entries, ranked by chain value, and each chosen
    edge records that value. A fully masked matrix yields an empty forest.
    """
    averages = {
        paper_id: average_chain_score(matrix, paper_id) for paper_id in matrix.paper_ids
    }

    def root_candidates(consumed: set[int]):
        return [
            (p, score)
            for p, score in averages.items()
            if score is not None and p not in consumed
        ]

    def child_candidates(node_id: int, consumed: set[int]):
        return [
            (target, score)
            for target, score in matrix.row(node_id).items()
            if target not in consumed
        ]

    def edge_value(parent_id: int, child_id: int) -> float:
        return float(
            matrix.scores[matrix.index_of(parent_id), matrix.index_of(child_id)]
        )

    return _grow_forest("relevance", params, root_candidates, child_candidates, edge_value)
