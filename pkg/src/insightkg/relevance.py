"""Directed relevance matrix over ordered paper pairs.

Entry [i][j] is the chain value cosine(finding text of paper i, resolved text
of paper j): how strongly an open issue raised by paper i is answered by
paper j. The diagonal is never defined, and a row or column goes undefined
when the corresponding text embeds to a flagged zero vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import InsightBundle
from .errors import EmptyMatrixError, InvalidArgument


@dataclass
class RelevanceMatrix:
    """Square score matrix in corpus_id order plus a validity mask.

    ``valid[i][j]`` is True where the chain value is defined; exported JSON
    uses the complementary ``mask`` (True = undefined entry).
    """

    paper_ids: list[int]
    scores: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        n = len(self.paper_ids)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.scores.shape != (n, n) or self.valid.shape != (n, n):
            raise InvalidArgument("matrix shape does not match paper count")
        if list(self.paper_ids) != sorted(set(self.paper_ids)):
            raise InvalidArgument("paper ids must be unique and ascending")
        if np.any(np.diagonal(self.valid)):
            raise InvalidArgument("diagonal entries must be invalid")

    def index_of(self, paper_id: int) -> int:
        try:
            return self.paper_ids.index(paper_id)
        except ValueError:
            raise InvalidArgument(f"unknown paper id: {paper_id}") from None

    def row(self, paper_id: int) -> dict[int, float]:
        """Valid outgoing chain values keyed by target paper id."""
        i = self.index_of(paper_id)
        return {
            self.paper_ids[j]: float(self.scores[i, j])
            for j in range(len(self.paper_ids))
            if self.valid[i, j]
        }

    def to_dict(self) -> dict:
        return {
            "paper_ids": list(self.paper_ids),
            "scores": self.scores.tolist(),
            "mask": (~self.valid).tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RelevanceMatrix":
        mask = np.asarray(obj["mask"], dtype=bool)
        return cls(
            paper_ids=[int(i) for i in obj["paper_ids"]],
            scores=np.asarray(obj["scores"], dtype=np.float64),
            valid=~mask,
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "RelevanceMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_relevance_matrix(bundles: Sequence[InsightBundle], provider) -> RelevanceMatrix:
    """Embed each paper's two insight texts once and take all pairwise cosines.

    ``provider`` is an embedding provider (``embed_many`` + ``tag``). Bundle
    input order never matters: rows and columns are sorted by corpus_id.
    """
    if len(bundles) < 2:
        raise InvalidArgument("relevance matrix needs at least two papers")
    ordered = sorted(bundles, key=lambda b: b.paper_id)
    ids = [b.paper_id for b in ordered]
    if len(set(ids)) != len(ids):
        raise InvalidArgument("duplicate paper ids in bundles")

    finding_vecs = provider.embed_many([b.finding_text for b in ordered])
    resolved_vecs = provider.embed_many([b.resolved_text for b in ordered])
    finding_ok = np.array([not v.is_zero for v in finding_vecs], dtype=bool)
    resolved_ok = np.array([not v.is_zero for v in resolved_vecs], dtype=bool)
    if not finding_ok.any() and not resolved_ok.any():
        raise EmptyMatrixError("no paper carries any insight text to compare")

    F = np.stack([v.values for v in finding_vecs])
    R = np.stack([v.values for v in resolved_vecs])
    raw = F @ R.T  # unit rows, so this is cosine up to rounding
    scores = np.clip(raw, -1.0, 1.0)
    valid = finding_ok[:, None] & resolved_ok[None, :]
    np.fill_diagonal(valid, False)
    scores = np.where(valid, scores, 0.0)
    return RelevanceMatrix(paper_ids=ids, scores=scores, valid=valid)


def average_chain_score(matrix: RelevanceMatrix, paper_id: int) -> float | None:
    """Mean of the paper's valid outgoing entries; None when the row is empty."""
    i = matrix.index_of(paper_id)
    row_valid = matrix.valid[i]
    if not row_valid.any():
        return None
    return float(matrix.scores[i][row_valid].mean())
