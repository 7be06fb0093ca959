"""Shared fixtures: hand-built corpora, stub providers, stub labelers.

The seven-paper citation fixture is constructed so every derived quantity is
small enough to compute by hand:

* every title starts with "HotpotQA" (topic match, df = 7 common term);
* each paper has two private words appearing twice each (title + one
  conclusion sentence), so they dominate its keyword ranking;
* each tree edge shares exactly one word between its two papers (df = 2);
* every resolved sentence contains "confirm", every finding sentence
  contains "problem", which the stub labeler keys on.

Citations (citing -> cited): 2->1, 3->1, 5->1, 6->1, 4->2, 3->2, 7->3, 2->3.
In-degrees: p1=4, p2=2, p3=2, rest 0. With N=1, M=2, T=3 the inheritance
forest is p1 -> {p2 -> p4, p3 -> p7}.
"""

from __future__ import annotations

import numpy as np
import pytest

from insightkg.corpus import TopicSubset, filter_by_topic
from insightkg.embedding import EmbeddingVector
from insightkg.classifier import InsightBundle, extract_insight_bundles
from insightkg.relevance import RelevanceMatrix
from insightkg.segmenter import segment


# ---------------------------------------------------------------------------
# Raw document builder


def compose_doc(
    corpusid: int,
    title: str,
    sections: list[tuple[str, list[str]]],
    cites: list[int] = (),
    year: int | None = None,
) -> dict:
    """Assemble a raw corpus document with correct annotation offsets."""
    parts: list[str] = []
    cursor = 0
    header_spans: list[dict] = []
    para_spans: list[dict] = []

    def push(text: str) -> tuple[int, int]:
        nonlocal cursor
        start = cursor
        parts.append(text)
        cursor += len(text)
        end = cursor
        parts.append("\n\n")
        cursor += 2
        return start, end

    push(title)
    for header, paragraphs in sections:
        start, end = push(header)
        header_spans.append({"start": start, "end": end})
        for para in paragraphs:
            start, end = push(para)
            para_spans.append({"start": start, "end": end})

    doc = {
        "corpusid": corpusid,
        "title": title,
        "text": "".join(parts),
        "annotations": {
            "section_headers": header_spans,
            "paragraphs": para_spans,
            "bibentry": [
                {"key": f"b{k}", "cited_corpusid": cited}
                for k, cited in enumerate(cites)
            ],
        },
    }
    if year is not None:
        doc["year"] = year
    return doc


# ---------------------------------------------------------------------------
# The seven-paper citation fixture

FIG1_TOPIC = "hotpot"

_FIG1_WORDS = {
    # id: (title suffix, resolved sentence, finding sentence)
    1: (
        "saturation leakage",
        "We confirm saturation and decomposition and retrieval.",
        "Open problem remains leakage.",
    ),
    2: (
        "subquestions hops",
        "We confirm subquestions and decomposition and attention.",
        "Open problem remains hops.",
    ),
    3: (
        "ranker corpora",
        "We confirm ranker and retrieval and memory.",
        "Open problem remains corpora.",
    ),
    4: (
        "sparsity heads",
        "We confirm sparsity and attention.",
        "Open problem remains heads.",
    ),
    5: (
        "curricula distractors",
        "We confirm curricula.",
        "Open problem remains distractors.",
    ),
    6: (
        "calibration abstention",
        "We confirm calibration.",
        "Open problem remains abstention.",
    ),
    7: (
        "gating buffers",
        "We confirm gating and memory.",
        "Open problem remains buffers.",
    ),
}

_FIG1_CITES = {
    1: [],
    2: [1, 3],
    3: [1, 2],
    4: [2],
    5: [1],
    6: [1],
    7: [3],
}

FIG1_EDGES = {(2, 1), (3, 1), (5, 1), (6, 1), (4, 2), (3, 2), (7, 3), (2, 3)}


def fig1_docs() -> list[dict]:
    docs = []
    for pid, (suffix, resolved, finding) in _FIG1_WORDS.items():
        docs.append(
            compose_doc(
                corpusid=pid,
                title=f"HotpotQA {suffix}",
                sections=[
                    ("Introduction", ["We study answering over two documents."]),
                    ("Conclusion", [resolved, finding]),
                ],
                cites=_FIG1_CITES[pid],
            )
        )
    return docs


@pytest.fixture(scope="session")
def fig1_subset() -> TopicSubset:
    return filter_by_topic(fig1_docs(), FIG1_TOPIC)


class StubLabeler:
    """Frozen sentence labeler keyed on marker substrings."""

    def label_for(self, text: str) -> str:
        if "confirm" in text:
            return "resolved"
        if "problem" in text:
            return "finding"
        return "neutral"


def bundles_for(subset: TopicSubset) -> list[InsightBundle]:
    segmented = []
    for paper in subset.papers:
        spans = segment(paper.insight_text, paper_id=paper.corpus_id)
        segmented.append((paper.corpus_id, [s.text for s in spans]))
    return extract_insight_bundles(segmented, StubLabeler())


@pytest.fixture(scope="session")
def fig1_bundles(fig1_subset) -> list[InsightBundle]:
    return bundles_for(fig1_subset)


# ---------------------------------------------------------------------------
# The relevance-chain fixture: four valid chains forming two branch paths.


@pytest.fixture()
def fig2_matrix() -> RelevanceMatrix:
    ids = [1, 2, 3, 4, 5, 6, 7]
    n = len(ids)
    scores = np.zeros((n, n))
    valid = np.zeros((n, n), dtype=bool)
    for src, dst, value in ((1, 2, 0.9), (1, 3, 0.8), (2, 4, 0.75), (3, 7, 0.7)):
        scores[ids.index(src), ids.index(dst)] = value
        valid[ids.index(src), ids.index(dst)] = True
    return RelevanceMatrix(paper_ids=ids, scores=scores, valid=valid)


# ---------------------------------------------------------------------------
# Stub embedding provider with hand-chosen vectors


class StubProvider:
    """Maps exact texts to fixed vectors; unknown or empty text is flagged."""

    def __init__(self, vectors: dict[str, list[float]], dim: int = 3, tag: str = "stub/test/1"):
        self.vectors = vectors
        self.dim = dim
        self.tag = tag

    def embed(self, text: str) -> EmbeddingVector:
        raw = self.vectors.get(text)
        if raw is None:
            return EmbeddingVector(
                values=np.zeros(self.dim), provider_tag=self.tag, is_zero=True
            )
        arr = np.asarray(raw, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        return EmbeddingVector(values=arr / norm, provider_tag=self.tag)

    def embed_many(self, texts) -> list[EmbeddingVector]:
        return [self.embed(t) for t in texts]
