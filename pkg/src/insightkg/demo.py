"""Self-contained demo workspace: synthetic corpus, labels, frozen model.

Builds everything a full pipeline run needs without external data:

* a small annotated corpus (four research threads plus off-topic decoys)
  whose conclusion sections mix resolved-style and finding-style sentences;
* a label file whose split/label counts match the published issue-status
  dataset accounting (train 532/334/259, test 165/121/89);
* a classifier trained on a slice of those labels and frozen to disk, so
  pipeline runs are fast and byte-reproducible;
* a ready-to-run JSON config wired to relative paths.

Everything is deterministic: no randomness, no timestamps in content.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from . import classifier as classifier_mod
from .corpus import filter_by_topic
from .embedding import ProviderConfig, make_provider
from .pipeline import df_from_subset
from .trees import TreeParams

log = logging.getLogger(__name__)

TOPIC = "graph reasoning"
PROVIDER = ProviderConfig(kind="hash-tfidf", dim=512, seed=7)
TREE_PARAMS = TreeParams(3, 3, 3)

TRAIN_COUNTS = {"resolved": 532, "neutral": 334, "finding": 259}
TEST_COUNTS = {"resolved": 165, "neutral": 121, "finding": 89}

FROZEN_SLICE_PER_CLASS = 20  # training rows per class for the frozen model

_THREADS = ("retrieval", "multi-hop", "benchmark", "pretraining")
_PAPERS_PER_THREAD = 5
_BASE_ID = 101

_TEMPLATES = {
    "resolved": (
        "We demonstrated that the {a} model improves {b} accuracy.",
        "Our approach achieves strong {b} results with a compact {a} encoder.",
        "The proposed {a} system outperforms prior baselines on {b}.",
    ),
    "neutral": (
        "The {a} corpus contains documents about {b}.",
        "This section describes the {a} setup used for {b}.",
        "The table lists {a} statistics for each {b} configuration.",
    ),
    "finding": (
        "However, the {a} model still struggles with {b}.",
        "Handling {b} remains an unresolved challenge for future {a} work.",
        "The {a} pipeline fails on difficult {b} cases.",
    ),
}

_BANK_A = (
    "retrieval", "ranking", "graph", "neural", "sparse", "dense", "hybrid",
    "layered", "symbolic", "compact", "recurrent", "attention", "memory",
    "fusion", "streaming", "modular", "adaptive", "federated", "bilingual",
    "structured",
)

_BANK_B = (
    "reasoning", "linking", "inference", "benchmarks", "passages", "entities",
    "citations", "queries", "paragraphs", "tables", "questions", "answers",
    "documents", "relations", "annotations", "summaries", "chains", "topics",
    "figures", "reviews",
)


def generate_labeled_sentences() -> list[dict]:
    """Deterministic label rows matching the published split counts."""
    rows = []
    for split, counts in (("train", TRAIN_COUNTS), ("test", TEST_COUNTS)):
        for label in ("resolved", "neutral", "finding"):
            templates = _TEMPLATES[label]
            for i in range(counts[label]):
                template = templates[i % len(templates)]
                a = _BANK_A[(i // len(templates)) % len(_BANK_A)]
                b = _BANK_B[(i // (len(templates) * len(_BANK_A))) % len(_BANK_B)]
                text = template.format(a=a, b=b)
                if split == "test":
                    # Keep test sentences lexically distinct from train ones.
                    text = text[:-1] + " under a held-out protocol."
                rows.append({"text": text, "label": label, "split": split})
    return rows


def _compose_doc(
    corpus_id: int,
    title: str,
    sections: list[tuple[str, list[str]]],
    cites: list[int],
    year: int,
) -> dict:
    """Assemble body text and exact character-offset annotations."""
    text_parts: list[str] = []
    cursor = 0

    def push(chunk: str) -> tuple[int, int]:
        nonlocal cursor
        start = cursor
        text_parts.append(chunk)
        cursor += len(chunk)
        return start, cursor

    header_spans = []
    paragraph_spans = []
    for index, (header, paragraphs) in enumerate(sections):
        if index:
            push("\n\n")
        start, end = push(header)
        header_spans.append({"start": start, "end": end})
        for paragraph in paragraphs:
            push("\n\n")
            start, end = push(paragraph)
            paragraph_spans.append({"start": start, "end": end})

    return {
        "corpusid": corpus_id,
        "title": title,
        "text": "".join(text_parts),
        "year": year,
        "venue": "Synthetic Proceedings",
        "annotations": {
            "section_headers": header_spans,
            "paragraphs": paragraph_spans,
            "bibentry": [
                {"key": f"b{k}", "cited_corpusid": cited} for k, cited in enumerate(cites)
            ],
        },
    }


def _thread_paper(thread: str, thread_index: int, k: int) -> dict:
    corpus_id = _BASE_ID + thread_index * _PAPERS_PER_THREAD + k
    title = f"{thread.capitalize()} methods for graph reasoning, part {k + 1}"
    intro = (
        f"This paper studies {thread} techniques for graph reasoning. "
        f"We revisit how {thread} systems process large collections."
    )
    method = (
        f"Our {thread} architecture combines lexical features with learned scores. "
        f"Each stage is evaluated on shared {thread} splits."
    )
    conclusion_resolved = (
        f"We demonstrated that the {thread} model improves benchmark accuracy. "
        f"Our approach achieves strong reasoning results on {thread} evaluations."
    )
    conclusion_finding = (
        f"However, the {thread} model still struggles with noisy citations. "
        f"Scaling to web corpora remains an unresolved challenge for future {thread} work."
    )
    cites: list[int] = []
    if k > 0:
        cites.append(corpus_id - 1)
    if k > 1:
        cites.append(corpus_id - 2)
    if thread_index > 0 and k == 0:
        cites.append(_BASE_ID)  # every thread's opener cites the hub paper
    sections = [
        ("Introduction", [intro]),
        ("Method", [method]),
        ("Conclusion and Discussion", [conclusion_resolved, conclusion_finding]),
    ]
    return _compose_doc(corpus_id, title, sections, cites, year=2015 + k)


def _decoy_paper(corpus_id: int) -> dict:
    # Never matches the topic keyword; exercises the ingest filter.
    title = f"Soil moisture sensing survey {corpus_id}"
    sections = [
        ("Introduction", ["Field sensors estimate moisture from capacitance readings."]),
        ("Conclusion", ["We demonstrated that calibrated probes improve farm yield."]),
    ]
    return _compose_doc(corpus_id, title, sections, cites=[], year=2012)


def generate_corpus_docs() -> list[dict]:
    docs = []
    for thread_index, thread in enumerate(_THREADS):
        for k in range(_PAPERS_PER_THREAD):
            docs.append(_thread_paper(thread, thread_index, k))
    docs.append(_decoy_paper(900))
    docs.append(_decoy_paper(901))
    return docs


def build_demo(workdir: str | Path) -> dict[str, Path]:
    """Write corpus, labels, frozen model, and config; return their paths."""
    root = Path(workdir)
    root.mkdir(parents=True, exist_ok=True)

    corpus_path = root / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in generate_corpus_docs():
            fh.write(json.dumps(doc, sort_keys=True, ensure_ascii=False))
            fh.write("\n")

    labels_path = root / "labels.jsonl"
    rows = generate_labeled_sentences()
    with open(labels_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False))
            fh.write("\n")

    # The frozen model must carry the provider tag of the real subset, so
    # build the same DF table the ingest stage will produce.
    subset = filter_by_topic(generate_corpus_docs(), TOPIC)
    provider = make_provider(PROVIDER, df_from_subset(subset))

    per_class: dict[str, list[dict]] = {"resolved": [], "neutral": [], "finding": []}
    for row in rows:
        if row["split"] == "train" and len(per_class[row["label"]]) < FROZEN_SLICE_PER_CLASS:
            per_class[row["label"]].append(row)
    slice_rows = [row for label in ("resolved", "neutral", "finding") for row in per_class[label]]
    vectors = provider.embed_many([row["text"] for row in slice_rows])
    model = classifier_mod.train(
        vectors,
        [row["label"] for row in slice_rows],
        kernel="rbf",
        grid_c=(1.0, 10.0),
        grid_gamma=(0.01, 0.1),
        folds=2,
    )
    model_path = root / "model.json"
    model.save(model_path)

    config_path = root / "config.json"
    config = {
        "corpus": "corpus.jsonl",
        "topic": TOPIC,
        "out_dir": "out",
        "provider": {"kind": PROVIDER.kind, "dim": PROVIDER.dim, "seed": PROVIDER.seed},
        "model_path": "model.json",
        "labels": "labels.jsonl",
        "inheritance_params": TREE_PARAMS.to_dict(),
        "relevance_params": TREE_PARAMS.to_dict(),
        "addr": "127.0.0.1:8765",
    }
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")

    log.info("demo workspace ready under %s", root)
    return {
        "corpus": corpus_path,
        "labels": labels_path,
        "model": model_path,
        "config": config_path,
    }
