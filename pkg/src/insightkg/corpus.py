"""Corpus ingestion: topic filtering, insight-section extraction, citations.

Input is a JSON Lines stream, one paper object per line:

    {"corpusid": int, "title": str, "text": str,
     "annotations": {"section_headers": [{"start": int, "end": int}, ...],
                     "paragraphs":      [{"start": int, "end": int}, ...],
                     "bibentry":        [{"key": str, "cited_corpusid": int}, ...]},
     "year": int (optional), "venue": str (optional)}

Offsets index into ``text``. The full field reference, including the mapping
from real S2ORC field names, lives in docs/corpus-format.md.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InputError, InvalidArgument

log = logging.getLogger(__name__)

# Lowercased stems a header must contain to count as an insight section.
INSIGHT_HEADER_STEMS = ("conclusion", "discuss", "limitation")


@dataclass
class PaperRecord:
    """One paper of the topic subset."""

    corpus_id: int
    title: str
    body: str
    sections: list[tuple[str, list[str]]]
    insight_text: str
    bib_links: dict[str, int]
    year: int | None = None
    venue: str | None = None
    skipped_annotation_count: int = 0


@dataclass
class TopicSubset:
    """Papers matching one topic keyword plus their internal citation graph."""

    topic_keyword: str
    papers: list[PaperRecord]
    citation_edges: set[tuple[int, int]]
    dropped_citation_count: int = 0
    malformed_document_count: int = 0

    def ids(self) -> list[int]:
        return [p.corpus_id for p in self.papers]

    def by_id(self) -> dict[int, PaperRecord]:
        return {p.corpus_id: p for p in self.papers}


def _spans(annotations: dict, key: str) -> list[tuple[int, int]]:
    out = []
    for item in annotations.get(key) or []:
        out.append((int(item["start"]), int(item["end"])))
    return out


def extract_insight_sections(raw_paper: dict) -> tuple[list[tuple[str, list[str]]], str, int]:
    """Slice the body into (header, paragraphs) sections and pull insight text.

    A section is an insight section iff its lowercased header contains one of
    ``INSIGHT_HEADER_STEMS``. Returns ``(sections, insight_text, skipped)``
    where ``skipped`` counts annotations whose offsets fall outside the body.
    Paragraphs occurring before the first header are kept under an empty
    header so the section list still covers the document.
    """
    body = raw_paper.get("text")
    if not isinstance(body, str):
        raise InputError("document has no body text")
    annotations = raw_paper.get("annotations") or {}

    skipped = 0

    def in_bounds(start: int, end: int) -> bool:
        return 0 <= start < end <= len(body)

    headers: list[tuple[int, str]] = []
    for start, end in _spans(annotations, "section_headers"):
        if not in_bounds(start, end):
            skipped += 1
            continue
        headers.append((start, body[start:end]))
    headers.sort(key=lambda h: h[0])

    paragraphs: list[tuple[int, str]] = []
    for start, end in _spans(annotations, "paragraphs"):
        if not in_bounds(start, end):
            skipped += 1
            continue
        paragraphs.append((start, body[start:end]))
    paragraphs.sort(key=lambda p: p[0])

    # Assign each paragraph to the last header starting at or before it.
    sections: list[tuple[str, list[str]]] = []
    header_starts = [h[0] for h in headers]
    buckets: list[list[str]] = [[] for _ in headers]
    preamble: list[str] = []
    for start, text in paragraphs:
        idx = _last_at_or_before(header_starts, start)
        if idx is None:
            preamble.append(text)
        else:
            buckets[idx].append(text)
    if preamble:
        sections.append(("", preamble))
    for (_, header_text), bucket in zip(headers, buckets):
        sections.append((header_text, bucket))

    insight_parts: list[str] = []
    for header_text, bucket in sections:
        lowered = header_text.lower()
        if any(stem in lowered for stem in INSIGHT_HEADER_STEMS):
            insight_parts.extend(bucket)
    return sections, "\n".join(insight_parts), skipped


def _last_at_or_before(sorted_starts: list[int], pos: int) -> int | None:
    idx = None
    for i, s in enumerate(sorted_starts):
        if s <= pos:
            idx = i
        else:
            break
    return idx


def _parse_bib_links(raw_paper: dict) -> dict[str, int]:
    links: dict[str, int] = {}
    annotations = raw_paper.get("annotations") or {}
    for entry in annotations.get("bibentry") or []:
        key = entry.get("key")
        cited = entry.get("cited_corpusid")
        if key is None or not isinstance(cited, int):
            continue
        links.setdefault(str(key), cited)
    return links


def _record_from_raw(raw_paper: dict) -> PaperRecord:
    corpus_id = raw_paper["corpusid"]
    if not isinstance(corpus_id, int):
        raise InputError("corpusid must be an integer")
    title = raw_paper.get("title")
    if not isinstance(title, str):
        raise InputError("title must be a string")
    sections, insight_text, skipped = extract_insight_sections(raw_paper)
    year = raw_paper.get("year")
    venue = raw_paper.get("venue")
    return PaperRecord(
        corpus_id=corpus_id,
        title=title,
        body=raw_paper["text"],
        sections=sections,
        insight_text=insight_text,
        bib_links=_parse_bib_links(raw_paper),
        year=year if isinstance(year, int) else None,
        venue=venue if isinstance(venue, str) else None,
        skipped_annotation_count=skipped,
    )


def filter_by_topic(corpus_stream: Iterable, keyword: str) -> TopicSubset:
    """Keep the papers whose title or body mentions ``keyword``.

    ``corpus_stream`` yields raw documents as dicts or as JSON Lines strings;
    malformed documents are skipped and counted, never fatal. The match is a
    case-insensitive substring test. Papers come back sorted by corpus id and
    the subset's citation graph is already resolved.
    """
    if not keyword:
        raise InvalidArgument("topic keyword must be non-empty")
    needle = keyword.lower()

    papers: dict[int, PaperRecord] = {}
    malformed = 0
    index = 0
    stream = iter(corpus_stream)
    while True:
        try:
            raw = next(stream)
        except StopIteration:
            break
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(
                f"corpus stream unreadable at document {index + 1}: {exc}",
                document_index=index + 1,
            ) from exc
        index += 1
        if isinstance(raw, (str, bytes)):
            if isinstance(raw, bytes):
                try:
                    raw = raw.decode("utf-8")
                except UnicodeDecodeError:
                    malformed += 1
                    continue
            if not raw.strip():
                continue
            try:
                raw = json.loads(raw)
            except json.JSONDecodeError:
                malformed += 1
                continue
        if not isinstance(raw, dict):
            malformed += 1
            continue
        try:
            title = raw.get("title")
            body = raw.get("text")
            if not isinstance(title, str) or not isinstance(body, str):
                raise InputError("missing title or text")
            if needle not in title.lower() and needle not in body.lower():
                continue
            record = _record_from_raw(raw)
        except (InputError, KeyError, TypeError, ValueError):
            malformed += 1
            continue
        if record.corpus_id in papers:
            # Duplicate ids violate the subset invariant; first one wins.
            malformed += 1
            continue
        papers[record.corpus_id] = record

    ordered = [papers[cid] for cid in sorted(papers)]
    subset = TopicSubset(
        topic_keyword=keyword,
        papers=ordered,
        citation_edges=set(),
        malformed_document_count=malformed,
    )
    subset.citation_edges, subset.dropped_citation_count = build_citation_graph(subset)
    if malformed:
        log.warning("skipped %d malformed documents while filtering", malformed)
    return subset


def build_citation_graph(subset: TopicSubset) -> tuple[set[tuple[int, int]], int]:
    """Resolve bib links inside the subset.

    An edge (A, B) means paper A cites paper B. Links pointing outside the
    subset are dropped and counted; self-citations and duplicates are
    silently collapsed.
    """
    ids = {p.corpus_id for p in subset.papers}
    edges: set[tuple[int, int]] = set()
    dropped = 0
    for paper in subset.papers:
        for cited in paper.bib_links.values():
            if cited not in ids:
                dropped += 1
                continue
            if cited == paper.corpus_id:
                continue
            edges.add((paper.corpus_id, cited))
    return edges, dropped


def in_citation_counts(subset: TopicSubset) -> dict[int, int]:
    """Subset-internal in-degree (how many subset papers cite each paper)."""
    counts = {p.corpus_id: 0 for p in subset.papers}
    for _, cited in subset.citation_edges:
        counts[cited] += 1
    return counts


# --------------------------------------------------------------------------
# File I/O
# --------------------------------------------------------------------------


def iter_jsonl_lines(path: str | Path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from fh


def load_subset(path: str | Path, keyword: str) -> TopicSubset:
    """Stream a JSON Lines corpus file and filter it by topic."""
    return filter_by_topic(iter_jsonl_lines(path), keyword)


def write_subset(subset: TopicSubset, papers_path: str | Path, edges_path: str | Path) -> None:
    """Write the subset file plus the ``citing,cited`` edges sidecar."""
    with open(papers_path, "w", encoding="utf-8") as fh:
        for paper in subset.papers:
            fh.write(json.dumps(_subset_line(paper), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
    with open(edges_path, "w", encoding="utf-8") as fh:
        for citing, cited in sorted(subset.citation_edges):
            fh.write(f"{citing},{cited}\n")


def _subset_line(paper: PaperRecord) -> dict:
    # The subset file re-serializes derived fields so downstream stages do
    # not have to re-run offset extraction.
    obj = {
        "corpusid": paper.corpus_id,
        "title": paper.title,
        "text": paper.body,
        "sections": [[h, ps] for h, ps in paper.sections],
        "insight_text": paper.insight_text,
        "bib_links": {k: v for k, v in sorted(paper.bib_links.items())},
    }
    if paper.year is not None:
        obj["year"] = paper.year
    if paper.venue is not None:
        obj["venue"] = paper.venue
    return obj


def read_subset(papers_path: str | Path, edges_path: str | Path, keyword: str) -> TopicSubset:
    """Load a subset previously written by :func:`write_subset`."""
    papers: list[PaperRecord] = []
    for line in iter_jsonl_lines(papers_path):
        if not line.strip():
            continue
        obj = json.loads(line)
        papers.append(
            PaperRecord(
                corpus_id=obj["corpusid"],
                title=obj["title"],
                body=obj["text"],
                sections=[(h, list(ps)) for h, ps in obj.get("sections", [])],
                insight_text=obj.get("insight_text", ""),
                bib_links={k: int(v) for k, v in obj.get("bib_links", {}).items()},
                year=obj.get("year"),
                venue=obj.get("venue"),
            )
        )
    edges: set[tuple[int, int]] = set()
    edges_file = Path(edges_path)
    if edges_file.exists():
        for line in edges_file.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            citing, cited = line.split(",")
            edges.add((int(citing), int(cited)))
    subset = TopicSubset(topic_keyword=keyword, papers=papers, citation_edges=edges)
    _, subset.dropped_citation_count = build_citation_graph(subset)
    return subset
