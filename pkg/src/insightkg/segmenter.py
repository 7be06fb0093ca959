"""Rule-based sentence segmentation for scientific prose.

Splits on terminal punctuation followed by whitespace and an
uppercase/digit/bracket sentence opener, except after protected
abbreviations ("et al.", "Fig.", single initials, ...) and inside decimal
numbers. Citation markers and table/figure references stay inline, so a
sentence like "Table 2 shows the gain." survives untouched.

A per-paper override file (JSON Lines of ``{"paper_id", "position",
"action": "split"|"join"}``) can force or suppress individual breaks;
``position`` is the character offset at which the next sentence starts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

# One terminal punctuation run, the whitespace gap, then a sentence opener.
_BREAK_RE = re.compile(r"[.!?]+(?=(\s+)[A-Z0-9(\[{])")
# A standalone single-capital token ending the prefix, e.g. "Smith A."
_INITIAL_RE = re.compile(r"(?:^|[\s(\[{])[A-Z]\.$")
_NEXT_INITIAL_RE = re.compile(r"^\s*[A-Z]\.(?:\s|$)")


@dataclass(frozen=True)
class SentenceSpan:
    """One sentence of a paper's insight text."""

    paper_id: int
    index: int
    text: str
    char_range: tuple[int, int]


def default_abbreviations() -> list[str]:
    """The packaged protected-abbreviation list."""
    raw = resources.files("insightkg.data").joinpath("abbreviations.txt").read_text("utf-8")
    return _parse_abbreviations(raw.splitlines())


def load_abbreviations(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_abbreviations(fh)


def _parse_abbreviations(lines: Iterable[str]) -> list[str]:
    out = []
    for line in lines:
        entry = line.strip()
        if entry and not entry.startswith("#"):
            out.append(entry)
    return out


class OverrideSet:
    """Manual split/join corrections keyed by paper id."""

    def __init__(self):
        self._splits: dict[int, set[int]] = {}
        self._joins: dict[int, set[int]] = {}

    def add(self, paper_id: int, position: int, action: str) -> None:
        if action == "split":
            self._splits.setdefault(paper_id, set()).add(position)
        elif action == "join":
            self._joins.setdefault(paper_id, set()).add(position)
        else:
            raise ValueError(f"unknown override action: {action!r}")

    def for_paper(self, paper_id: int) -> tuple[set[int], set[int]]:
        return (
            self._splits.get(paper_id, set()),
            self._joins.get(paper_id, set()),
        )

    @classmethod
    def load(cls, path: str | Path) -> "OverrideSet":
        overrides = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                overrides.add(int(obj["paper_id"]), int(obj["position"]), obj["action"])
        return overrides


def _is_protected(prefix: str, rest: str, abbreviations: list[str]) -> bool:
    """True if ``prefix`` (text up to and including the punctuation) ends in
    a protected abbreviation, or in a single capital initial used in a name
    context ("Smith A." or an "A. B."-style chain)."""
    lowered = prefix.lower()
    for abbr in abbreviations:
        a = abbr.lower()
        if not lowered.endswith(a):
            continue
        before = lowered[: -len(a)]
        # Guard word boundaries so "pp." does not protect "app.".
        if not before or not before[-1].isalnum():
            return True
    m = _INITIAL_RE.search(prefix)
    if m:
        words = prefix[: m.start()].split()
        prev_word = words[-1] if words else ""
        if prev_word and prev_word[0].isupper():
            return True
        if _NEXT_INITIAL_RE.match(rest):
            return True
    return False


def _rule_breaks(text: str, abbreviations: list[str]) -> set[int]:
    """Offsets at which a new sentence starts, from the punctuation rule.

    Decimal numbers never reach this point: the break pattern demands
    whitespace after the punctuation run, which "3.14" does not have.
    """
    breaks: set[int] = set()
    for match in _BREAK_RE.finditer(text):
        punct_end = match.end()
        if _is_protected(text[:punct_end], text[punct_end:], abbreviations):
            continue
        breaks.add(punct_end + len(match.group(1)))
    return breaks


def segment(
    text: str,
    paper_id: int = 0,
    abbreviations: list[str] | None = None,
    overrides: OverrideSet | None = None,
) -> list[SentenceSpan]:
    """Split ``text`` into ordered, non-overlapping sentence spans.

    Joining the spans (plus the whitespace between them) reproduces the
    input; every span slices back to exactly its own text.
    """
    if not text.strip():
        return []
    if abbreviations is None:
        abbreviations = default_abbreviations()

    breaks = _rule_breaks(text, abbreviations)
    if overrides is not None:
        splits, joins = overrides.for_paper(paper_id)
        breaks -= joins
        breaks |= {p for p in splits if 0 < p < len(text)}

    starts = sorted(breaks)
    spans: list[SentenceSpan] = []
    cursor = 0
    for stop in starts + [len(text)]:
        chunk = text[cursor:stop]
        stripped = chunk.strip()
        if stripped:
            lead = len(chunk) - len(chunk.lstrip())
            start = cursor + lead
            end = start + len(stripped)
            spans.append(
                SentenceSpan(
                    paper_id=paper_id,
                    index=len(spans),
                    text=stripped,
                    char_range=(start, end),
                )
            )
        cursor = stop
    return spans
