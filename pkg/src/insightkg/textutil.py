"""Tokenization helpers shared by the embedding and keyword machinery.

The token stream must be stable across runs and machines: vectors, keyword
ranks and graph exports are all byte-compared in tests, so nothing here may
depend on hash randomization or locale.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Frozen list. Editing it changes every vector and keyword rank, so treat it
# like a file format, not a tuning knob.
STOPWORDS = frozenset(
    """
    a about above after again all also an and any are as at be because been
    before being below between both but by can could did do does doing down
    during each few for from further had has have having he her here hers him
    his how i if in into is it its itself just me more most my no nor not of
    off on once only or other our ours out over own same she should so some
    such than that the their theirs them then there these they this those
    through to too under until up very was we were what when where which
    while who whom why will with would you your yours
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split into alphanumeric runs, stopwords removed."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOPWORDS]


def tokenize_all(text: str) -> list[str]:
    """Like :func:`tokenize` but keeps stopwords (segmenter diagnostics)."""
    return _TOKEN_RE.findall(text.lower())


def truncate(text: str, limit: int, marker: str = "…") -> str:
    """Cut ``text`` to ``limit`` characters, appending ``marker`` if cut."""
    if len(text) <= limit:
        return text
    return text[:limit] + marker
