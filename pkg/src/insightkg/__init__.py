"""Topic-filtered paper corpora turned into explorable knowledge graphs.

The pipeline ingests an annotated JSONL corpus, segments the insight
sections (conclusions, discussions, limitations) into sentences, classifies
each sentence as issue-resolved / neutral / issue-finding, scores
finding-to-resolved relevance chains between papers, grows citation and
relevance forests, and exports them as renderable graph JSON served over
HTTP.
"""

__version__ = "0.1.0"

from .errors import (
    AssemblyError,
    EmptyMatrixError,
    InputError,
    InsightKgError,
    InvalidArgument,
    PipelineError,
    ProtocolError,
    ProviderError,
    UndefinedSimilarity,
)

__all__ = [
    "AssemblyError",
    "EmptyMatrixError",
    "InputError",
    "InsightKgError",
    "InvalidArgument",
    "PipelineError",
    "ProtocolError",
    "ProviderError",
    "UndefinedSimilarity",
    "__version__",
]
