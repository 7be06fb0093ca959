"""Exception types shared across the pipeline."""

from __future__ import annotations


class InsightKgError(Exception):
    """Base class for all package errors."""


class InvalidArgument(InsightKgError):
    """A caller violated an operation precondition."""


class InputError(InsightKgError):
    """Input data could not be read or is structurally unusable."""

    def __init__(self, message: str, document_index: int | None = None):
        super().__init__(message)
        self.document_index = document_index


class ProviderError(InsightKgError):
    """A remote embedding provider failed (network, timeout, non-200)."""

    def __init__(self, message: str, endpoint: str = "", status: int | None = None):
        super().__init__(message)
        self.endpoint = endpoint
        self.status = status


class ProtocolError(InsightKgError):
    """A remote provider answered with a malformed or mismatched payload."""


class UndefinedSimilarity(InsightKgError):
    """Cosine similarity was requested for a flagged zero vector."""


class EmptyMatrixError(InsightKgError):
    """Every bundle was empty, so no relevance matrix can be built."""


class AssemblyError(InsightKgError):
    """Knowledge-graph assembly hit a node with missing inputs."""


class PipelineError(InsightKgError):
    """A pipeline stage failed.

    ``stage`` is the stage name, ``code`` a machine-readable error code that
    doubles as the CLI exit code for that stage.
    """

    def __init__(self, stage: str, code: int, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code
