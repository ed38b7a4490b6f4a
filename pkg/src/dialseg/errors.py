"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numeric problems exit 3.
"""

from __future__ import annotations


class DialsegError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(DialsegError, ValueError):
    """A caller violated a documented precondition."""


class UsageError(DialsegError):
    """Bad or inconsistent command-line invocation."""


class DataError(DialsegError):
    """A problem with input data (files, corpora, services)."""


class CorpusParseError(DataError):
    """A corpus line failed to parse or validate."""

    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class DuplicateDialogueIdError(DataError):
    """Two dialogues in one file share an id."""


class InvalidBoundaryError(DataError):
    """A serialized boundary is out of range for its dialogue."""


class EmbeddingFileError(DataError):
    """A precomputed embedding file is malformed or inconsistent."""


class MissingEmbeddingError(DataError):
    """A precomputed embedding file lacks a required key."""

    def __init__(self, key: str):
        super().__init__(f"no embedding stored for key {key!r}")
        self.key = key


class ScoreFileError(DataError):
    """A precomputed coherence score file is malformed."""


class MissingScoreError(DataError):
    """A precomputed coherence file lacks a required interval score."""


class EvaluationError(DataError):
    """Reference and hypothesis segmentations cannot be aligned."""


class TransportError(DataError):
    """An embedding service call failed."""

    def __init__(self, endpoint: str, status: int | None, message: str = ""):
        detail = f"status {status}" if status is not None else "no response"
        suffix = f": {message}" if message else ""
        super().__init__(f"embedding service {endpoint} failed ({detail}){suffix}")
        self.endpoint = endpoint
        self.status = status


class GenerationError(DataError):
    """Synthetic data or training-pair generation is impossible as configured."""


class NumericError(DialsegError):
    """A non-finite value appeared where the math requires finite numbers."""
