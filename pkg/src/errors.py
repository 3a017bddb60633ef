"""
Exception hierarchy for covsteer.
Library code raises these; the CLI maps them to exit codes.
"""

from typing import Sequence


class CovsteerError(Exception):
    """Base class for all covsteer errors."""


class ConfigurationError(CovsteerError):
    """Invalid parameters, mixes, ranges or config files."""


class UsageError(CovsteerError):
    """API or CLI misuse (unfitted model, non-scalar loss, bad flags)."""


class CorpusParseError(CovsteerError):
    def __init__(self, line_no: int, reason: str) -> None:
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class EmptyCorpusError(CovsteerError):
    """Corpus file holds no tests."""


class StimulusValidationError(CovsteerError):
    def __init__(self, index: int, reason: str) -> None:
        self.index = index
        self.reason = reason
        super().__init__(f"transaction {index}: {reason}")


class CoverageConsistencyError(CovsteerError):
    """An event key lies outside the coverage universe."""


class EncodingError(CovsteerError):
    """A transaction cannot be encoded with the fitted schema."""


class ShapeError(CovsteerError):
    def __init__(self, op: str, shape_a: Sequence[int], shape_b: Sequence[int]) -> None:
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        super().__init__(f"{op}: incompatible shapes {self.shape_a} and {self.shape_b}")


class TrainingError(CovsteerError):
    """Training diverged (NaN/inf gradients or loss)."""


class InternalError(CovsteerError):
    """A broken internal invariant (e.g. a test with no window scores)."""
