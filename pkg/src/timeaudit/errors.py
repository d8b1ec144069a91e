"""Exception types shared across the audit pipeline."""
from __future__ import annotations


class AuditError(Exception):
    """Base class for every error raised by this library."""


class UnparseableTemporalReference(AuditError):
    """A temporal reference string did not match any supported pattern."""

    def __init__(self, raw_text: str):
        super().__init__(f"unrecognized temporal reference: {raw_text!r}")
        self.raw_text = raw_text


class EmptyRationale(AuditError):
    """The rationale to decompose contained no content."""


class LLMProtocolError(AuditError):
    """The model response violated the expected wire format after retries."""

    def __init__(self, message: str, missing_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.missing_indices = missing_indices


class SchemaViolation(AuditError):
    """A structured payload failed validation against its schema."""


class TooManyClaims(AuditError):
    """Exact enumeration was requested above the configured claim limit."""


class EvaluatorError(AuditError):
    """A characteristic-function evaluation produced a non-finite value."""


class MissingBaseline(AuditError):
    """A regression game was built without its empty-coalition baseline."""


class SearchBackendError(AuditError):
    """The search backend failed for a query."""


class ClaimSetMismatch(AuditError):
    """Attribution and leakage inputs cover different claim-id sets."""


class OutOfRangeProbability(AuditError):
    """A probability fell outside [0, 1]."""


class NonpositiveGroundTruth(AuditError):
    """Relative error needs a strictly positive ground-truth value."""


class LengthMismatch(AuditError):
    """Paired sequences had different lengths."""


class InvalidPermutation(AuditError):
    """A rank vector was not a permutation of 1..n."""


class ZeroOriginal(AuditError):
    """Mean relative error is undefined for a zero original prediction."""


class EmptyAuditSet(AuditError):
    """A report was requested over zero instance audits."""


class DatasetSchemaError(AuditError):
    """A dataset line failed schema validation."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ToolLoopExhausted(AuditError):
    """The tool loop hit its iteration cap without an accepted submission."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = history


class TransportError(AuditError):
    """A network-level failure talking to an external provider."""


class RateLimit(AuditError):
    """The provider asked us to slow down."""


class ScriptError(AuditError):
    """A scripted mock received a request it has no entry for."""


class ClosedWorldViolation(AuditError):
    """Violated-claim content reached the final synthesis prompt."""


class ConfigError(AuditError):
    """Invalid run or provider configuration."""
