"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class ChartQueryError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(ChartQueryError):
    """Task text does not conform to the task grammar."""


class ValidationError(ChartQueryError):
    """A structurally well-formed value violates an invariant.

    Carries the list of violations, each as (path, message).
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        detail = "; ".join(f"{path}: {msg}" for path, msg in violations)
        super().__init__(detail or "invalid value")


class SchemaError(ChartQueryError):
    """A chart document does not match the expected schema."""


class ConsistencyError(ChartQueryError):
    """A chart document is schema-valid but internally inconsistent."""


class UnresolvableReference(ChartQueryError):
    """An attribute reference matches nothing in the chart."""


class AmbiguousReference(ChartQueryError):
    """An attribute reference matches more than one thing in the chart."""


class TypeMismatch(ChartQueryError):
    """A filter is applied to an attribute of an incompatible type."""


class UnparseableQuery(ChartQueryError):
    """The translator cannot map a query onto any known task shape."""


class RemoteUnavailable(ChartQueryError):
    """The remote translation backend is unreachable or misconfigured."""


class UnplannableTask(ChartQueryError):
    """A valid task has no manipulation plan on the given chart."""


class PreconditionViolated(ChartQueryError):
    """A manipulation step cannot be applied to the current chart state."""


class EmptySelection(ChartQueryError):
    """An operation requires matching rows and none were selected."""


class MissingOperand(ChartQueryError):
    """A derivation names fewer operands than it requires."""


class NonOverlappingDomains(ChartQueryError):
    """Pointwise derivation found no shared positions between operands."""


class VocabMissing(ChartQueryError):
    """The dataset generator cannot find a requested vocabulary domain."""


class UnknownSession(ChartQueryError):
    """A session id does not exist in the session store."""
