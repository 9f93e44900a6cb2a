"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for malformed input,
3 for violated preconditions, 4 for internal invariant breaches.
"""

from __future__ import annotations


class AuditError(Exception):
    exit_code = 1
    kind = "AuditError"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "exit_code": self.exit_code}


class InputFormatError(AuditError):
    exit_code = 2
    kind = "InputFormatError"

    def __init__(self, message: str, *, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)

    def to_dict(self) -> dict:
        out = super().to_dict()
        if self.line is not None:
            out["line"] = self.line
        if self.source is not None:
            out["source"] = self.source
        return out


class MalformedRecord(InputFormatError):
    kind = "MalformedRecord"

    def __init__(self, message: str, *, record_id: str | None = None, **kw):
        self.record_id = record_id
        if record_id is not None:
            message = f"record {record_id!r}: {message}"
        super().__init__(message, **kw)


class PreconditionError(AuditError):
    exit_code = 3
    kind = "PreconditionError"


class InvalidStats(PreconditionError):
    kind = "InvalidStats"


class GapViolation(PreconditionError):
    """Raised by closed-form operations that are only proven for p0 >= p1."""

    kind = "GapViolation"


class EmptyCategory(PreconditionError):
    kind = "EmptyCategory"


class MassMismatch(PreconditionError):
    kind = "MassMismatch"


class MissingGroundTruth(PreconditionError):
    kind = "MissingGroundTruth"


class NoShadows(PreconditionError):
    kind = "NoShadows"


class IdMismatch(PreconditionError):
    kind = "IdMismatch"


class NotARefinement(PreconditionError):
    kind = "NotARefinement"


class CategoryMismatch(PreconditionError):
    kind = "CategoryMismatch"


class InvalidScheme(PreconditionError):
    kind = "InvalidScheme"


class TrainingDiverged(PreconditionError):
    kind = "TrainingDiverged"


class InvariantBreach(AuditError):
    exit_code = 4
    kind = "InvariantBreach"
