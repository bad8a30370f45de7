"""Exception types shared across the toolkit."""

from __future__ import annotations


class FunkitError(Exception):
    """Base class for all toolkit-specific errors."""


class DocumentSyntaxError(FunkitError):
    """Malformed asset document text; carries the position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class SchemaError(FunkitError):
    """Well-formed document with a missing, unknown, or wrongly typed field."""


class FileFormatError(FunkitError):
    """Malformed geometry, mask, or trace file; carries the offending line when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}: "
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class InvalidAssetError(FunkitError):
    """Operation requires a valid asset but validation found violations."""

    def __init__(self, report):
        self.report = report
        codes = ", ".join(v.code for v in report.violations)
        super().__init__(f"asset is invalid: {codes}")


class UnknownTargetError(FunkitError):
    """Requested compilation target is not registered."""


class CodegenError(FunkitError):
    """Script emission failed, e.g. anchor derivation without effector geometry."""


class DegenerateGeometryError(FunkitError):
    """Point set carries too little shape to constrain a rigid fit."""


class HelicalMotionError(FunkitError):
    """Observed motion mixes rotation with axial translation; no pure joint fits."""
