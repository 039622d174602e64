"""Exception hierarchy shared across the package.

Every error raised by querysketch derives from QuerySketchError so callers
can catch the whole family at API boundaries (CLI exit codes, HTTP status
mapping) without enumerating leaf classes.
"""

from __future__ import annotations


class QuerySketchError(Exception):
    """Base class for all errors raised by this package."""


# --- catalog ---------------------------------------------------------------

class CatalogError(QuerySketchError):
    pass


class SchemaFormatError(CatalogError):
    pass


class MissingTableFile(CatalogError):
    pass


class HeaderMismatch(CatalogError):
    pass


class TypeMismatch(CatalogError):
    def __init__(self, message: str, table: str = "", row: int = -1, column: str = ""):
        super().__init__(message)
        self.table = table
        self.row = row
        self.column = column


class DanglingKeyReference(CatalogError):
    pass


class DuplicateQualifiedColumn(CatalogError):
    pass


class UnknownTable(CatalogError):
    pass


# --- sketch language -------------------------------------------------------

class SketchSyntaxError(QuerySketchError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownColumnConstant(QuerySketchError):
    pass


class HoleKindConflict(QuerySketchError):
    pass


class HoleAtForbiddenPosition(QuerySketchError):
    pass


class NoSuchHole(QuerySketchError):
    pass


class KindMismatch(QuerySketchError):
    pass


# --- evaluation ------------------------------------------------------------

class UnresolvedColumn(QuerySketchError):
    pass


class UnresolvedTable(QuerySketchError):
    pass


class TypeErrorInPredicate(QuerySketchError):
    pass


# --- soft-constraint scoring -----------------------------------------------

class ColumnAbsent(QuerySketchError):
    pass


class TypeIncompatible(QuerySketchError):
    pass


class EmptyColumn(QuerySketchError):
    pass


# --- sampling and questions ------------------------------------------------

class NoValidExpansion(QuerySketchError):
    pass


class RejectionExhausted(QuerySketchError):
    def __init__(self, message: str, negatives: tuple = ()):
        super().__init__(message)
        self.negatives = negatives


class NoCandidates(QuerySketchError):
    pass


class EmptyCandidateList(QuerySketchError):
    pass


# --- session ---------------------------------------------------------------

class SessionComplete(QuerySketchError):
    pass


class SessionFailed(QuerySketchError):
    pass


class EmptyHistory(QuerySketchError):
    pass


class GroundTruthNotDerivable(QuerySketchError):
    pass
