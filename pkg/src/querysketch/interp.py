"""Concrete relational semantics for hole-free queries, plus the approximate
semantics that tracks only column sets.

Joins keep all columns of both operands; qualified names keep join pairs
distinct, and `ResultTable.display()` collapses equal-valued join partners
the way a user would expect to read the table. Soft-constraint blocks are
ignored here; they are scored separately.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from . import lang as L
from .catalog import Catalog, Cell, ColumnDef, Row
from .errors import TypeErrorInPredicate, UnresolvedColumn, UnresolvedTable


@dataclass
class ResultTable:
    columns: tuple[ColumnDef, ...]       # qualified provenance of every output column
    rows: list[Row]
    hidden: frozenset[str] = frozenset() # qualified names suppressed in display (join partners)

    def qualified_names(self) -> list[str]:
        return [c.qualified for c in self.columns]

    def column_values(self, qualified: str) -> list[Cell]:
        names = self.qualified_names()
        if qualified not in names:
            raise UnresolvedColumn(f"result table has no column {qualified}")
        idx = names.index(qualified)
        return [row[idx] for row in self.rows]

    def display(self) -> tuple[list[str], list[Row]]:
        """Headers and rows with join-partner columns collapsed.

        Headers are bare column names when unique among the displayed
        columns, qualified otherwise.
        """
        keep = [i for i, c in enumerate(self.columns) if c.qualified not in self.hidden]
        bare = [self.columns[i].column_name for i in keep]
        headers = [
            bare[j] if bare.count(bare[j]) == 1 else self.columns[keep[j]].qualified
            for j in range(len(keep))
        ]
        rows = [tuple(row[i] for i in keep) for row in self.rows]
        return headers, rows

    def to_csv(self) -> str:
        headers, rows = self.display()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return buf.getvalue()


def _base_result(table_name: str, catalog: Catalog) -> ResultTable:
    if not catalog.has_table(table_name):
        raise UnresolvedTable(f"unknown table '{table_name}'")
    t = catalog.table(table_name)
    return ResultTable(t.columns, list(t.rows))


def _eval_chain(expr: L.TableExpr, catalog: Catalog) -> ResultTable:
    if isinstance(expr, L.TableHole):
        raise UnresolvedTable(f"cannot evaluate table hole '??{expr.name}'")
    if isinstance(expr, L.BaseTable):
        return _base_result(expr.table, catalog)

    left = _base_result(expr.table, catalog)
    right = _eval_chain(expr.rest, catalog)
    lcol = _require_column(expr.left_col, left, "inner-join")
    rcol = _require_column(expr.right_col, right, "inner-join")

    lidx = left.qualified_names().index(lcol.qualified)
    ridx = right.qualified_names().index(rcol.qualified)
    buckets: dict[Cell, list[Row]] = {}
    for row in right.rows:
        buckets.setdefault(row[ridx], []).append(row)
    rows = [lrow + rrow for lrow in left.rows for rrow in buckets.get(lrow[lidx], [])]
    # the right join column duplicates the left one; hide it in display
    hidden = left.hidden | right.hidden | {rcol.qualified}
    return ResultTable(left.columns + right.columns, rows, hidden)


def _require_column(ref: L.ColumnRef, table: ResultTable, context: str) -> L.ColumnName:
    if isinstance(ref, L.ColumnHole):
        raise UnresolvedColumn(f"cannot evaluate column hole '??{ref.name}' in {context}")
    if ref.qualified not in table.qualified_names():
        raise UnresolvedColumn(f"column {ref.qualified} is not available in {context}")
    return ref


_REL = {
    "le": lambda a, b: a <= b,
    "lt": lambda a, b: a < b,
    "eq": lambda a, b: a == b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}

_COMPARABLE = {("int", "int"), ("float", "float"), ("string", "string")}


def _eval_pred(pred: L.Pred, table: ResultTable, row: Row,
               col_index: dict[str, int], col_type: dict[str, str]) -> bool:
    if isinstance(pred, L.PredTrue):
        return True
    if isinstance(pred, L.PredAnd):
        return (_eval_pred(pred.left, table, row, col_index, col_type)
                and _eval_pred(pred.right, table, row, col_index, col_type))
    if isinstance(pred, L.PredOr):
        return (_eval_pred(pred.left, table, row, col_index, col_type)
                or _eval_pred(pred.right, table, row, col_index, col_type))
    assert isinstance(pred, L.PredCmp)
    col = _require_column(pred.column, table, "WHERE predicate")
    if (col_type[col.qualified], pred.value.kind) not in _COMPARABLE:
        raise TypeErrorInPredicate(
            f"cannot compare {col.qualified} ({col_type[col.qualified]}) "
            f"with a {pred.value.kind} constant"
        )
    return _REL[pred.op](row[col_index[col.qualified]], pred.value.value)


def evaluate(query: L.Query, catalog: Catalog) -> ResultTable:
    """Evaluate a hole-free query: join chain, then selection, then projection."""
    flat = _eval_chain(query.source.source, catalog)
    col_index = {q: i for i, q in enumerate(flat.qualified_names())}
    col_type = {c.qualified: c.value_type for c in flat.columns}

    pred = query.source.predicate
    if isinstance(pred, L.PredCmp):
        _require_column(pred.column, flat, "WHERE predicate")
    selected = [row for row in flat.rows
                if _eval_pred(pred, flat, row, col_index, col_type)]

    out_cols = []
    for ref in query.columns:
        col = _require_column(ref, flat, "projection")
        out_cols.append(flat.columns[col_index[col.qualified]])
    out_rows = [tuple(row[col_index[c.qualified]] for c in out_cols) for row in selected]
    # projection lists columns explicitly, so nothing stays hidden
    return ResultTable(tuple(out_cols), out_rows, frozenset())


def base_column_set(catalog: Catalog, table_name: str) -> frozenset[L.ColumnName]:
    """Cached qualified column set of a base table."""
    cache = catalog.__dict__.setdefault("_base_column_set_cache", {})
    hit = cache.get(table_name)
    if hit is None:
        if not catalog.has_table(table_name):
            raise UnresolvedTable(f"unknown table '{table_name}'")
        t = catalog.table(table_name)
        hit = frozenset(L.ColumnName(t.name, c.column_name) for c in t.columns)
        cache[table_name] = hit
    return hit


def approx_columns(expr, catalog: Catalog) -> frozenset[L.ColumnName]:
    """Column set an expression evaluates to, without touching row data.

    Table holes contribute the empty set. Joins keep the columns of both
    sides; selection is transparent; projection restricts to the listed
    columns.
    """
    if isinstance(expr, L.Query):
        inner = approx_columns(expr.source, catalog)
        return frozenset(c for c in expr.columns
                         if isinstance(c, L.ColumnName) and c in inner)
    if isinstance(expr, L.Select):
        return approx_columns(expr.source, catalog)
    if isinstance(expr, L.TableHole):
        return frozenset()
    if isinstance(expr, L.BaseTable):
        return base_column_set(catalog, expr.table)
    assert isinstance(expr, L.Join)
    return base_column_set(catalog, expr.table) | approx_columns(expr.rest, catalog)
