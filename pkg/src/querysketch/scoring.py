"""Soft-constraint scoring.

Two routes are provided. `score_primitive` / `score_soft` evaluate a
constraint exactly against a materialized result table. `precompute_theta`
evaluates every primitive of a sketch against each type-compatible column's
*base table* once, so that `score_completion` can score any completion from
cheap lookups plus column-set tracking, without executing queries. The two
routes deliberately differ on joined data (base-table scores ignore row
duplication introduced by joins); tests pin both behaviors.

A completion scores -inf when any projection, predicate, or join references
a column that its operand cannot provide, or when a primitive's column is
type-incompatible or outside the constrained expression's column set.
`unnormalized_weight` maps scores through exp, so -inf becomes weight 0.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

from . import lang as L
from .catalog import Catalog, ColumnDef
from .errors import ColumnAbsent, EmptyColumn, TypeIncompatible
from .interp import ResultTable, approx_columns

NEG_INF = float("-inf")

# primitive shape: the constraint with its column slot removed
Shape = tuple


def primitive_shape(prim: L.SoftPrimitive) -> Shape:
    if isinstance(prim, L.SoftIn):
        return ("in", prim.value.kind, prim.value.value)
    if isinstance(prim, L.SoftContains):
        return ("contains", prim.pattern.value)
    assert isinstance(prim, L.SoftCmp)
    return ("cmp", prim.op, prim.value.kind, prim.value.value)


def shape_compatible(shape: Shape, column_type: str) -> bool:
    if shape[0] == "contains":
        return column_type == "string"
    kind = shape[1] if shape[0] == "in" else shape[2]
    if kind == "regex":
        return column_type == "string"
    return kind == column_type


def compatible_value_types(prim: L.SoftPrimitive) -> set[str]:
    return {t for t in ("int", "float", "string") if shape_compatible(primitive_shape(prim), t)}


# --- exact scoring on result tables ------------------------------------------


def _column_cells(prim_column: L.ColumnRef, table: ResultTable) -> tuple[ColumnDef, list]:
    if not isinstance(prim_column, L.ColumnName):
        raise ColumnAbsent("cannot score a primitive whose column is still a hole")
    names = table.qualified_names()
    if prim_column.qualified not in names:
        raise ColumnAbsent(f"column {prim_column.qualified} is absent from the scored table")
    idx = names.index(prim_column.qualified)
    return table.columns[idx], [row[idx] for row in table.rows]


def score_primitive(prim: L.SoftPrimitive, table: ResultTable) -> float:
    """Exact score of one primitive against a result table (Fig.-style semantics)."""
    col, cells = _column_cells(prim.column, table)
    if not shape_compatible(primitive_shape(prim), col.value_type):
        raise TypeIncompatible(
            f"primitive {primitive_shape(prim)} is incompatible with "
            f"{col.qualified} ({col.value_type})"
        )
    if isinstance(prim, L.SoftIn):
        return 1.0 if prim.value.value in cells else 0.0
    if isinstance(prim, L.SoftContains):
        rx = re.compile(str(prim.pattern.value))
        return 1.0 if any(rx.fullmatch(str(c)) for c in cells) else 0.0
    assert isinstance(prim, L.SoftCmp)
    if not cells:
        raise EmptyColumn(f"column {col.qualified} has no rows")
    if prim.value.kind == "regex":
        rx = re.compile(str(prim.value.value))
        hits = sum(1 for c in cells if rx.fullmatch(str(c)))
    else:
        v = prim.value.value
        if prim.op == "lsim":
            hits = sum(1 for c in cells if c <= v)
        elif prim.op == "gsim":
            hits = sum(1 for c in cells if c >= v)
        else:
            hits = sum(1 for c in cells if c == v)
    return hits / len(cells)


def score_soft(soft: L.Soft, table: ResultTable) -> float:
    """Score of a conjunction tree: the sum of its primitives' scores."""
    if isinstance(soft, L.SoftTrue):
        return 0.0
    if isinstance(soft, L.SoftAnd):
        return score_soft(soft.left, table) + score_soft(soft.right, table)
    return score_primitive(soft, table)


# --- precomputed scores -------------------------------------------------------


@dataclass
class ThetaTable:
    """(primitive shape, qualified column) -> base-table score.

    Type-incompatible pairs are absent; lookups treat absence as -inf.
    """

    entries: dict[tuple[Shape, str], float] = field(default_factory=dict)

    def lookup(self, shape: Shape, qualified: str) -> float:
        return self.entries.get((shape, qualified), NEG_INF)

    def to_document(self, sketch_hash: str, catalog_hash: str) -> dict:
        return {
            "v": 1,
            "sketch_hash": sketch_hash,
            "catalog_hash": catalog_hash,
            "entries": [[list(shape), qualified, value]
                        for (shape, qualified), value in sorted(self.entries.items())],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "ThetaTable":
        entries = {(tuple(shape), qualified): float(value)
                   for shape, qualified, value in doc["entries"]}
        return cls(entries)


def sketch_hash(sketch: L.Query) -> str:
    return hashlib.sha256(L.print_sketch(sketch).encode()).hexdigest()


def save_theta_cache(path, theta: ThetaTable, sketch: L.Query, catalog: Catalog) -> None:
    doc = theta.to_document(sketch_hash(sketch), catalog.content_digest())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_theta_cache(path, sketch: L.Query, catalog: Catalog) -> ThetaTable | None:
    """Cached table for this (sketch, catalog) pair, or None on any mismatch."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    if doc.get("sketch_hash") != sketch_hash(sketch) \
            or doc.get("catalog_hash") != catalog.content_digest():
        return None
    return ThetaTable.from_document(doc)


def _base_table_result(catalog: Catalog, table_name: str) -> ResultTable:
    t = catalog.table(table_name)
    return ResultTable(t.columns, list(t.rows))


def precompute_theta(sketch: L.Query, catalog: Catalog) -> ThetaTable:
    """Evaluate the sketch's primitives against every compatible column's base table.

    Primitives over a column hole get one entry per type-compatible catalog
    column; primitives over a column constant get a single entry. A fraction
    primitive over an empty column scores 0 here (bulk precomputation must
    stay total).
    """
    theta = ThetaTable()
    for _, soft in L.soft_blocks(sketch):
        for prim in L.soft_primitives(soft):
            shape = primitive_shape(prim)
            if isinstance(prim.column, L.ColumnHole):
                targets = [c for c in catalog.all_columns()
                           if shape_compatible(shape, c.value_type)]
            else:
                col = catalog.resolve_column(prim.column.table, prim.column.column)
                targets = [col] if shape_compatible(shape, col.value_type) else []
            for col in targets:
                concrete = _rebind(prim, L.ColumnName(col.table_name, col.column_name))
                try:
                    value = score_primitive(concrete, _base_table_result(catalog, col.table_name))
                except EmptyColumn:
                    value = 0.0
                theta.entries[(shape, col.qualified)] = value
    return theta


def _rebind(prim: L.SoftPrimitive, column: L.ColumnName) -> L.SoftPrimitive:
    if isinstance(prim, L.SoftIn):
        return L.SoftIn(prim.value, column)
    if isinstance(prim, L.SoftContains):
        return L.SoftContains(column, prim.pattern)
    return L.SoftCmp(column, prim.op, prim.value)


# --- completion scoring ---------------------------------------------------------


def _pred_columns(pred: L.Pred) -> list[L.ColumnRef]:
    if isinstance(pred, (L.PredAnd, L.PredOr)):
        return _pred_columns(pred.left) + _pred_columns(pred.right)
    if isinstance(pred, L.PredCmp):
        return [pred.column]
    return []


def score_completion(completion: L.Query, theta: ThetaTable, catalog: Catalog,
                     lambda_size: float = 0.0) -> float:
    """Approximate score of a hole-free query: theta lookups plus the size term.

    Returns -inf when the query is ill-formed with respect to column sets, or
    when any primitive misses its theta entry.
    """
    from .interp import base_column_set

    # one bottom-up pass over the join chain: validity + per-node column sets
    chain = completion.source.source
    spine: list[L.Join] = []
    node: L.TableExpr = chain
    while isinstance(node, L.Join):
        if not isinstance(node.left_col, L.ColumnName) or not isinstance(node.right_col, L.ColumnName):
            return NEG_INF
        spine.append(node)
        node = node.rest
    if isinstance(node, L.TableHole):
        return NEG_INF

    columns_at: dict[int, frozenset[L.ColumnName]] = {}
    current = base_column_set(catalog, node.table)
    columns_at[id(node)] = current
    for join in reversed(spine):
        left_cols = base_column_set(catalog, join.table)
        if join.left_col not in left_cols or join.right_col not in current:
            return NEG_INF
        current = left_cols | current
        columns_at[id(join)] = current
    flat = current

    for ref in _pred_columns(completion.source.predicate):
        if ref not in flat:
            return NEG_INF
    for ref in completion.columns:
        if ref not in flat:
            return NEG_INF

    projected = frozenset(c for c in completion.columns if isinstance(c, L.ColumnName))
    total = 0.0
    for expr, soft in L.soft_blocks(completion):
        if isinstance(soft, L.SoftTrue):
            continue
        if isinstance(expr, L.Query):
            governed: frozenset[L.ColumnName] = projected
        elif isinstance(expr, L.Select):
            governed = flat
        else:
            governed = columns_at[id(expr)]
        for prim in L.soft_primitives(soft):
            col = prim.column
            if not isinstance(col, L.ColumnName) or col not in governed:
                return NEG_INF
            value = theta.lookup(primitive_shape(prim), col.qualified)
            if value == NEG_INF:
                return NEG_INF
            total += value
    return total + lambda_size * L.size(completion)


def unnormalized_weight(completion: L.Query, theta: ThetaTable, catalog: Catalog,
                        lambda_size: float = 0.0) -> float:
    """exp of the completion score; -inf maps to weight 0."""
    return math.exp(score_completion(completion, theta, catalog, lambda_size))
