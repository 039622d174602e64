"""AST for the query sketch language.

The grammar (start symbol: query)::

    query  := project(columns...)(select) {soft}
    select := filter(pred)(chain) {soft}
    chain  := table {soft} | table join[c, c'] chain {soft}
    pred   := true | col REL const | pred AND pred | pred OR pred
    soft   := true | const in col | contains(col, regex) | col SIM const | soft AND soft

Holes may appear only at chain positions (table holes) and column positions
(column holes). Holes are named; same-named holes must always be filled with
identical expressions. Every table-expression node (query, select, chain)
carries an attached soft-constraint subtree that scores, but never filters,
the table the node evaluates to.

All nodes are immutable; structural equality and hashing come from the
dataclass machinery, so nodes can key caches and sets directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

TABLE = "table"
COLUMN = "column"

# relational operators in hard predicates
REL_OPS = ("le", "lt", "eq", "gt", "ge")
REL_TEXT = {"le": "<=", "lt": "<", "eq": "=", "gt": ">", "ge": ">="}

# soft comparison operators: "roughly at most / roughly equal / roughly at least"
SIM_OPS = ("lsim", "eqsim", "gsim")
SIM_TEXT = {"lsim": "<=", "eqsim": "~=", "gsim": ">="}

CONST_KINDS = ("int", "float", "string", "regex")


@dataclass(frozen=True)
class Const:
    kind: str        # one of CONST_KINDS
    value: int | float | str


@dataclass(frozen=True)
class ColumnName:
    """A concrete, fully qualified column constant."""

    table: str
    column: str

    @property
    def qualified(self) -> str:
        return f"{self.table}.{self.column}"


@dataclass(frozen=True)
class ColumnHole:
    name: str


ColumnRef = Union[ColumnName, ColumnHole]


# --- soft constraints --------------------------------------------------


@dataclass(frozen=True)
class SoftTrue:
    pass


@dataclass(frozen=True)
class SoftIn:
    """Scores 1 when `value` occurs in the column, else 0."""

    value: Const
    column: ColumnRef


@dataclass(frozen=True)
class SoftContains:
    """Scores 1 when some cell of the column fully matches the regex."""

    column: ColumnRef
    pattern: Const   # kind == "regex"


@dataclass(frozen=True)
class SoftCmp:
    """Scores the fraction of column cells related to `value` by `op`."""

    column: ColumnRef
    op: str          # one of SIM_OPS
    value: Const


@dataclass(frozen=True)
class SoftAnd:
    left: "Soft"
    right: "Soft"


Soft = Union[SoftTrue, SoftIn, SoftContains, SoftCmp, SoftAnd]
SoftPrimitive = Union[SoftIn, SoftContains, SoftCmp]


# --- hard predicates ----------------------------------------------------


@dataclass(frozen=True)
class PredTrue:
    pass


@dataclass(frozen=True)
class PredCmp:
    column: ColumnRef
    op: str          # one of REL_OPS
    value: Const


@dataclass(frozen=True)
class PredAnd:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PredOr:
    left: "Pred"
    right: "Pred"


Pred = Union[PredTrue, PredCmp, PredAnd, PredOr]


# --- table expressions ---------------------------------------------------


@dataclass(frozen=True)
class BaseTable:
    table: str
    soft: Soft = SoftTrue()


@dataclass(frozen=True)
class Join:
    """Inner join of a base table with the rest of the chain on left_col = right_col."""

    table: str
    left_col: ColumnRef
    right_col: ColumnRef
    rest: "TableExpr"
    soft: Soft = SoftTrue()


@dataclass(frozen=True)
class TableHole:
    name: str
    soft: Soft = SoftTrue()


TableExpr = Union[BaseTable, Join, TableHole]


@dataclass(frozen=True)
class Select:
    predicate: Pred
    source: TableExpr
    soft: Soft = SoftTrue()


@dataclass(frozen=True)
class Query:
    columns: tuple[ColumnRef, ...]
    source: Select
    soft: Soft = SoftTrue()


Node = Union[Query, Select, TableExpr, Pred, Soft, ColumnRef, Const]


# --- generic tree walking -------------------------------------------------


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, Query):
        return (*node.columns, node.source, node.soft)
    if isinstance(node, Select):
        return (node.predicate, node.source, node.soft)
    if isinstance(node, Join):
        return (node.left_col, node.right_col, node.rest, node.soft)
    if isinstance(node, BaseTable):
        return (node.soft,)
    if isinstance(node, TableHole):
        return (node.soft,)
    if isinstance(node, (PredAnd, PredOr, SoftAnd)):
        return (node.left, node.right)
    if isinstance(node, PredCmp):
        return (node.column, node.value)
    if isinstance(node, SoftIn):
        return (node.value, node.column)
    if isinstance(node, SoftContains):
        return (node.column, node.pattern)
    if isinstance(node, SoftCmp):
        return (node.column, node.value)
    return ()


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal of the tree rooted at `node`."""
    yield node
    for child in children(node):
        yield from walk(child)


def size(node: Node) -> int:
    """Node count of the derivation tree.

    Terminal-carrying leaves (a concrete column, a base-table name) count the
    nonterminal plus its terminal, so filling any hole strictly increases size.
    """
    if isinstance(node, ColumnName):
        return 2
    if isinstance(node, (BaseTable, Join)):
        return 2 + sum(size(c) for c in children(node))
    return 1 + sum(size(c) for c in children(node))


def holes(node: Node, _path: tuple[int, ...] = ()) -> list[tuple[str, str, tuple[int, ...]]]:
    """All hole occurrences as (name, kind, path), in pre-order.

    The path is the sequence of child indices from the root; a table hole's
    own position precedes holes inside its attached soft constraint.
    """
    out: list[tuple[str, str, tuple[int, ...]]] = []
    if isinstance(node, ColumnHole):
        out.append((node.name, COLUMN, _path))
    elif isinstance(node, TableHole):
        out.append((node.name, TABLE, _path))
    for i, child in enumerate(children(node)):
        out.extend(holes(child, _path + (i,)))
    return out


def hole_kinds(node: Node) -> dict[str, str]:
    """Hole name -> kind, in first-occurrence order. Raises on kind conflicts."""
    from ..errors import HoleKindConflict

    kinds: dict[str, str] = {}
    for name, kind, _ in holes(node):
        if kinds.get(name, kind) != kind:
            raise HoleKindConflict(f"hole '{name}' used both as {kinds[name]} and as {kind}")
        kinds.setdefault(name, kind)
    return kinds


def is_complete(node: Node) -> bool:
    return not holes(node)


def chain_tables(expr: TableExpr) -> list[str]:
    """Base-table names along a join chain, left to right (holes contribute nothing)."""
    out = []
    cur: TableExpr = expr
    while isinstance(cur, Join):
        out.append(cur.table)
        cur = cur.rest
    if isinstance(cur, BaseTable):
        out.append(cur.table)
    return out


def with_soft(expr: TableExpr, soft: Soft) -> TableExpr:
    """Copy of `expr` with its attached soft constraint replaced."""
    if isinstance(expr, BaseTable):
        return BaseTable(expr.table, soft)
    if isinstance(expr, Join):
        return Join(expr.table, expr.left_col, expr.right_col, expr.rest, soft)
    return TableHole(expr.name, soft)


def soft_primitives(soft: Soft) -> list[SoftPrimitive]:
    """Primitive constraints of a conjunction tree, left to right."""
    if isinstance(soft, SoftTrue):
        return []
    if isinstance(soft, SoftAnd):
        return soft_primitives(soft.left) + soft_primitives(soft.right)
    return [soft]


def soft_blocks(node: Query) -> list[tuple[TableExpr | Select | Query, Soft]]:
    """(governing expression, attached soft) pairs for every table-expression node."""
    out: list[tuple[TableExpr | Select | Query, Soft]] = [(node, node.soft), (node.source, node.source.soft)]
    cur: TableExpr = node.source.source
    while True:
        out.append((cur, cur.soft))
        if isinstance(cur, Join):
            cur = cur.rest
        else:
            break
    return out
