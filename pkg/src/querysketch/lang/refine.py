"""Refinement application and the sketch-matching (derivability) relation.

A refinement fills one or more named holes with concrete or partially
concrete expressions. Filling a hole replaces every occurrence of its name
with the same expression; the soft constraint attached at each occurrence
stays attached to the root of the expression that fills it, and fresh holes
introduced by the fill get the default (true) constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import KindMismatch, NoSuchHole
from . import nodes as n
from .printer import colref_text, table_expr_text


@dataclass(frozen=True)
class HoleFill:
    hole: str
    kind: str                          # nodes.TABLE or nodes.COLUMN
    fill: n.ColumnName | n.TableExpr   # table fills carry a SoftTrue root constraint


@dataclass(frozen=True)
class Refinement:
    """An atomic bundle of hole fills (the production sequence of one question)."""

    steps: tuple[HoleFill, ...]

    def summary(self) -> str:
        parts = []
        for step in self.steps:
            if step.kind == n.COLUMN:
                parts.append(f"??{step.hole}:column =>* {colref_text(step.fill)}")
            else:
                parts.append(f"??{step.hole}:table =>* {table_expr_text(step.fill)}")
        return "; ".join(parts)

    def display_tables(self) -> list[str]:
        """Tables a user should preview to judge this refinement."""
        out: list[str] = []
        for step in self.steps:
            if step.kind == n.COLUMN and isinstance(step.fill, n.ColumnName):
                names = [step.fill.table]
            elif step.kind == n.TABLE:
                names = n.chain_tables(step.fill)
            else:
                names = []
            for name in names:
                if name not in out:
                    out.append(name)
        return out


def _conjoin(a: n.Soft, b: n.Soft) -> n.Soft:
    if a == n.SoftTrue():
        return b
    if b == n.SoftTrue():
        return a
    return n.SoftAnd(a, b)


def substitute(node, column_fills: dict[str, n.ColumnRef],
               table_fills: dict[str, n.TableExpr]):
    """Replace named holes throughout a tree; fills are inserted as-is."""
    if isinstance(node, n.ColumnHole):
        return column_fills.get(node.name, node)
    if isinstance(node, n.TableHole):
        soft = substitute(node.soft, column_fills, table_fills)
        fill = table_fills.get(node.name)
        if fill is None:
            return node if soft == node.soft else n.TableHole(node.name, soft)
        return n.with_soft(fill, _conjoin(soft, fill.soft))
    if isinstance(node, n.Query):
        return n.Query(
            tuple(substitute(c, column_fills, table_fills) for c in node.columns),
            substitute(node.source, column_fills, table_fills),
            substitute(node.soft, column_fills, table_fills),
        )
    if isinstance(node, n.Select):
        return n.Select(
            substitute(node.predicate, column_fills, table_fills),
            substitute(node.source, column_fills, table_fills),
            substitute(node.soft, column_fills, table_fills),
        )
    if isinstance(node, n.Join):
        return n.Join(
            node.table,
            substitute(node.left_col, column_fills, table_fills),
            substitute(node.right_col, column_fills, table_fills),
            substitute(node.rest, column_fills, table_fills),
            substitute(node.soft, column_fills, table_fills),
        )
    if isinstance(node, n.BaseTable):
        return n.BaseTable(node.table, substitute(node.soft, column_fills, table_fills))
    if isinstance(node, (n.PredAnd, n.PredOr, n.SoftAnd)):
        return type(node)(
            substitute(node.left, column_fills, table_fills),
            substitute(node.right, column_fills, table_fills),
        )
    if isinstance(node, n.PredCmp):
        return n.PredCmp(substitute(node.column, column_fills, table_fills), node.op, node.value)
    if isinstance(node, n.SoftIn):
        return n.SoftIn(node.value, substitute(node.column, column_fills, table_fills))
    if isinstance(node, n.SoftContains):
        return n.SoftContains(substitute(node.column, column_fills, table_fills), node.pattern)
    if isinstance(node, n.SoftCmp):
        return n.SoftCmp(substitute(node.column, column_fills, table_fills), node.op, node.value)
    return node


def apply_refinement(sketch: n.Query, refinement: Refinement) -> n.Query:
    """Fill the refinement's target holes, every same-named occurrence identically."""
    kinds = n.hole_kinds(sketch)
    column_fills: dict[str, n.ColumnRef] = {}
    table_fills: dict[str, n.TableExpr] = {}
    for step in refinement.steps:
        if step.hole not in kinds:
            raise NoSuchHole(f"sketch has no hole named '{step.hole}'")
        if kinds[step.hole] != step.kind:
            raise KindMismatch(
                f"hole '{step.hole}' has kind {kinds[step.hole]}, refinement targets {step.kind}"
            )
        if step.kind == n.COLUMN:
            column_fills[step.hole] = step.fill
        else:
            table_fills[step.hole] = step.fill
    return substitute(sketch, column_fills, table_fills)


def fresh_hole_names(sketch: n.Query, base: str, count: int,
                     reserved: set[str] | None = None) -> list[str]:
    """`count` names of the form `{base}_new<k>` not colliding with existing holes."""
    taken = set(n.hole_kinds(sketch)) | (reserved or set())
    out: list[str] = []
    k = 0
    while len(out) < count:
        name = f"{base}_new{k}"
        if name not in taken:
            out.append(name)
            taken.add(name)
        k += 1
    return out


def strip_soft(node):
    """Copy of a tree with every soft constraint replaced by true."""
    if isinstance(node, n.Query):
        return n.Query(node.columns, strip_soft(node.source), n.SoftTrue())
    if isinstance(node, n.Select):
        return n.Select(node.predicate, strip_soft(node.source), n.SoftTrue())
    if isinstance(node, n.Join):
        return n.Join(node.table, node.left_col, node.right_col, strip_soft(node.rest), n.SoftTrue())
    if isinstance(node, n.BaseTable):
        return n.BaseTable(node.table, n.SoftTrue())
    if isinstance(node, n.TableHole):
        return n.TableHole(node.name, n.SoftTrue())
    return node


# --- the matching relation ---------------------------------------------------


def _bind_table(bindings: dict, name: str, value: n.TableExpr) -> bool:
    bare = n.with_soft(value, n.SoftTrue())
    if name in bindings:
        return bindings[name] == bare
    bindings[name] = bare
    return True


def _bind_column(bindings: dict, name: str, value: n.ColumnRef) -> bool:
    if name in bindings:
        return bindings[name] == value
    bindings[name] = value
    return True


def _align(a, b, tbind: dict, cbind: dict) -> bool:
    if isinstance(a, n.ColumnHole):
        if not isinstance(b, (n.ColumnName, n.ColumnHole)):
            return False
        return _bind_column(cbind, a.name, b)
    if isinstance(a, n.TableHole):
        if not isinstance(b, (n.BaseTable, n.Join, n.TableHole)):
            return False
        return _align(a.soft, b.soft, tbind, cbind) and _bind_table(tbind, a.name, b)
    if type(a) is not type(b):
        return False
    if isinstance(a, n.Query):
        return (len(a.columns) == len(b.columns)
                and all(_align(x, y, tbind, cbind) for x, y in zip(a.columns, b.columns))
                and _align(a.source, b.source, tbind, cbind)
                and _align(a.soft, b.soft, tbind, cbind))
    if isinstance(a, n.Select):
        return (_align(a.predicate, b.predicate, tbind, cbind)
                and _align(a.source, b.source, tbind, cbind)
                and _align(a.soft, b.soft, tbind, cbind))
    if isinstance(a, n.Join):
        return (a.table == b.table
                and _align(a.left_col, b.left_col, tbind, cbind)
                and _align(a.right_col, b.right_col, tbind, cbind)
                and _align(a.rest, b.rest, tbind, cbind)
                and _align(a.soft, b.soft, tbind, cbind))
    if isinstance(a, n.BaseTable):
        return a.table == b.table and _align(a.soft, b.soft, tbind, cbind)
    if isinstance(a, (n.PredAnd, n.PredOr, n.SoftAnd)):
        return (_align(a.left, b.left, tbind, cbind)
                and _align(a.right, b.right, tbind, cbind))
    if isinstance(a, n.PredCmp):
        return a.op == b.op and a.value == b.value and _align(a.column, b.column, tbind, cbind)
    if isinstance(a, n.SoftIn):
        return a.value == b.value and _align(a.column, b.column, tbind, cbind)
    if isinstance(a, n.SoftContains):
        return a.pattern == b.pattern and _align(a.column, b.column, tbind, cbind)
    if isinstance(a, n.SoftCmp):
        return a.op == b.op and a.value == b.value and _align(a.column, b.column, tbind, cbind)
    return a == b


def matches(sketch: n.Query, candidate: n.Query) -> bool:
    """True iff `candidate` is derivable from `sketch`.

    Derivability assigns one expression per hole name (identical across all
    occurrences of the name); the constraint attached at a hole occurrence
    must align with the constraint attached to the expression filling it.
    `candidate` may itself contain holes, in which case the check is whether
    `candidate` refines `sketch`.
    """
    return _align(sketch, candidate, {}, {})
