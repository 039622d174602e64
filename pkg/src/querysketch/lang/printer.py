"""Canonical text rendering of sketch ASTs.

The printed form always re-parses to a structurally identical AST: columns
are printed fully qualified, nested joins are parenthesized, and trailing
soft blocks are emitted in select-then-query order (a ``{true}`` select
block is inserted when only the query-level block is nontrivial).
"""

from __future__ import annotations

from . import nodes as n


def const_text(const: n.Const) -> str:
    if const.kind == "int":
        return str(const.value)
    if const.kind == "float":
        return repr(float(const.value))
    body = str(const.value).replace("\\", "\\\\").replace('"', '\\"')
    if const.kind == "regex":
        return f'r"{body}"'
    return f'"{body}"'


def colref_text(ref: n.ColumnRef) -> str:
    if isinstance(ref, n.ColumnHole):
        return f"??{ref.name}:column"
    return ref.qualified


def _soft_primitive_text(soft: n.Soft) -> str:
    if isinstance(soft, n.SoftTrue):
        return "true"
    if isinstance(soft, n.SoftIn):
        return f"({const_text(soft.value)} in {colref_text(soft.column)})"
    if isinstance(soft, n.SoftContains):
        body = str(soft.pattern.value).replace("\\", "\\\\").replace('"', '\\"')
        return f'(contains {colref_text(soft.column)} "{body}")'
    assert isinstance(soft, n.SoftCmp)
    return f"({colref_text(soft.column)} {n.SIM_TEXT[soft.op]} {const_text(soft.value)})"


def soft_text(soft: n.Soft) -> str:
    if isinstance(soft, n.SoftAnd):
        left = soft_text(soft.left)
        right = soft_text(soft.right)
        if isinstance(soft.right, n.SoftAnd):
            right = f"({right})"
        return f"{left} AND {right}"
    return _soft_primitive_text(soft)


def _soft_block(soft: n.Soft) -> str:
    return " {" + soft_text(soft) + "}"


def pred_text(pred: n.Pred) -> str:
    if isinstance(pred, n.PredTrue):
        return "true"
    if isinstance(pred, n.PredCmp):
        return f"{colref_text(pred.column)} {n.REL_TEXT[pred.op]} {const_text(pred.value)}"
    if isinstance(pred, n.PredAnd):
        left = pred_text(pred.left)
        right = pred_text(pred.right)
        if isinstance(pred.left, n.PredOr):
            left = f"({left})"
        if isinstance(pred.right, (n.PredAnd, n.PredOr)):
            right = f"({right})"
        return f"{left} AND {right}"
    assert isinstance(pred, n.PredOr)
    left = pred_text(pred.left)
    right = pred_text(pred.right)
    if isinstance(pred.right, n.PredOr):
        right = f"({right})"
    return f"{left} OR {right}"


def table_expr_text(expr: n.TableExpr) -> str:
    if isinstance(expr, n.BaseTable):
        text = expr.table
    elif isinstance(expr, n.TableHole):
        text = f"??{expr.name}:table"
    else:
        rest = table_expr_text(expr.rest)
        if isinstance(expr.rest, n.Join):
            rest = f"({rest})"
        text = (f"{expr.table} INNER-JOIN {rest} "
                f"ON {colref_text(expr.left_col)} = {colref_text(expr.right_col)}")
    if expr.soft != n.SoftTrue():
        text += _soft_block(expr.soft)
    return text


def print_sketch(query: n.Query) -> str:
    """Render a sketch AST to canonical single-line surface text."""
    parts = ["SELECT " + ", ".join(colref_text(c) for c in query.columns)]
    parts.append(f"FROM ({table_expr_text(query.source.source)})")
    if query.source.predicate != n.PredTrue():
        parts.append("WHERE " + pred_text(query.source.predicate))
    if query.soft != n.SoftTrue():
        parts.append("{" + soft_text(query.source.soft) + "}")
        parts.append("{" + soft_text(query.soft) + "}")
    elif query.source.soft != n.SoftTrue():
        parts.append("{" + soft_text(query.source.soft) + "}")
    return " ".join(parts)
