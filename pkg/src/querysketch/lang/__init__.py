"""Sketch language: AST, parser, printer, refinement, and matching."""

from .nodes import (
    COLUMN,
    TABLE,
    BaseTable,
    ColumnHole,
    ColumnName,
    Const,
    Join,
    Pred,
    PredAnd,
    PredCmp,
    PredOr,
    PredTrue,
    Query,
    Select,
    Soft,
    SoftAnd,
    SoftCmp,
    SoftContains,
    SoftIn,
    SoftTrue,
    TableExpr,
    TableHole,
    chain_tables,
    children,
    hole_kinds,
    holes,
    is_complete,
    size,
    soft_blocks,
    soft_primitives,
    walk,
    with_soft,
)
from .parser import parse_sketch, tokenize
from .printer import colref_text, const_text, pred_text, print_sketch, soft_text, table_expr_text
from .refine import (
    HoleFill,
    Refinement,
    apply_refinement,
    fresh_hole_names,
    matches,
    strip_soft,
    substitute,
)

__all__ = [
    "COLUMN", "TABLE",
    "BaseTable", "ColumnHole", "ColumnName", "Const", "Join", "Pred", "PredAnd",
    "PredCmp", "PredOr", "PredTrue", "Query", "Select", "Soft", "SoftAnd",
    "SoftCmp", "SoftContains", "SoftIn", "SoftTrue", "TableExpr", "TableHole",
    "chain_tables", "children", "hole_kinds", "holes", "is_complete", "size",
    "soft_blocks", "soft_primitives", "walk", "with_soft",
    "parse_sketch", "tokenize",
    "colref_text", "const_text", "pred_text", "print_sketch", "soft_text", "table_expr_text",
    "HoleFill", "Refinement", "apply_refinement", "fresh_hole_names", "matches",
    "strip_soft", "substitute",
]
