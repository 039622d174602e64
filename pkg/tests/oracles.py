"""Independent brute-force oracles used to pin expected values.

Everything here recomputes results from first principles, without going
through the sampler, the question generator, or the approximate scorer, so
tests can compare the production paths against it.
"""

from __future__ import annotations

import math

import querysketch.lang as L
from querysketch.catalog import Catalog
from querysketch.scoring import ThetaTable, score_completion


def enumerate_chains(catalog: Catalog, head: str | None, budget: int) -> list[L.TableExpr]:
    """Every join chain of at most `budget` tables along declared key edges."""
    heads = [head] if head else sorted(catalog.table_names())
    out: list[L.TableExpr] = []
    for t in heads:
        out.extend(_chains_from(catalog, t, budget))
    return out


def _chains_from(catalog: Catalog, table: str, budget: int) -> list[L.TableExpr]:
    chains: list[L.TableExpr] = [L.BaseTable(table)]
    if budget > 1:
        for lc, rc, right_table in catalog.join_candidates(table):
            left = L.ColumnName(lc.table_name, lc.column_name)
            right = L.ColumnName(rc.table_name, rc.column_name)
            for rest in _chains_from(catalog, right_table, budget - 1):
                chains.append(L.Join(table, left, right, rest))
    return chains


def column_types_oracle(sketch: L.Query, name: str) -> set[str]:
    """Value types admissible for a column hole, re-derived from the raw tree."""
    hole = L.ColumnHole(name)
    allowed = {"int", "float", "string"}
    for node in L.walk(sketch):
        if isinstance(node, L.PredCmp) and node.column == hole:
            allowed &= {node.value.kind}
        elif isinstance(node, L.SoftContains) and node.column == hole:
            allowed &= {"string"}
        elif isinstance(node, L.SoftIn) and node.value.kind != "regex" and node.column == hole:
            allowed &= {node.value.kind}
        elif isinstance(node, L.SoftCmp) and node.column == hole:
            allowed &= {"string"} if node.value.kind == "regex" else {node.value.kind}
    return allowed


def enumerate_completions(sketch: L.Query, catalog: Catalog, budget: int) -> list[L.Query]:
    """All completions of a sketch whose FROM operand is a single table hole.

    Column holes range over every type-compatible catalog column; the table
    hole ranges over every key-edge chain within the depth budget.
    """
    hole_kinds = L.hole_kinds(sketch)
    table_holes = [n for n, k in hole_kinds.items() if k == L.TABLE]
    column_holes = [n for n, k in hole_kinds.items() if k == L.COLUMN]
    assert len(table_holes) <= 1, "oracle only supports one table hole"

    chain_options = enumerate_chains(catalog, None, budget) if table_holes else [None]
    column_options: dict[str, list[L.ColumnName]] = {}
    for name in column_holes:
        types = column_types_oracle(sketch, name)
        column_options[name] = sorted(
            (L.ColumnName(c.table_name, c.column_name)
             for c in catalog.all_columns() if c.value_type in types),
            key=lambda c: c.qualified,
        )

    completions: list[L.Query] = []

    def assign(idx: int, cmap: dict):
        if idx == len(column_holes):
            for chain in chain_options:
                tmap = {table_holes[0]: chain} if table_holes else {}
                completions.append(L.substitute(sketch, dict(cmap), tmap))
            return
        name = column_holes[idx]
        for col in column_options[name]:
            cmap[name] = col
            assign(idx + 1, cmap)
        del cmap[name]

    assign(0, {})
    return completions


def exact_distribution(sketch: L.Query, catalog: Catalog, theta: ThetaTable,
                       budget: int, lambda_size: float = 0.0) -> dict[L.Query, float]:
    """Exact softmax over all enumerated completions (zero-weight ones dropped)."""
    weights: dict[L.Query, float] = {}
    for completion in enumerate_completions(sketch, catalog, budget):
        score = score_completion(completion, theta, catalog, lambda_size)
        if score == float("-inf"):
            continue
        weights[completion] = math.exp(score)
    total = sum(weights.values())
    return {c: w / total for c, w in weights.items()}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def nested_loop_join_count(left_rows, right_rows, left_idx: int, right_idx: int) -> int:
    """Brute-force inner-join row count."""
    return sum(1 for lr in left_rows for rr in right_rows if lr[left_idx] == rr[right_idx])


def node_count(node) -> int:
    """Independent tree-size walk applying the documented counting rule."""
    if isinstance(node, L.ColumnName):
        return 2
    extra = 1 if isinstance(node, (L.BaseTable, L.Join)) else 0
    return 1 + extra + sum(node_count(c) for c in L.children(node))
