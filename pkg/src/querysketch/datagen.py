"""Synthetic benchmark generator.

Builds small catalogs whose tables form a random foreign-key tree, plants a
ground-truth query over a random join chain, and derives the sketch a user
would plausibly write for it: every table and every used column becomes a
named hole, and each used column gets one soft constraint on the table hole
(a contains marker for strings, a snug value range for numerics), following
the guideline that effective sketches constrain every column they mention.

The planted constraints discriminate: every string column carries a
column-specific marker word in some cells, and numeric columns live in
column-specific value ranges, so the right fill scores well ahead of the
alternatives while never being hard-required.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass
from pathlib import Path

from . import lang as L
from .catalog import Catalog, load_database_from

_WORDS = (
    "amber", "basalt", "cedar", "delta", "ember", "fjord", "garnet", "harbor",
    "indigo", "juniper", "krill", "lagoon", "meadow", "nectar", "onyx", "prairie",
    "quartz", "reef", "saffron", "tundra", "umber", "velvet", "willow", "zephyr",
)


@dataclass
class SyntheticCase:
    name: str
    schema_doc: dict
    csv_data: dict[str, str]
    catalog: Catalog
    sketch: L.Query
    ground_truth: L.Query

    def sketch_text(self) -> str:
        return L.print_sketch(self.sketch)

    def ground_truth_text(self) -> str:
        return L.print_sketch(self.ground_truth)

    def write(self, directory: str | Path) -> dict:
        """Write schema, CSVs, sketch, and ground truth; returns a manifest entry."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "schema.json").write_text(json.dumps(self.schema_doc, indent=2),
                                               encoding="utf-8")
        for table, text in self.csv_data.items():
            (directory / f"{table}.csv").write_text(text, encoding="utf-8")
        (directory / "sketch.txt").write_text(self.sketch_text() + "\n", encoding="utf-8")
        (directory / "ground_truth.txt").write_text(self.ground_truth_text() + "\n",
                                                    encoding="utf-8")
        return {"name": self.name, "schema": "schema.json", "data": ".",
                "sketch": "sketch.txt", "ground_truth": "ground_truth.txt"}


def _csv_text(header: list[str], rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _marker(table: str, column: str) -> str:
    return f"{table}{column}mark"


def generate_case(seed: int, n_tables: int = 5, payload_columns: int = 3,
                  rows_per_table: int = 8, chain_length: int = 3,
                  projection_columns: int = 2) -> SyntheticCase:
    """One synthetic (catalog, sketch, ground truth) triple, fully seed-determined."""
    rng = random.Random(f"case|{seed}")
    n_tables = max(2, n_tables)
    chain_length = max(1, min(chain_length, n_tables))

    # schema: a random foreign-key tree plus typed payload columns
    tables = [f"tab{i}" for i in range(n_tables)]
    parents = {i: rng.randrange(i) for i in range(1, n_tables)}
    col_meta: dict[str, list[tuple[str, str]]] = {}
    table_specs = []
    for i, tname in enumerate(tables):
        cols = [{"name": "id", "type": "int", "key": "primary"}]
        if i > 0:
            parent = tables[parents[i]]
            cols.append({"name": f"{parent}_id", "type": "int",
                         "key": {"foreign": f"{parent}.id"}})
        meta = []
        for k in range(payload_columns):
            ctype = rng.choice(("int", "float", "string"))
            cname = f"p{k}"
            cols.append({"name": cname, "type": ctype, "key": "none"})
            meta.append((cname, ctype))
        col_meta[tname] = meta
        table_specs.append({"name": tname, "file": f"{tname}.csv", "columns": cols})
    schema_doc = {"tables": table_specs}

    # row data; numeric columns get column-specific ranges, string columns a marker
    ranges: dict[tuple[str, str], tuple[float, float]] = {}
    csv_data: dict[str, str] = {}
    for i, tname in enumerate(tables):
        header = [spec["name"] for spec in table_specs[i]["columns"]]
        rows = []
        for rid in range(rows_per_table):
            row: list = [rid]
            if i > 0:
                row.append(rng.randrange(rows_per_table))
            for cname, ctype in col_meta[tname]:
                if ctype == "int":
                    base = ranges.setdefault((tname, cname),
                                             (rng.randrange(0, 2000, 50),) * 2)[0]
                    row.append(int(base) + rng.randrange(41))
                elif ctype == "float":
                    base = ranges.setdefault((tname, cname),
                                             (50.0 * rng.randrange(0, 40),) * 2)[0]
                    row.append(round(base + rng.random() * 40.0, 3))
                else:
                    word = rng.choice(_WORDS)
                    if rng.random() < 0.6:
                        row.append(f"{word} {_marker(tname, cname)}")
                    else:
                        row.append(word)
            rows.append(tuple(row))
        csv_data[tname] = _csv_text(header, rows)

    catalog = load_database_from(schema_doc, ".", inline_csv=csv_data)

    # ground-truth join chain: a non-revisiting walk over key edges
    chain_tables = [rng.choice(tables)]
    edges_used: list[tuple[L.ColumnName, L.ColumnName]] = []
    while len(chain_tables) < chain_length:
        options = [(lc, rc, rt) for lc, rc, rt in catalog.join_candidates(chain_tables[-1])
                   if rt not in chain_tables]
        if not options:
            break
        lc, rc, rt = rng.choice(options)
        edges_used.append((L.ColumnName(lc.table_name, lc.column_name),
                           L.ColumnName(rc.table_name, rc.column_name)))
        chain_tables.append(rt)

    chain: L.TableExpr = L.BaseTable(chain_tables[-1])
    for tname, (lc, rc) in zip(reversed(chain_tables[:-1]), reversed(edges_used)):
        chain = L.Join(tname, lc, rc, chain)

    # pick the ground-truth columns: payload columns of chain tables
    payload_pool = [
        (tname, cname, ctype)
        for tname in chain_tables
        for cname, ctype in col_meta[tname]
    ]
    rng.shuffle(payload_pool)
    n_proj = min(projection_columns, len(payload_pool) - 1)
    projection = payload_pool[:n_proj]
    where_col = payload_pool[n_proj]

    hole_of: dict[tuple[str, str], str] = {}
    for idx, (tname, cname, _) in enumerate(projection + [where_col]):
        hole_of.setdefault((tname, cname), f"c{idx}")

    def hole_ref(tname: str, cname: str) -> L.ColumnHole:
        return L.ColumnHole(hole_of[(tname, cname)])

    def const_for(tname: str, cname: str, ctype: str) -> L.Const:
        values = catalog.table(tname).column_values(cname)
        value = rng.choice(values)
        return L.Const(ctype, value)

    # WHERE predicate on the last picked column
    wt, wc, wtype = where_col
    if wtype == "string":
        pred_op = "eq"
        pred_const = const_for(wt, wc, wtype)
    else:
        pred_op = rng.choice(("ge", "le", "eq"))
        pred_const = const_for(wt, wc, wtype)
    predicate_sketch: L.Pred = L.PredCmp(hole_ref(wt, wc), pred_op, pred_const)

    # one soft primitive per used column, on the table hole
    soft: L.Soft = L.SoftTrue()
    for tname, cname, ctype in dict.fromkeys(projection + [where_col]):
        ref = hole_ref(tname, cname)
        if ctype == "string":
            prim: L.Soft = L.SoftContains(ref, L.Const("regex", f".*{_marker(tname, cname)}.*"))
        else:
            lo, hi = ranges[(tname, cname)][0], ranges[(tname, cname)][0] + 41
            if ctype == "float":
                lo, hi = float(lo), float(lo) + 41.0
            prim = L.SoftAnd(L.SoftCmp(ref, "gsim", L.Const(ctype, lo)),
                             L.SoftCmp(ref, "lsim", L.Const(ctype, hi)))
        soft = prim if soft == L.SoftTrue() else L.SoftAnd(soft, prim)

    sketch = L.Query(
        tuple(hole_ref(t, c) for t, c, _ in projection),
        L.Select(predicate_sketch, L.TableHole("t", soft)),
    )

    column_fills = {hole_of[(t, c)]: L.ColumnName(t, c) for t, c, _ in projection + [where_col]}
    ground_truth = L.substitute(sketch, column_fills, {"t": chain})

    assert L.is_complete(ground_truth)
    assert L.matches(sketch, ground_truth)
    return SyntheticCase(f"synthetic-{seed}", schema_doc, csv_data, catalog,
                         sketch, ground_truth)


def generate_suite(base_seed: int, count: int, **kwargs) -> list[SyntheticCase]:
    return [generate_case(base_seed + i, **kwargs) for i in range(count)]
